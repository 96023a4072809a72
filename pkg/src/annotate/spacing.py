"""
Legibility spacing between label circles.
"""

from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.action_space.geometry import ArrowGeometry


def _far_enough(
    centers: Sequence[Tuple[float, float]], kept: List[Tuple[float, float]], min_spacing_px: float
) -> bool:
    for c in centers:
        for k in kept:
            if np.hypot(c[0] - k[0], c[1] - k[1]) < min_spacing_px:
                return False
    return True


def enforce_spacing(geometries: Sequence[ArrowGeometry], min_spacing_px: float) -> List[int]:
    """
    Greedy legibility filter over label centers.

    Labels are visited in ascending order; a label is kept iff every one of its
    marker centers is at least min_spacing_px from every center already kept.
    A label with several markers (pickplace) is kept or dropped as a whole.

    Args:
        geometries: Candidate geometries
        min_spacing_px: Minimum distance between kept centers; 0 keeps all

    Returns:
        Retained label ids in ascending order
    """
    by_label: Dict[int, List[Tuple[float, float]]] = {}
    for geometry in geometries:
        by_label.setdefault(geometry.label_id, []).append(geometry.end_px)

    if min_spacing_px <= 0:
        return sorted(by_label)

    kept_labels: List[int] = []
    kept_centers: List[Tuple[float, float]] = []
    for label in sorted(by_label):
        centers = by_label[label]
        if _far_enough(centers, kept_centers, min_spacing_px):
            kept_labels.append(label)
            kept_centers.extend(centers)
    return kept_labels


def accepts(
    centers: Sequence[Tuple[float, float]],
    kept_centers: Sequence[Tuple[float, float]],
    min_spacing_px: float,
) -> bool:
    """Whether a new label with these centers may join an already-kept set."""
    if min_spacing_px <= 0:
        return True
    return _far_enough(centers, list(kept_centers), min_spacing_px)
