"""
Candidate batch construction: sample, map to geometry, space out, label, render.
"""

from typing import Callable, List, Optional, Tuple

import numpy as np
import structlog

from src.action_space.camera import CameraModel
from src.action_space.geometry import ArrowGeometry, action_to_geometry
from src.action_space.spaces import Action, ActionSpaceSpec
from src.annotate.renderer import AnnotatedImage, render
from src.annotate.spacing import accepts
from src.errors import EmptyCandidateSet, NonPositiveDepth
from src.models.config import AnnotationStyle

logger = structlog.get_logger(__name__)

TOP_UP_ROUNDS = 3

Sampler = Callable[[int], List[Action]]


def build_candidates(
    image: np.ndarray,
    spec: ActionSpaceSpec,
    camera: Optional[CameraModel],
    sampler: Sampler,
    samples: int,
    style: AnnotationStyle,
    depth_range: Tuple[float, float],
    top_up_rounds: int = TOP_UP_ROUNDS,
) -> AnnotatedImage:
    """
    Build and render one labeled candidate batch.

    Candidates whose label would crowd an already accepted one, or whose
    cart3d target lies behind the camera, are rejected and replaced with
    fresh draws from the sampler for up to top_up_rounds rounds. Accepted
    candidates are labeled 1..n in acceptance order.

    Args:
        image: Base RGB raster
        spec: Action space of the candidates
        camera: Camera model (cart3d only)
        sampler: Draws n actions from the current proposal distribution
        samples: Nominal candidate count M
        style: Drawing parameters (min_spacing_px applies)
        depth_range: (z_min, z_max) for depth styling

    Returns:
        AnnotatedImage whose labels map to the accepted actions

    Raises:
        EmptyCandidateSet: If no candidate survived
    """
    image_size = (image.shape[1], image.shape[0])
    accepted: List[Tuple[Action, List[ArrowGeometry]]] = []
    kept_centers: List[Tuple[float, float]] = []
    rejected = 0

    pending = sampler(samples)
    for round_index in range(top_up_rounds + 1):
        for action in pending:
            label = len(accepted) + 1
            try:
                geometries = action_to_geometry(spec, camera, action, label, image_size)
            except NonPositiveDepth:
                rejected += 1
                continue
            centers = [g.end_px for g in geometries]
            if not accepts(centers, kept_centers, style.min_spacing_px):
                rejected += 1
                continue
            accepted.append((action, geometries))
            kept_centers.extend(centers)
            if len(accepted) == samples:
                break
        missing = samples - len(accepted)
        if missing <= 0 or round_index == top_up_rounds:
            break
        pending = sampler(missing)

    if not accepted:
        raise EmptyCandidateSet(f"All {rejected} sampled candidates were rejected")

    labels = {i + 1: action for i, (action, _) in enumerate(accepted)}
    drawn = [g for _, geometries in accepted for g in geometries]
    if rejected:
        logger.debug("Candidates rejected", rejected=rejected, accepted=len(accepted))
    return render(image, drawn, depth_range, style, labels=labels)
