"""
Candidate marker rendering.

Each candidate is drawn as an arrow from its origin to its target with a
numbered circle at the tip. Depth (cart3d forward motion) is encoded on a
linear blue-to-red spectrum and by circle size: markers that move away from
the camera are red and small, markers that move toward it are blue and large.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import cv2
import numpy as np
import structlog

from src.action_space.geometry import ArrowGeometry
from src.action_space.spaces import Action
from src.annotate.io import as_rgb
from src.errors import AnnotationError, EmptyCandidateSet, OutOfRangeDepth
from src.models.config import AnnotationStyle

logger = structlog.get_logger(__name__)

RGB = Tuple[int, int, int]

NEAR_RADIUS_SCALE = 1.4
FAR_RADIUS_SCALE = 0.6
_DEPTH_TOLERANCE = 1e-9
_FONT = cv2.FONT_HERSHEY_SIMPLEX
_FONT_BASE_HEIGHT = 22.0  # pixel height of HERSHEY_SIMPLEX digits at scale 1


@dataclass
class AnnotatedImage:
    """
    An image with numbered candidate markers.

    Attributes:
        pixels: Annotated RGB raster
        labels: label_id -> Action for every drawn label
        geometries: Geometries actually drawn, in label order
    """

    pixels: np.ndarray
    labels: Dict[int, Action] = field(default_factory=dict)
    geometries: List[ArrowGeometry] = field(default_factory=list)

    @property
    def label_ids(self) -> List[int]:
        return sorted({g.label_id for g in self.geometries})

    @property
    def size(self) -> Tuple[int, int]:
        return (self.pixels.shape[1], self.pixels.shape[0])


def _lerp_color(a: Sequence[int], b: Sequence[int], t: float) -> RGB:
    mixed = (1.0 - t) * np.asarray(a, dtype=float) + t * np.asarray(b, dtype=float)
    return tuple(int(round(c)) for c in mixed)  # type: ignore[return-value]


def depth_to_style(
    depth: float, z_min: float, z_max: float, style: AnnotationStyle
) -> Tuple[RGB, float]:
    """
    Color and circle radius for a candidate at the given depth.

    Args:
        depth: Camera-forward displacement of the candidate
        z_min: Most negative depth of the batch (toward the camera)
        z_max: Most positive depth of the batch (away from the camera)
        style: Style supplying the endpoint colors and base radius

    Returns:
        (RGB color, radius in pixels)

    Raises:
        OutOfRangeDepth: If depth lies outside [z_min, z_max]
    """
    if depth < z_min - _DEPTH_TOLERANCE or depth > z_max + _DEPTH_TOLERANCE:
        raise OutOfRangeDepth(depth, z_min, z_max)
    if z_max - z_min <= _DEPTH_TOLERANCE:
        t = 0.5
    else:
        t = float(np.clip((depth - z_min) / (z_max - z_min), 0.0, 1.0))
    color = _lerp_color(style.color_near, style.color_far, t)
    scale = NEAR_RADIUS_SCALE + t * (FAR_RADIUS_SCALE - NEAR_RADIUS_SCALE)
    return color, style.label_radius_px * scale


def _pt(pixel: Tuple[float, float]) -> Tuple[int, int]:
    return (int(round(pixel[0])), int(round(pixel[1])))


def _draw_label(
    canvas: np.ndarray,
    center: Tuple[int, int],
    label: int,
    color: RGB,
    radius: float,
    style: AnnotationStyle,
) -> None:
    r = max(int(round(radius)), 1)
    cv2.circle(canvas, center, r, style.label_fill, thickness=-1, lineType=cv2.LINE_AA)
    cv2.circle(canvas, center, r, color, thickness=2, lineType=cv2.LINE_AA)

    text = str(label)
    scale = style.font_height_px / _FONT_BASE_HEIGHT * (radius / style.label_radius_px)
    thickness = max(1, int(round(scale * 1.5)))
    (text_w, text_h), _ = cv2.getTextSize(text, _FONT, scale, thickness)
    origin = (center[0] - text_w // 2, center[1] + text_h // 2)
    cv2.putText(canvas, text, origin, _FONT, scale, style.label_text, thickness, cv2.LINE_AA)


def render(
    image: np.ndarray,
    geometries: Sequence[ArrowGeometry],
    depth_range: Tuple[float, float],
    style: AnnotationStyle,
    labels: Optional[Mapping[int, Action]] = None,
) -> AnnotatedImage:
    """
    Draw candidate markers onto a copy of an image.

    Arrows are drawn first and label circles on top, so no arrow ever hides a
    number.

    Args:
        image: Base RGB raster (left untouched)
        geometries: Geometries to draw, label ids consecutive from 1
        depth_range: (z_min, z_max) used for depth styling
        style: Drawing parameters
        labels: Optional label_id -> Action map stored on the result

    Returns:
        AnnotatedImage with the drawn geometries

    Raises:
        EmptyCandidateSet: If geometries is empty
        OutOfRangeDepth: If a depth falls outside depth_range
        AnnotationError: If labels does not match the drawn label ids
    """
    if not geometries:
        raise EmptyCandidateSet("Nothing to render")

    z_min, z_max = depth_range
    canvas = as_rgb(image).copy()

    styled = [(g, *depth_to_style(g.depth, z_min, z_max, style)) for g in geometries]

    for geometry, color, _ in styled:
        if geometry.is_marker:
            continue
        start, end = _pt(geometry.start_px), _pt(geometry.end_px)
        length = float(np.hypot(end[0] - start[0], end[1] - start[1]))
        if length < 1.0:
            continue
        cv2.arrowedLine(
            canvas,
            start,
            end,
            color,
            thickness=style.arrow_thickness_px,
            line_type=cv2.LINE_AA,
            tipLength=style.arrowhead_ratio,
        )

    for geometry, color, radius in styled:
        _draw_label(canvas, _pt(geometry.end_px), geometry.label_id, color, radius, style)

    drawn = sorted({g.label_id for g in geometries})
    label_map: Dict[int, Action] = {}
    if labels is not None:
        if sorted(labels) != drawn:
            raise AnnotationError(
                f"Label map keys {sorted(labels)} differ from drawn labels {drawn}"
            )
        label_map = dict(labels)

    logger.debug("Rendered candidates", count=len(drawn), markers=len(geometries))
    return AnnotatedImage(pixels=canvas, labels=label_map, geometries=list(geometries))
