"""
Offline evaluation metrics.

- cosine_metric: directional agreement of two actions (camera frame)
- normalized_l2: pixel distance divided by image width
- bbox_metrics: hit test and normalized center distance for a box target
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src.action_space.camera import CameraModel
from src.action_space.geometry import origin_pixel
from src.action_space.spaces import Action, ActionKind, ActionSpaceSpec
from src.errors import ZeroVector

Vector = Union[Action, Sequence[float], np.ndarray]
BBox = Tuple[float, float, float, float]


def _as_array(value: Vector) -> np.ndarray:
    if isinstance(value, Action):
        return value.as_array()
    return np.asarray(value, dtype=float)


def cosine_metric(pred: Vector, ref: Vector) -> float:
    """
    Cosine similarity of two vectors, in [-1, 1].

    Raises:
        ZeroVector: If either vector has zero length
    """
    a, b = _as_array(pred), _as_array(ref)
    norm = float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    if norm == 0.0:
        raise ZeroVector("Cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(a, b) / norm, -1.0, 1.0))


def normalized_l2(pred_px: Sequence[float], truth_px: Sequence[float], image_w: float) -> float:
    """Euclidean pixel distance divided by the image width."""
    if image_w <= 0:
        raise ValueError(f"image_w must be positive, got {image_w}")
    delta = np.asarray(pred_px, dtype=float) - np.asarray(truth_px, dtype=float)
    return float(np.hypot(delta[0], delta[1])) / float(image_w)


def bbox_metrics(pred_px: Sequence[float], bbox: BBox, image_w: float) -> Tuple[bool, float]:
    """
    Hit test against a closed (x, y, w, h) box and distance to its center.

    Returns:
        (pred inside the box, center distance / image_w)
    """
    x, y, w, h = (float(v) for v in bbox)
    if w <= 0 or h <= 0:
        raise ValueError(f"bbox needs positive width and height, got {bbox}")
    u, v = float(pred_px[0]), float(pred_px[1])
    hit = x <= u <= x + w and y <= v <= y + h
    return hit, normalized_l2((u, v), (x + w / 2.0, y + h / 2.0), image_w)


def action_direction(
    spec: ActionSpaceSpec,
    camera: Optional[CameraModel],
    action: Action,
    image_size: Tuple[int, int],
) -> np.ndarray:
    """
    Direction an action points in, for cosine comparisons.

    cart3d displacements are rotated into the camera frame; pixel actions are
    taken relative to the arrow origin when the space draws arrows.
    """
    components = action.as_array()
    if spec.kind is ActionKind.CART3D:
        if camera is None:
            return components
        return camera.rotation @ components
    origin = origin_pixel(spec, camera, image_size)
    if origin is None or spec.kind is ActionKind.PICKPLACE:
        return components
    return components - np.asarray(origin)
