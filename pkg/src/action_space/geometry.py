"""
Mapping from actions to image-space arrow geometry.

nav2d and keypoint2d actions are pixel targets; cart3d actions are
displacements of the end effector, projected through the camera; pickplace
actions are a (pick, place) pixel pair drawn as two markers sharing a label.
"""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.action_space.camera import CameraModel, project
from src.action_space.spaces import Action, ActionKind, ActionSpaceSpec, OriginMode
from src.errors import DimensionMismatch, MissingCamera

Pixel = Tuple[float, float]


@dataclass(frozen=True)
class ArrowGeometry:
    """
    One drawable candidate marker.

    Attributes:
        start_px: Arrow origin in pixels
        end_px: Arrow tip in pixels; the numbered label is centered here
        depth: Camera-forward displacement for cart3d (meters), else 0
        label_id: Positive label shown to the oracle
        clipped: True when the tip was pulled back to the image border
    """

    start_px: Pixel
    end_px: Pixel
    depth: float
    label_id: int
    clipped: bool = False

    @property
    def is_marker(self) -> bool:
        """A zero-length geometry is drawn as a label circle only."""
        return self.start_px == self.end_px


def origin_pixel(
    spec: ActionSpaceSpec, camera: Optional[CameraModel], image_size: Tuple[int, int]
) -> Optional[Pixel]:
    """Pixel where arrows start; None when candidates are drawn as markers only."""
    width, height = image_size
    if spec.kind is ActionKind.CART3D:
        assert camera is not None
        return project(camera, spec.ee_position)
    if spec.origin_mode is OriginMode.IMAGE_BOTTOM_CENTER:
        return (width / 2.0, float(height - 1))
    if spec.origin_mode is OriginMode.IMAGE_CENTER:
        return (width / 2.0, height / 2.0)
    if spec.origin_mode is OriginMode.END_EFFECTOR_PIXEL:
        assert spec.origin_px is not None
        return (spec.origin_px[0], spec.origin_px[1])
    return None


def _inside(point: np.ndarray, width: int, height: int) -> bool:
    return 0.0 <= point[0] <= width - 1 and 0.0 <= point[1] <= height - 1


def clip_segment(
    start: Pixel, end: Pixel, image_size: Tuple[int, int]
) -> Tuple[Pixel, Pixel, bool]:
    """
    Pull an arrow back inside the image along its own direction.

    The start is clamped to the frame; the end is moved toward the start until
    it touches the border.

    Returns:
        (start, end, clipped)
    """
    width, height = image_size
    lo = np.zeros(2)
    hi = np.array([width - 1, height - 1], dtype=float)
    s = np.asarray(start, dtype=float)
    e = np.asarray(end, dtype=float)
    clipped = False
    if not _inside(s, width, height):
        s = np.clip(s, lo, hi)
        clipped = True
    if not _inside(e, width, height):
        direction = e - s
        t_max = 1.0
        for axis in range(2):
            if direction[axis] > 0:
                t_max = min(t_max, (hi[axis] - s[axis]) / direction[axis])
            elif direction[axis] < 0:
                t_max = min(t_max, (lo[axis] - s[axis]) / direction[axis])
        e = np.clip(s + max(t_max, 0.0) * direction, lo, hi)
        clipped = True
    return (float(s[0]), float(s[1])), (float(e[0]), float(e[1])), clipped


def camera_forward(camera: CameraModel, displacement: Sequence[float]) -> float:
    """Camera-frame forward (z) component of an action-frame displacement."""
    return float((camera.rotation @ np.asarray(displacement, dtype=float))[2])


def depth_range(spec: ActionSpaceSpec, camera: Optional[CameraModel]) -> Tuple[float, float]:
    """
    Exact range of camera-forward displacement over the bounds box.

    Returns (0, 0) for spaces without a depth component.
    """
    if spec.kind is not ActionKind.CART3D or camera is None:
        return (0.0, 0.0)
    row = camera.rotation[2]
    lower = spec.lower_array.copy()
    upper = spec.upper_array.copy()
    frozen = spec.frozen_mask
    lower[frozen] = spec.frozen_value()[frozen]
    upper[frozen] = spec.frozen_value()[frozen]
    z_min = float(np.sum(np.minimum(row * lower, row * upper)))
    z_max = float(np.sum(np.maximum(row * lower, row * upper)))
    return (z_min, z_max)


def action_to_geometry(
    spec: ActionSpaceSpec,
    camera: Optional[CameraModel],
    action: Action,
    label_id: int,
    image_size: Optional[Tuple[int, int]] = None,
) -> List[ArrowGeometry]:
    """
    Map an action to the geometry drawn for it.

    Args:
        spec: Action space of the action
        camera: Camera model, required for cart3d
        action: The candidate action
        label_id: Label shown next to the candidate
        image_size: (width, height); defaults to the camera's image size

    Returns:
        One geometry for nav2d/cart3d/keypoint2d; one or two markers for
        pickplace (pick and place halves that are not frozen)

    Raises:
        MissingCamera: cart3d without a camera
        NonPositiveDepth: cart3d target behind the camera
        DimensionMismatch: action length differs from the space
    """
    if action.dims != spec.dims:
        raise DimensionMismatch(spec.dims, action.dims)
    if spec.kind is ActionKind.CART3D and camera is None:
        raise MissingCamera("cart3d action spaces need a camera model")
    if image_size is None:
        if camera is None:
            raise ValueError("image_size is required when no camera is given")
        image_size = camera.image_size

    components = action.as_array()

    if spec.kind is ActionKind.PICKPLACE:
        frozen = spec.frozen_mask
        halves = [(0, 1), (2, 3)]
        markers = [h for h in halves if not (frozen[h[0]] and frozen[h[1]])] or halves
        geometries = []
        for i, j in markers:
            point = (float(components[i]), float(components[j]))
            start, end, clipped = clip_segment(point, point, image_size)
            geometries.append(ArrowGeometry(start, end, 0.0, label_id, clipped))
        return geometries

    depth = 0.0
    if spec.kind is ActionKind.CART3D:
        assert camera is not None
        target = project(camera, np.asarray(spec.ee_position) + components)
        depth = camera_forward(camera, components)
    else:
        target = (float(components[0]), float(components[1]))

    origin = origin_pixel(spec, camera, image_size)
    start = target if origin is None else origin
    start, end, clipped = clip_segment(start, target, image_size)
    return [ArrowGeometry(start, end, depth, label_id, clipped)]


def pixel_of(
    spec: ActionSpaceSpec,
    camera: Optional[CameraModel],
    action: Action,
) -> Pixel:
    """
    Image-space point an action refers to, unclipped.

    cart3d projects the displaced end effector; pickplace returns the place
    point unless the place half is frozen.
    """
    components = action.as_array()
    if spec.kind is ActionKind.CART3D:
        if camera is None:
            raise MissingCamera("cart3d action spaces need a camera model")
        return project(camera, np.asarray(spec.ee_position) + components)
    if spec.kind is ActionKind.PICKPLACE:
        frozen = spec.frozen_mask
        if frozen[2] and frozen[3]:
            return (float(components[0]), float(components[1]))
        return (float(components[2]), float(components[3]))
    return (float(components[0]), float(components[1]))
