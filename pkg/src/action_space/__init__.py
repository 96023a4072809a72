"""
Action spaces, camera projection and candidate geometry.
"""

from src.action_space.camera import CameraModel, load_camera, project, unproject
from src.action_space.geometry import (
    ArrowGeometry,
    action_to_geometry,
    camera_forward,
    clip_segment,
    depth_range,
    origin_pixel,
    pixel_of,
)
from src.action_space.spaces import (
    Action,
    ActionKind,
    ActionSpaceSpec,
    HeightMode,
    OriginMode,
    clamp,
)

__all__ = [
    "Action",
    "ActionKind",
    "ActionSpaceSpec",
    "ArrowGeometry",
    "CameraModel",
    "HeightMode",
    "OriginMode",
    "action_to_geometry",
    "camera_forward",
    "clamp",
    "clip_segment",
    "depth_range",
    "load_camera",
    "origin_pixel",
    "pixel_of",
    "project",
    "unproject",
]
