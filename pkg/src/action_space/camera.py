"""
Pinhole camera model.

Intrinsics (fx, fy, cx, cy) plus a rigid 4x4 extrinsic that maps points from
the action frame into the camera frame. No lens distortion.
"""

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Sequence, Tuple

import numpy as np
import structlog

from src.errors import ConfigurationError, NonPositiveDepth

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

logger = structlog.get_logger(__name__)

IDENTITY_EXTRINSIC: Tuple[float, ...] = tuple(np.eye(4).flatten().tolist())


@dataclass(frozen=True)
class CameraModel:
    """Intrinsics and extrinsic of a pinhole camera."""

    fx: float
    fy: float
    cx: float
    cy: float
    image_w: int
    image_h: int
    extrinsic: Tuple[float, ...] = IDENTITY_EXTRINSIC

    def __post_init__(self) -> None:
        extrinsic = np.asarray(self.extrinsic, dtype=float).flatten()
        if extrinsic.size != 16:
            raise ConfigurationError(
                f"extrinsic needs 16 values (4x4 row-major), got {extrinsic.size}",
                field="camera.extrinsic",
            )
        object.__setattr__(self, "extrinsic", tuple(extrinsic.tolist()))
        if self.fx <= 0 or self.fy <= 0:
            raise ConfigurationError("fx and fy must be positive", field="camera.fx")
        if not (0 <= self.cx < self.image_w) or not (0 <= self.cy < self.image_h):
            raise ConfigurationError(
                "principal point must lie inside the image", field="camera.cx"
            )

    @property
    def matrix(self) -> np.ndarray:
        """3x3 intrinsic matrix K."""
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    @property
    def transform(self) -> np.ndarray:
        return np.asarray(self.extrinsic, dtype=float).reshape(4, 4)

    @property
    def rotation(self) -> np.ndarray:
        return self.transform[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        return self.transform[:3, 3]

    @property
    def image_size(self) -> Tuple[int, int]:
        return (self.image_w, self.image_h)

    def to_camera_frame(self, point: Sequence[float]) -> np.ndarray:
        """Apply the extrinsic to a 3D action-frame point."""
        return self.rotation @ np.asarray(point, dtype=float) + self.translation

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CameraModel":
        """Build a camera from a config table with fx, fy, cx, cy, image_w, image_h, extrinsic."""
        for required in ("fx", "fy", "cx", "cy", "image_w", "image_h"):
            if required not in data:
                raise ConfigurationError(
                    f"Missing required field camera.{required}", field=f"camera.{required}"
                )
        return cls(
            fx=float(data["fx"]),
            fy=float(data["fy"]),
            cx=float(data["cx"]),
            cy=float(data["cy"]),
            image_w=int(data["image_w"]),
            image_h=int(data["image_h"]),
            extrinsic=tuple(np.asarray(data.get("extrinsic", IDENTITY_EXTRINSIC)).flatten()),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fx": self.fx,
            "fy": self.fy,
            "cx": self.cx,
            "cy": self.cy,
            "image_w": self.image_w,
            "image_h": self.image_h,
            "extrinsic": [list(row) for row in self.transform.tolist()],
        }


def load_camera(path: str) -> CameraModel:
    """
    Load a camera model from a TOML file.

    The file may hold the fields at top level or under a [camera] table.

    Args:
        path: Path to the TOML file

    Returns:
        CameraModel instance
    """
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigurationError(f"Camera config not found: {path}", field="camera")
    with open(config_path, "rb") as f:
        data = tomllib.load(f)
    table = data.get("camera", data)
    logger.debug("Loaded camera config", path=str(config_path))
    return CameraModel.from_dict(table)


def project(camera: CameraModel, point: Sequence[float]) -> Tuple[float, float]:
    """
    Project a 3D action-frame point into pixel coordinates.

    Args:
        camera: The camera model
        point: 3D point in the action frame

    Returns:
        (u, v) pixel coordinates

    Raises:
        NonPositiveDepth: If the camera-frame depth is not positive
    """
    x, y, z = camera.to_camera_frame(point)
    if z <= 0.0:
        raise NonPositiveDepth(float(z))
    return (camera.fx * x / z + camera.cx, camera.fy * y / z + camera.cy)


def unproject(camera: CameraModel, pixel: Sequence[float], depth: float) -> np.ndarray:
    """
    Lift a pixel at a known camera-frame depth back into the action frame.

    Args:
        camera: The camera model
        pixel: (u, v) pixel coordinates
        depth: Camera-frame z of the point

    Returns:
        3D point in the action frame
    """
    if depth <= 0.0:
        raise NonPositiveDepth(float(depth))
    u, v = float(pixel[0]), float(pixel[1])
    cam_point = np.array(
        [(u - camera.cx) * depth / camera.fx, (v - camera.cy) * depth / camera.fy, depth]
    )
    return camera.rotation.T @ (cam_point - camera.translation)
