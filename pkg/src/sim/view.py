"""
Schematic rendering of a world as seen by the simulator camera.

Obstacles are gray discs, the target a red disc of the success radius and
the agent a small blue disc, painted far to near.
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import cv2
import numpy as np

from src.action_space.camera import CameraModel, project, unproject
from src.annotate.io import blank_image
from src.errors import NonPositiveDepth, TargetOutOfView
from src.sim.world import WorldState

BACKGROUND = (235, 235, 235)
GRID = (215, 215, 215)
OBSTACLE = (110, 110, 110)
TARGET = (220, 40, 40)
AGENT = (40, 70, 200)
AGENT_RADIUS_M = 0.15
GRID_SPACING_M = 1.0


@dataclass(frozen=True)
class SceneView:
    """A rendered view plus the mapping between its pixels and the world."""

    image: np.ndarray
    origin_px: Tuple[float, float]
    camera: CameraModel
    dims: int

    def to_pixel(self, point: Sequence[float]) -> Tuple[float, float]:
        values = np.zeros(3)
        values[: len(point)] = point
        return project(self.camera, values)

    def to_world(self, pixel: Sequence[float], z: float = 0.0) -> np.ndarray:
        """World point at height z seen at pixel."""
        depth = float(self.camera.translation[2]) - z
        point = unproject(self.camera, pixel, depth)
        return point[: self.dims]


def _depth(camera: CameraModel, point: np.ndarray) -> float:
    return float(camera.to_camera_frame(point)[2])


def _disc(
    canvas: np.ndarray, camera: CameraModel, center: np.ndarray, radius_m: float, color
) -> None:
    u, v = project(camera, center)
    radius_px = max(1, int(round(camera.fx * radius_m / _depth(camera, center))))
    cv2.circle(canvas, (int(round(u)), int(round(v))), radius_px, color, -1, cv2.LINE_AA)


def _grid(canvas: np.ndarray, camera: CameraModel) -> None:
    height, width = canvas.shape[:2]
    depth = float(camera.translation[2])
    step_px = camera.fx * GRID_SPACING_M / depth
    if step_px < 8:
        return
    for offset in np.arange(camera.cx % step_px, width, step_px):
        cv2.line(canvas, (int(round(offset)), 0), (int(round(offset)), height - 1), GRID, 1)
    for offset in np.arange(camera.cy % step_px, height, step_px):
        cv2.line(canvas, (0, int(round(offset))), (width - 1, int(round(offset))), GRID, 1)


def world_to_view(world: WorldState, camera: CameraModel) -> SceneView:
    """
    Render the world from the camera.

    Returns:
        SceneView with the raster, the agent pixel (arrow origin) and the
        pixel/world mapping

    Raises:
        TargetOutOfView: If the target is behind the camera or off the image
    """
    target = world.to_3d(world.target_pos)
    try:
        u, v = project(camera, target)
    except NonPositiveDepth as e:
        raise TargetOutOfView("Target is behind the camera") from e
    if not (0.0 <= u < camera.image_w and 0.0 <= v < camera.image_h):
        raise TargetOutOfView(f"Target projects to ({u:.1f}, {v:.1f}), outside the image")

    canvas = blank_image(camera.image_w, camera.image_h, BACKGROUND)
    _grid(canvas, camera)

    items: List[Tuple[float, int, np.ndarray, float, Tuple[int, int, int]]] = []
    for index, obstacle in enumerate(world.obstacles):
        center = world.to_3d(obstacle.center)
        items.append((_depth(camera, center), index, center, obstacle.radius, OBSTACLE))
    items.append((_depth(camera, target), len(items), target, world.success_radius, TARGET))
    # Far to near; equal depths keep obstacles under the target
    for _, _, center, radius, color in sorted(items, key=lambda item: (-item[0], item[1])):
        if _depth(camera, center) > 0.0:
            _disc(canvas, camera, center, radius, color)

    agent = world.to_3d(world.agent_pos)
    _disc(canvas, camera, agent, AGENT_RADIUS_M, AGENT)
    return SceneView(
        image=canvas, origin_px=project(camera, agent), camera=camera, dims=world.dims
    )
