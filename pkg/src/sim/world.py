"""
Simulator world state and motion.

Worlds are 2D (navigation on the ground plane) or 3D (reaching). The agent
moves along the chosen action direction by at most max_step meters and stops
just short of the first obstacle surface it would touch.
"""

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
import structlog

from src.action_space.camera import CameraModel
from src.action_space.spaces import Action, ActionKind, ActionSpaceSpec, HeightMode
from src.errors import BudgetExhausted, WorldConfigError
from src.models.config import WorldConfig

logger = structlog.get_logger(__name__)

CONTACT_EPSILON = 1e-6

Point = Tuple[float, ...]


def _point(values: Sequence[float]) -> Point:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class Obstacle:
    """A circle (2D) or sphere (3D)."""

    center: Point
    radius: float

    def contains(self, point: Sequence[float]) -> bool:
        offset = np.asarray(point, dtype=float) - np.asarray(self.center)
        return float(np.linalg.norm(offset)) < self.radius


@dataclass(frozen=True)
class WorldState:
    """
    Attributes:
        agent_pos: Agent position (meters)
        target_pos: Target position, same space
        obstacles: Circles or spheres the agent cannot enter
        max_step: Largest executed displacement per step
        success_radius: Distance to the target that counts as reached
        steps_taken: Steps executed so far
        budget: Maximum number of steps
        action_extent: Per-axis action bound (meters)
    """

    agent_pos: Point
    target_pos: Point
    obstacles: Tuple[Obstacle, ...] = ()
    max_step: float = 1.0
    success_radius: float = 0.5
    steps_taken: int = 0
    budget: int = 10
    action_extent: float = 2.0

    @property
    def dims(self) -> int:
        return len(self.agent_pos)

    @property
    def distance_to_target(self) -> float:
        offset = np.asarray(self.target_pos) - np.asarray(self.agent_pos)
        return float(np.linalg.norm(offset))

    @property
    def reached(self) -> bool:
        return self.distance_to_target <= self.success_radius

    @property
    def exhausted(self) -> bool:
        return self.steps_taken >= self.budget

    def to_3d(self, point: Sequence[float]) -> np.ndarray:
        """Lift a world point onto z = 0 when the world is 2D."""
        values = np.zeros(3)
        values[: len(point)] = point
        return values


def build_world(config: WorldConfig, jitter_rng: Optional[np.random.Generator] = None) -> WorldState:
    """
    World from its config, optionally jittering agent and target.

    Raises:
        WorldConfigError: If the agent or target starts inside an obstacle
    """
    agent = np.asarray(config.agent, dtype=float)
    target = np.asarray(config.target, dtype=float)
    if jitter_rng is not None and config.jitter > 0:
        agent = agent + jitter_rng.uniform(-config.jitter, config.jitter, size=agent.size)
        target = target + jitter_rng.uniform(-config.jitter, config.jitter, size=target.size)
    obstacles = tuple(Obstacle(_point(o.center), float(o.radius)) for o in config.obstacles)
    for obstacle in obstacles:
        if obstacle.contains(agent):
            raise WorldConfigError("Agent starts inside an obstacle", field="world.agent")
        if obstacle.contains(target):
            raise WorldConfigError("Target lies inside an obstacle", field="world.target")
    return WorldState(
        agent_pos=_point(agent),
        target_pos=_point(target),
        obstacles=obstacles,
        max_step=config.max_step,
        success_radius=config.success_radius,
        budget=config.budget,
        action_extent=config.action_extent or 2.0 * config.max_step,
    )


def canonical_camera(config: WorldConfig) -> CameraModel:
    """
    Top-down pinhole camera above the world origin.

    World +x maps to image right and world +y to image up; camera depth is
    camera_height - z.
    """
    extrinsic = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, config.camera_height],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    return CameraModel(
        fx=config.focal_px,
        fy=config.focal_px,
        cx=config.image_w / 2.0,
        cy=config.image_h / 2.0,
        image_w=config.image_w,
        image_h=config.image_h,
        extrinsic=tuple(extrinsic.flatten()),
    )


def action_space_for(world: WorldState) -> ActionSpaceSpec:
    """
    cart3d displacement space centered on the agent.

    2D worlds hold the vertical component fixed at zero.
    """
    extent = world.action_extent
    return ActionSpaceSpec(
        kind=ActionKind.CART3D,
        lower=(-extent, -extent, -extent),
        upper=(extent, extent, extent),
        ee_position=tuple(world.to_3d(world.agent_pos)),
        height_mode=HeightMode.FIXED if world.dims == 2 else HeightMode.COLOR,
        name="sim",
    )


def target_action(world: WorldState, spec: ActionSpaceSpec) -> Action:
    """Displacement from the agent to the target."""
    offset = world.to_3d(world.target_pos) - world.to_3d(world.agent_pos)
    return spec.action(offset)


def _first_contact(
    position: np.ndarray, direction: np.ndarray, obstacle: Obstacle
) -> Optional[float]:
    offset = position - np.asarray(obstacle.center)
    b = float(direction @ offset)
    c = float(offset @ offset) - obstacle.radius**2
    if c <= 0.0:
        # Touching or inside: only motion away from the center is free
        return 0.0 if b < 0.0 else None
    disc = b * b - c
    if disc < 0.0:
        return None
    t = -b - float(np.sqrt(disc))
    return t if t >= 0.0 else None


def step(world: WorldState, action: Action) -> WorldState:
    """
    Execute one action.

    The agent moves along the action direction by min(|action|, max_step)
    and stops CONTACT_EPSILON short of the first obstacle surface.

    Raises:
        BudgetExhausted: If no steps remain
    """
    if world.exhausted:
        raise BudgetExhausted(f"Step budget of {world.budget} is used up")
    displacement = action.as_array()[: world.dims]
    norm = float(np.linalg.norm(displacement))
    position = np.asarray(world.agent_pos, dtype=float)
    if norm == 0.0:
        return replace(world, steps_taken=world.steps_taken + 1)

    direction = displacement / norm
    travel = min(norm, world.max_step)
    for obstacle in world.obstacles:
        contact = _first_contact(position, direction, obstacle)
        if contact is not None and contact <= travel:
            travel = max(0.0, contact - CONTACT_EPSILON)
            logger.debug("Motion blocked by obstacle", center=obstacle.center, travel=travel)
    new_position = position + travel * direction
    return replace(world, agent_pos=_point(new_position), steps_taken=world.steps_taken + 1)
