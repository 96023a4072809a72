"""
Desk-scale closed-loop simulator for PIVOT decisions.
"""

from src.sim.rollout import EpisodeBatch, EpisodeResult, episode_seeds, rollout, run_episodes
from src.sim.view import SceneView, world_to_view
from src.sim.world import (
    CONTACT_EPSILON,
    Obstacle,
    WorldState,
    action_space_for,
    build_world,
    canonical_camera,
    step,
    target_action,
)

__all__ = [
    "CONTACT_EPSILON",
    "EpisodeBatch",
    "EpisodeResult",
    "Obstacle",
    "SceneView",
    "WorldState",
    "action_space_for",
    "build_world",
    "canonical_camera",
    "episode_seeds",
    "rollout",
    "run_episodes",
    "step",
    "target_action",
]
