"""
Closed-loop episodes: render, optimize, step, repeat.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import anyio
import numpy as np
import structlog

from src.action_space.camera import CameraModel
from src.annotate.io import write_image
from src.models.config import AnnotationStyle, PivotConfig, PromptConfig, WorldConfig
from src.observability.metrics import get_metrics
from src.observability.tracing import trace_rollout
from src.optimize.engine import PivotProblem
from src.optimize.parallel import PivotResult, solve
from src.oracle.base import SelectionOracle
from src.sim.view import world_to_view
from src.sim.world import (
    WorldState,
    action_space_for,
    build_world,
    canonical_camera,
    step,
    target_action,
)

logger = structlog.get_logger(__name__)

# (episode, seed) -> oracle
EpisodeOracleFactory = Callable[[int, int], SelectionOracle]


@dataclass
class EpisodeResult:
    """
    Attributes:
        success: Episode ended within the success radius
        steps: Steps executed
        reached: The agent entered the success radius at some point
        trajectory: Agent position before the first and after every step
        frames: Annotated image of each step (empty when frames are not kept)
    """

    success: bool
    steps: int
    reached: bool
    trajectory: List[Tuple[float, ...]] = field(default_factory=list)
    frames: List[np.ndarray] = field(default_factory=list)
    target: Tuple[float, ...] = ()

    def export(self, out_dir: Union[str, Path], images: bool = True) -> Path:
        """Write trajectory.jsonl and one step_XX.png per step."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / "trajectory.jsonl"
        target = np.asarray(self.target)
        with open(path, "w", encoding="utf-8") as f:
            for index, position in enumerate(self.trajectory):
                line = {"step": index, "position": list(position)}
                if self.target:
                    line["distance"] = float(np.linalg.norm(np.asarray(position) - target))
                f.write(json.dumps(line) + "\n")
        if images:
            for index, frame in enumerate(self.frames, start=1):
                write_image(out_dir / f"step_{index:02d}.png", frame)
        return path


@dataclass
class EpisodeBatch:
    results: List[EpisodeResult]

    @property
    def success_rate(self) -> float:
        if not self.results:
            return 0.0
        return sum(r.success for r in self.results) / len(self.results)

    @property
    def median_steps(self) -> float:
        if not self.results:
            return 0.0
        return float(np.median([r.steps for r in self.results]))


def _frame(result: PivotResult, fallback: np.ndarray) -> np.ndarray:
    if result.arbitration is not None:
        return result.arbitration.annotated.pixels
    for trace in result.traces:
        if trace is not None and trace.records:
            return trace.records[-1].annotated.pixels
    return fallback


async def rollout(
    world: WorldState,
    oracle: SelectionOracle,
    config: PivotConfig,
    rng: np.random.Generator,
    camera: CameraModel,
    instruction: str,
    style: Optional[AnnotationStyle] = None,
    prompt: Optional[PromptConfig] = None,
    exemplars: Sequence[str] = (),
    keep_frames: bool = True,
    episode: int = 0,
) -> EpisodeResult:
    """
    Run one episode until the target is reached or the budget is spent.

    Raises:
        TargetOutOfView: If the target leaves the camera view
        OracleError: Propagated from the optimizer
    """
    style = style or AnnotationStyle()
    prompt = prompt or PromptConfig()
    trajectory = [world.agent_pos]
    frames: List[np.ndarray] = []
    reached = world.reached

    with trace_rollout(episode, world.budget) as span:
        while not world.reached and not world.exhausted:
            view = world_to_view(world, camera)
            spec = action_space_for(world)
            problem = PivotProblem(
                image=view.image,
                instruction=instruction,
                spec=spec,
                camera=camera,
                style=style,
                prompt=prompt,
                exemplars=tuple(exemplars),
                truth=target_action(world, spec),
            )
            result = await solve(problem, oracle, config, rng)
            world = step(world, result.best)
            trajectory.append(world.agent_pos)
            if keep_frames:
                frames.append(_frame(result, view.image))
            reached = reached or world.reached
            logger.debug(
                "Episode step",
                episode=episode,
                step=world.steps_taken,
                distance=round(world.distance_to_target, 4),
            )
        span.set_attribute("sim.success", bool(world.reached))
        span.set_attribute("sim.steps", world.steps_taken)

    get_metrics().record_episode(world.reached, world.steps_taken)
    return EpisodeResult(
        success=world.reached,
        steps=world.steps_taken,
        reached=reached,
        trajectory=trajectory,
        frames=frames,
        target=world.target_pos,
    )


def episode_seeds(
    seed: int, episode: int
) -> Tuple[np.random.SeedSequence, np.random.SeedSequence]:
    """(jitter, optimizer) seeds of one episode."""
    jitter, optimizer = np.random.SeedSequence([seed, episode]).spawn(2)
    return jitter, optimizer


async def run_episodes(
    world_config: WorldConfig,
    oracle_factory: EpisodeOracleFactory,
    config: PivotConfig,
    episodes: int,
    seed: int = 0,
    style: Optional[AnnotationStyle] = None,
    prompt: Optional[PromptConfig] = None,
    exemplars: Sequence[str] = (),
    jobs: int = 4,
    keep_frames: bool = True,
) -> EpisodeBatch:
    """
    Run a seeded batch of episodes.

    Episode i jitters its start and target with its own seed; results are
    kept in episode order however the episodes are scheduled.
    """
    camera = canonical_camera(world_config)
    results: List[Optional[EpisodeResult]] = [None] * episodes
    limiter = anyio.CapacityLimiter(jobs)
    runs = []
    for episode in range(episodes):
        jitter_seed, optimizer_seed = episode_seeds(seed, episode)
        world = build_world(world_config, np.random.default_rng(jitter_seed))
        oracle = oracle_factory(episode, int(optimizer_seed.generate_state(1)[0]))
        runs.append((episode, world, oracle, np.random.default_rng(optimizer_seed)))

    async def run_one(episode, world, oracle, rng) -> None:
        async with limiter:
            results[episode] = await rollout(
                world,
                oracle,
                config,
                rng,
                camera,
                world_config.instruction,
                style=style,
                prompt=prompt,
                exemplars=exemplars,
                keep_frames=keep_frames,
                episode=episode,
            )

    if all(oracle.concurrent for _, _, oracle, _ in runs):
        async with anyio.create_task_group() as tg:
            for run in runs:
                tg.start_soon(run_one, *run)
    else:
        for run in runs:
            await run_one(*run)

    batch = EpisodeBatch([r for r in results if r is not None])
    logger.info(
        "Episodes complete",
        episodes=episodes,
        success_rate=batch.success_rate,
        median_steps=batch.median_steps,
    )
    return batch
