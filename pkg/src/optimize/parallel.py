"""
Parallel PIVOT instances and their aggregation.

E instances run with seeds derived from the caller's RNG and their best
actions are joined either by refitting a distribution to them (its mean is
the answer) or by one arbitration query that shows all candidates and asks
the oracle for the single best one. Results are indexed by instance, so the
join does not depend on completion order.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import anyio
import numpy as np
import structlog

from src.action_space.geometry import action_to_geometry
from src.action_space.spaces import Action
from src.annotate.renderer import render
from src.errors import (
    ActionSpaceError,
    ParallelPivotError,
    PivotError,
    SelectionParseError,
)
from src.models.config import PivotConfig
from src.observability.tracing import traced
from src.optimize.distribution import fit, init_distribution
from src.optimize.engine import (
    IterationRecord,
    PivotProblem,
    PivotTrace,
    ask_oracle,
    pivot_run,
)
from src.oracle.base import SelectionOracle
from src.oracle.text_baseline import BaselineRequest, TextBaselineOracle

logger = structlog.get_logger(__name__)


@dataclass
class PivotResult:
    """
    Outcome of a (possibly parallel) optimization.

    Attributes:
        best: The returned action
        candidates: Best action per instance, None where the instance failed
        traces: Trace per instance, None where the instance failed
        errors: Error per instance, None where the instance succeeded
        arbitration: Record of the arbitration query, if one was made
        baseline_text: Answer of a text-only baseline oracle, if used
    """

    best: Action
    candidates: List[Optional[Action]] = field(default_factory=list)
    traces: List[Optional[PivotTrace]] = field(default_factory=list)
    errors: List[Optional[BaseException]] = field(default_factory=list)
    arbitration: Optional[IterationRecord] = None
    baseline_text: Optional[str] = None

    def export(self, run_dir: Union[str, Path], images: bool = True) -> None:
        """Write each instance trace to instance_XX/ under run_dir."""
        run_dir = Path(run_dir)
        for index, trace in enumerate(self.traces):
            if trace is not None:
                trace.export(run_dir / f"instance_{index + 1:02d}", images=images)
        if self.arbitration is not None:
            PivotTrace([self.arbitration]).export(run_dir / "arbitration", images=images)


def derive_seeds(rng: np.random.Generator, count: int) -> List[np.random.SeedSequence]:
    """Independent child seeds for count instances."""
    root = np.random.SeedSequence(int(rng.integers(2**63)))
    return root.spawn(count)


def refit_candidates(problem: PivotProblem, candidates: List[Action], config: PivotConfig) -> Action:
    """Mean of a distribution fitted to the instance candidates."""
    fitted = fit(candidates, init_distribution(problem.spec), config)
    return fitted.mean_action()


async def arbitrate(
    problem: PivotProblem,
    candidates: List[Action],
    oracle: SelectionOracle,
    config: PivotConfig,
) -> IterationRecord:
    """
    Show the candidates as a fresh annotated image and ask for the single best.

    Labels are 1..len(candidates) in instance order. The query reuses the task
    prompt with K = 1.

    Raises:
        SelectionParseError: When the answer has no usable label
    """
    geometries = []
    labels = {}
    for index, action in enumerate(candidates, start=1):
        try:
            geometries.extend(
                action_to_geometry(
                    problem.spec, problem.camera, action, index, problem.image_size
                )
            )
        except ActionSpaceError as e:
            logger.warning("Candidate cannot be drawn for arbitration", label=index, error=str(e))
            continue
        labels[index] = action
    annotated = render(problem.image, geometries, problem.depth_range, problem.style, labels)
    response = await ask_oracle(oracle, problem.query(annotated, 1), config.oracle_retries)
    selected = tuple(label for label in response.ranked_labels if label in labels)[:1]
    if not selected:
        raise SelectionParseError("Arbitration answer names no candidate", response.raw_text)
    dist = init_distribution(problem.spec)
    return IterationRecord(0, dist, dist, annotated, response.raw_text, selected)


@traced("parallel_pivot", {"component": "optimize"})
async def parallel_pivot(
    problem: PivotProblem,
    oracle: SelectionOracle,
    config: PivotConfig,
    rng: np.random.Generator,
) -> PivotResult:
    """
    Run config.parallel independent instances and aggregate them.

    With one instance this is pivot_run on the caller's RNG and oracle.
    Instances run concurrently when the oracle declares itself concurrent,
    otherwise one after another in index order.

    Raises:
        ParallelPivotError: If every instance failed
    """
    count = config.parallel
    if count == 1:
        best, trace = await pivot_run(problem, oracle, config, rng)
        return PivotResult(best=best, candidates=[best], traces=[trace], errors=[None])

    seeds = derive_seeds(rng, count)
    candidates: List[Optional[Action]] = [None] * count
    traces: List[Optional[PivotTrace]] = [None] * count
    errors: List[Optional[BaseException]] = [None] * count

    async def run_instance(index: int) -> None:
        seed = seeds[index]
        instance_oracle = oracle.fork(int(seed.generate_state(1)[0]))
        try:
            best, trace = await pivot_run(
                problem, instance_oracle, config, np.random.default_rng(seed)
            )
        except PivotError as e:
            logger.warning("Parallel instance failed", instance=index, error=str(e))
            errors[index] = e
            return
        trace.instance = index
        candidates[index] = best
        traces[index] = trace

    if oracle.concurrent:
        async with anyio.create_task_group() as tg:
            for index in range(count):
                tg.start_soon(run_instance, index)
    else:
        for index in range(count):
            await run_instance(index)

    succeeded = [c for c in candidates if c is not None]
    if not succeeded:
        raise ParallelPivotError([e for e in errors if e is not None])

    result = PivotResult(
        best=succeeded[0], candidates=candidates, traces=traces, errors=errors
    )
    if config.aggregation == "arbitrate" and len(succeeded) > 1:
        try:
            record = await arbitrate(problem, succeeded, oracle, config)
        except SelectionParseError as e:
            logger.warning("Arbitration failed, refitting instead", error=str(e))
        else:
            result.arbitration = record
            result.best = record.annotated.labels[record.selected[0]]
            return result

    result.best = refit_candidates(problem, succeeded, config)
    logger.info(
        "Parallel instances joined",
        instances=count,
        succeeded=len(succeeded),
        aggregation=config.aggregation,
    )
    return result


async def solve(
    problem: PivotProblem,
    oracle: SelectionOracle,
    config: PivotConfig,
    rng: np.random.Generator,
) -> PivotResult:
    """Optimize with PIVOT, or ask a text-only baseline oracle directly."""
    if isinstance(oracle, TextBaselineOracle):
        request = BaselineRequest(
            image=problem.image,
            instruction=problem.instruction,
            spec=problem.spec,
            camera=problem.camera,
            truth=problem.truth,
        )
        action, text = await oracle.choose(request)
        return PivotResult(best=action, candidates=[action], baseline_text=text)
    return await parallel_pivot(problem, oracle, config, rng)
