"""
Single-instance PIVOT loop.

One iteration samples candidates from the proposal, draws them onto the
image with numbered labels, asks the oracle for the best labels, and refits
the proposal to the chosen actions. An answer without usable labels makes the
iteration a no-op: the proposal is kept and the record is flagged.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import structlog
from tenacity import (
    AsyncRetrying,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from src.action_space.camera import CameraModel
from src.action_space.geometry import depth_range as space_depth_range
from src.action_space.spaces import Action, ActionSpaceSpec
from src.annotate.candidates import build_candidates
from src.annotate.io import write_image
from src.annotate.renderer import AnnotatedImage
from src.errors import OracleTransportError, SelectionParseError
from src.models.config import AnnotationStyle, PivotConfig, PromptConfig
from src.observability.metrics import get_metrics
from src.observability.tracing import trace_oracle_call, trace_pivot_step, traced
from src.optimize.distribution import ProposalDistribution, fit, init_distribution, sample
from src.oracle.base import SelectionOracle, SelectionQuery, SelectionResponse

logger = structlog.get_logger(__name__)

# Wait between whole-call retries of a failed oracle; the remote client
# already retries individual HTTP requests.
RETRY_WAIT = wait_exponential(multiplier=0.2, min=0, max=2)


@dataclass(frozen=True)
class PivotProblem:
    """
    Everything an optimization needs besides the oracle and the RNG.

    Attributes:
        image: Base RGB raster
        instruction: Task text shown to the oracle
        spec: Action space searched
        camera: Camera model (cart3d only)
        style: Annotation drawing parameters
        prompt: Prompt template settings
        exemplars: Few-shot exemplar texts
        truth: Reference answer for synthetic oracles
    """

    image: np.ndarray
    instruction: str
    spec: ActionSpaceSpec
    camera: Optional[CameraModel] = None
    style: AnnotationStyle = field(default_factory=AnnotationStyle)
    prompt: PromptConfig = field(default_factory=PromptConfig)
    exemplars: Tuple[str, ...] = ()
    truth: Optional[Action] = None

    @property
    def image_size(self) -> Tuple[int, int]:
        return (self.image.shape[1], self.image.shape[0])

    @property
    def depth_range(self) -> Tuple[float, float]:
        return space_depth_range(self.spec, self.camera)

    def query(self, annotated: AnnotatedImage, k: int) -> SelectionQuery:
        """Selection query for an annotated candidate batch."""
        return SelectionQuery(
            annotated=annotated,
            instruction=self.instruction,
            k=k,
            prompt_style=self.prompt.prompt_style,
            ordering=tuple(self.prompt.ordering),
            task_kind=self.prompt.task_kind,
            exemplars=tuple(self.exemplars) or tuple(self.prompt.exemplars),
            spec=self.spec,
            truth=self.truth,
        )


@dataclass
class IterationRecord:
    """What happened in one iteration."""

    iteration: int
    prior: ProposalDistribution
    posterior: ProposalDistribution
    annotated: AnnotatedImage
    raw_text: str = ""
    selected: Tuple[int, ...] = ()
    noop: bool = False

    @property
    def candidates(self) -> Dict[int, Action]:
        return self.annotated.labels

    @property
    def best(self) -> Optional[Action]:
        """Action of the first-ranked selected label."""
        if self.noop or not self.selected:
            return None
        return self.annotated.labels[self.selected[0]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iteration": self.iteration,
            "prior": self.prior.to_dict(),
            "posterior": self.posterior.to_dict(),
            "candidates": {
                str(label): list(action.components)
                for label, action in sorted(self.annotated.labels.items())
            },
            "raw_text": self.raw_text,
            "selected": list(self.selected),
            "noop": self.noop,
        }


@dataclass
class PivotTrace:
    """Ordered iteration records of one PIVOT instance."""

    records: List[IterationRecord] = field(default_factory=list)
    instance: Optional[int] = None

    def __len__(self) -> int:
        return len(self.records)

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    @property
    def sigmas(self) -> List[float]:
        return [r.posterior.sigma for r in self.records]

    def last_selection(self) -> Optional[Action]:
        """Best action of the latest iteration that produced a selection."""
        for record in reversed(self.records):
            if record.best is not None:
                return record.best
        return None

    def export(self, run_dir: Union[str, Path], images: bool = True) -> Path:
        """
        Write trace.jsonl and one iter_XX.png per iteration.

        Returns:
            Path of trace.jsonl
        """
        run_dir = Path(run_dir)
        run_dir.mkdir(parents=True, exist_ok=True)
        path = run_dir / "trace.jsonl"
        with open(path, "w", encoding="utf-8") as f:
            for record in self.records:
                line = record.to_dict()
                if images:
                    name = f"iter_{record.iteration + 1:02d}.png"
                    write_image(run_dir / name, record.annotated.pixels)
                    line["image"] = name
                f.write(json.dumps(line) + "\n")
        return path


async def ask_oracle(
    oracle: SelectionOracle,
    query: SelectionQuery,
    retries: int,
) -> SelectionResponse:
    """
    Query the oracle, retrying transport failures.

    Raises:
        OracleTransportError: When all attempts fail
        SelectionParseError: When the answer has no usable label
    """
    metrics = get_metrics()
    retrying = AsyncRetrying(
        stop=stop_after_attempt(retries + 1),
        wait=RETRY_WAIT,
        retry=retry_if_exception_type(OracleTransportError),
        reraise=True,
    )
    response: Optional[SelectionResponse] = None
    async for attempt in retrying:
        with attempt:
            with trace_oracle_call(oracle.name, query.k, len(query.valid_labels)) as span:
                try:
                    with metrics.oracle_call(oracle.name):
                        response = await oracle.select(query)
                except OracleTransportError:
                    logger.warning(
                        "Oracle call failed",
                        oracle=oracle.name,
                        attempt=attempt.retry_state.attempt_number,
                    )
                    raise
                span.set_attribute("oracle.selected", len(response.ranked_labels))
    assert response is not None
    return response


async def pivot_step(
    problem: PivotProblem,
    dist: ProposalDistribution,
    oracle: SelectionOracle,
    config: PivotConfig,
    rng: np.random.Generator,
    iteration: int = 0,
) -> Tuple[ProposalDistribution, IterationRecord]:
    """
    Run one sample, annotate, select, refit iteration.

    Returns:
        (new distribution, record); the distribution is unchanged on a no-op

    Raises:
        OracleTransportError: After config.oracle_retries retries
        EmptyCandidateSet: If every sampled candidate was rejected
    """
    metrics = get_metrics()
    with trace_pivot_step(iteration, config.samples, dist.sigma) as span:
        annotated = build_candidates(
            problem.image,
            problem.spec,
            problem.camera,
            lambda n: sample(dist, n, rng),
            config.samples,
            problem.style,
            problem.depth_range,
        )
        k = min(config.k, len(annotated.label_ids))
        query = problem.query(annotated, k)

        try:
            response = await ask_oracle(oracle, query, config.oracle_retries)
        except SelectionParseError as e:
            logger.warning("No usable labels in oracle answer", iteration=iteration, error=str(e))
            metrics.record_iteration(noop=True)
            span.set_attribute("pivot.noop", True)
            record = IterationRecord(
                iteration=iteration,
                prior=dist,
                posterior=dist,
                annotated=annotated,
                raw_text=e.raw_text,
                noop=True,
            )
            return dist, record

        rendered = set(annotated.labels)
        selected = tuple(label for label in response.ranked_labels if label in rendered)[:k]
        if not selected:
            metrics.record_iteration(noop=True)
            span.set_attribute("pivot.noop", True)
            return dist, IterationRecord(
                iteration, dist, dist, annotated, response.raw_text, noop=True
            )

        new = fit([annotated.labels[label] for label in selected], dist, config)
        metrics.record_iteration()
        span.set_attribute("pivot.noop", False)
        span.set_attribute("pivot.sigma_after", float(new.sigma))
        logger.info(
            "Iteration complete",
            iteration=iteration,
            candidates=len(annotated.labels),
            selected=list(selected),
            sigma=round(new.sigma, 6),
        )
        return new, IterationRecord(iteration, dist, new, annotated, response.raw_text, selected)


def _converged(prev: ProposalDistribution, new: ProposalDistribution, floor: float) -> bool:
    moved = float(np.linalg.norm(new.mean - prev.mean))
    return new.sigma <= floor and moved < floor


@traced("pivot_run", {"component": "optimize"})
async def pivot_run(
    problem: PivotProblem,
    oracle: SelectionOracle,
    config: PivotConfig,
    rng: np.random.Generator,
) -> Tuple[Action, PivotTrace]:
    """
    Iterate pivot_step up to config.iterations times.

    The best action is the first-ranked selection of the final iteration; if
    that iteration was a no-op, the latest earlier selection; with no
    selection at all, the clamped proposal mean.
    """
    dist = init_distribution(problem.spec)
    floor = config.floor_for(problem.spec)
    trace = PivotTrace()
    for iteration in range(config.iterations):
        new, record = await pivot_step(problem, dist, oracle, config, rng, iteration)
        trace.append(record)
        stop = config.early_stop and not record.noop and _converged(dist, new, floor)
        dist = new
        if stop:
            logger.info("Proposal converged", iteration=iteration, sigma=dist.sigma)
            break

    best = trace.last_selection()
    if best is None:
        logger.warning("No iteration produced a selection, returning the proposal mean")
        best = dist.mean_action()
    return best, trace
