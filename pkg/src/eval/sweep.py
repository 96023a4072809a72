"""
Seeded evaluation sweeps.

run_sweep evaluates every (iterations, parallel) grid cell over a dataset,
repeating each cell several times. Each run's RNG is derived from the sweep
seed, the cell and the record index, so results do not depend on how records
are scheduled. A cell reports the mean and population standard deviation of
the per-repeat dataset means.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import anyio
import numpy as np
import structlog

from src.action_space.camera import CameraModel
from src.action_space.spaces import Action, ActionSpaceSpec
from src.annotate.io import read_image
from src.errors import ConfigurationError, ImageIOError, PivotError, RecordIOError
from src.eval.dataset import PENALTIES, EvalRecord, metric_name, record_metric, truth_action
from src.models.config import RunConfig
from src.optimize.engine import PivotProblem
from src.optimize.parallel import solve
from src.oracle.base import SelectionOracle

logger = structlog.get_logger(__name__)

# (record_index, seed) -> oracle
OracleFactory = Callable[[int, int], SelectionOracle]

Cell = Tuple[int, int]

ABLATION_AXES = ("samples", "prompt_style", "ordering")


@dataclass(frozen=True)
class CellStats:
    mean: float
    std: float
    n: int


def cell_stats(values: Sequence[float]) -> CellStats:
    """Mean and population standard deviation."""
    array = np.asarray(values, dtype=float)
    return CellStats(mean=float(array.mean()), std=float(array.std()), n=len(values))


@dataclass
class SweepResult:
    """
    Statistics per (iterations, parallel) cell.

    Attributes:
        metric: Name of the metric aggregated
        cells: Overall statistics per cell
        categories: Per task-category statistics per cell
        runs: Per-repeat dataset means per cell
    """

    metric: str
    cells: Dict[Cell, CellStats] = field(default_factory=dict)
    categories: Dict[Cell, Dict[str, CellStats]] = field(default_factory=dict)
    runs: Dict[Cell, List[float]] = field(default_factory=dict)

    @property
    def iterations(self) -> List[int]:
        return sorted({i for i, _ in self.cells})

    @property
    def parallel(self) -> List[int]:
        return sorted({p for _, p in self.cells})


@dataclass
class AblationResult:
    """Statistics per value of one ablation axis."""

    axis: str
    metric: str
    rows: List[Tuple[str, CellStats]] = field(default_factory=list)


@dataclass
class _EvalContext:
    records: List[EvalRecord]
    images: Dict[int, np.ndarray]
    config: RunConfig
    spec: ActionSpaceSpec
    camera: Optional[CameraModel]
    exemplars: Tuple[str, ...]
    oracle_factory: OracleFactory
    jobs: int


def load_images(records: Sequence[EvalRecord]) -> Dict[int, np.ndarray]:
    """
    Read every record image once.

    Raises:
        RecordIOError: Naming the record whose image failed to load
    """
    images: Dict[int, np.ndarray] = {}
    for record in records:
        try:
            images[record.index] = read_image(record.image_path)
        except ImageIOError as e:
            raise RecordIOError(str(e), record.index, str(record.image_path)) from e
    return images


def dataset_metric(records: Sequence[EvalRecord], bbox_metric: str) -> str:
    """
    The single metric a dataset is scored with.

    Raises:
        ConfigurationError: If records mix truth kinds
    """
    names = {metric_name(r.truth_kind, bbox_metric) for r in records}
    if len(names) != 1:
        raise ConfigurationError(
            f"Manifest mixes metrics {sorted(names)}", field="eval.manifest"
        )
    return names.pop()


def run_seed(seed: int, key: Sequence[int], repeat: int, record_index: int) -> np.random.SeedSequence:
    """Seed of one run, independent of scheduling."""
    return np.random.SeedSequence([seed, *key, repeat, record_index])


async def _evaluate_record(
    ctx: _EvalContext,
    record: EvalRecord,
    config: RunConfig,
    metric: str,
    seed_sequence: np.random.SeedSequence,
    oracle: SelectionOracle,
) -> float:
    image = ctx.images[record.index]
    camera = record.camera or ctx.camera
    try:
        truth: Optional[Action] = truth_action(record, ctx.spec)
    except ConfigurationError:
        truth = None
    problem = PivotProblem(
        image=image,
        instruction=record.instruction,
        spec=ctx.spec,
        camera=camera,
        style=config.style,
        prompt=config.prompt,
        exemplars=ctx.exemplars,
        truth=truth,
    )
    try:
        result = await solve(problem, oracle, config.pivot, np.random.default_rng(seed_sequence))
        return record_metric(
            record,
            result.best,
            ctx.spec,
            camera,
            problem.image_size,
            ctx.config.eval.bbox_metric,
        )
    except PivotError as e:
        logger.warning(
            "Run failed, recording penalty",
            record=record.index,
            error=str(e),
            penalty=PENALTIES[metric],
        )
        return PENALTIES[metric]


async def _evaluate_setting(
    ctx: _EvalContext,
    config: RunConfig,
    key: Sequence[int],
    repeats: int,
    seed: int,
    metric: str,
) -> Tuple[List[float], Dict[str, List[float]]]:
    """Per-repeat means, overall and per category, for one configuration."""
    overall: List[float] = []
    by_category: Dict[str, List[float]] = {}
    limiter = anyio.CapacityLimiter(ctx.jobs)

    for repeat in range(repeats):
        values: List[float] = [0.0] * len(ctx.records)
        runs = []
        for position, record in enumerate(ctx.records):
            sequence = run_seed(seed, key, repeat, record.index)
            oracle_seed = int(sequence.generate_state(1)[0])
            runs.append((position, record, sequence, ctx.oracle_factory(record.index, oracle_seed)))

        async def run_one(position, record, sequence, oracle) -> None:
            async with limiter:
                values[position] = await _evaluate_record(
                    ctx, record, config, metric, sequence, oracle
                )

        if all(oracle.concurrent for *_, oracle in runs):
            async with anyio.create_task_group() as tg:
                for run in runs:
                    tg.start_soon(run_one, *run)
        else:
            for run in runs:
                await run_one(*run)

        overall.append(float(np.mean(values)))
        categories: Dict[str, List[float]] = {}
        for record, value in zip(ctx.records, values):
            categories.setdefault(record.category, []).append(value)
        for category, scores in categories.items():
            by_category.setdefault(category, []).append(float(np.mean(scores)))

    return overall, by_category


def _context(
    records: Sequence[EvalRecord],
    config: RunConfig,
    oracle_factory: OracleFactory,
    exemplars: Sequence[str],
    jobs: Optional[int],
) -> _EvalContext:
    if not records:
        raise ConfigurationError("Evaluation needs at least one record", field="eval.manifest")
    return _EvalContext(
        records=list(records),
        images=load_images(records),
        config=config,
        spec=config.action_space_spec(),
        camera=config.camera_model(),
        exemplars=tuple(exemplars),
        oracle_factory=oracle_factory,
        jobs=jobs or config.run.jobs,
    )


async def run_sweep(
    records: Sequence[EvalRecord],
    iterations: Sequence[int],
    parallel: Sequence[int],
    config: RunConfig,
    oracle_factory: OracleFactory,
    repeats: Optional[int] = None,
    seed: Optional[int] = None,
    jobs: Optional[int] = None,
    exemplars: Sequence[str] = (),
) -> SweepResult:
    """
    Evaluate every (iterations, parallel) cell.

    A parallel value of 0 means a single instance without aggregation.

    Args:
        records: Dataset
        iterations: Iteration counts (rows)
        parallel: Parallel instance counts (columns)
        config: Base run configuration
        oracle_factory: Builds the oracle of one run
        repeats: Runs per cell (default config.eval.repeats)
        seed: Sweep seed (default config.run.seed)
        jobs: Concurrent records (default config.run.jobs)

    Raises:
        RecordIOError: If a record image cannot be read
        ConfigurationError: For an empty dataset or grid
    """
    if not iterations or not parallel:
        raise ConfigurationError("Sweep grid is empty", field="eval.iterations")
    repeats = repeats or config.eval.repeats
    seed = config.run.seed if seed is None else seed
    metric = dataset_metric(records, config.eval.bbox_metric)
    ctx = _context(records, config, oracle_factory, exemplars, jobs)

    result = SweepResult(metric=metric)
    for n_iter in iterations:
        for n_par in parallel:
            cell = (n_iter, n_par)
            pivot = config.pivot.model_copy(
                update={"iterations": n_iter, "parallel": max(1, n_par)}
            )
            cell_config = config.model_copy(update={"pivot": pivot})
            overall, by_category = await _evaluate_setting(
                ctx, cell_config, cell, repeats, seed, metric
            )
            result.runs[cell] = overall
            result.cells[cell] = cell_stats(overall)
            result.categories[cell] = {c: cell_stats(v) for c, v in sorted(by_category.items())}
            logger.info(
                "Sweep cell complete",
                iterations=n_iter,
                parallel=n_par,
                metric=metric,
                mean=round(result.cells[cell].mean, 6),
            )
    return result


def _ablation_config(config: RunConfig, axis: str, value: str) -> RunConfig:
    if axis == "samples":
        samples = int(value)
        pivot = config.pivot.model_copy(
            update={"samples": samples, "k": min(config.pivot.k, samples)}
        )
        return config.model_copy(update={"pivot": pivot})
    if axis == "prompt_style":
        data = config.prompt.model_dump()
        data["prompt_style"] = value
    else:
        data = config.prompt.model_dump()
        data["ordering"] = [part.strip() for part in value.split(",")]
    try:
        prompt = type(config.prompt).model_validate(data)
    except ValueError as e:
        raise ConfigurationError(f"Invalid {axis} value {value!r}", field=f"prompt.{axis}") from e
    return config.model_copy(update={"prompt": prompt})


async def run_ablation(
    records: Sequence[EvalRecord],
    axis: str,
    values: Sequence[str],
    config: RunConfig,
    oracle_factory: OracleFactory,
    repeats: Optional[int] = None,
    seed: Optional[int] = None,
    jobs: Optional[int] = None,
    exemplars: Sequence[str] = (),
) -> AblationResult:
    """
    Evaluate one configuration axis at several values.

    Axes: samples (candidate count), prompt_style, ordering (comma-separated
    segment order such as "image,preamble,task").
    """
    if axis not in ABLATION_AXES:
        raise ConfigurationError(f"Unknown ablation axis: {axis}", field="ablation.axis")
    if not values:
        raise ConfigurationError("Ablation needs at least one value", field="ablation.values")
    repeats = repeats or config.eval.repeats
    seed = config.run.seed if seed is None else seed
    metric = dataset_metric(records, config.eval.bbox_metric)
    ctx = _context(records, config, oracle_factory, exemplars, jobs)

    result = AblationResult(axis=axis, metric=metric)
    for position, value in enumerate(values):
        setting = _ablation_config(config, axis, str(value))
        overall, _ = await _evaluate_setting(ctx, setting, (position,), repeats, seed, metric)
        result.rows.append((str(value), cell_stats(overall)))
    return result


def _write_rows(path: Union[str, Path], fieldnames: List[str], rows: List[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_csv(result: SweepResult, path: Union[str, Path]) -> Path:
    """One row per cell: iterations, parallel, metric_mean, metric_std, n."""
    rows = [
        {
            "iterations": i,
            "parallel": p,
            "metric_mean": repr(stats.mean),
            "metric_std": repr(stats.std),
            "n": stats.n,
        }
        for (i, p), stats in sorted(result.cells.items())
    ]
    return _write_rows(path, ["iterations", "parallel", "metric_mean", "metric_std", "n"], rows)


def write_category_csv(result: SweepResult, path: Union[str, Path]) -> Path:
    """One row per cell and task category."""
    rows = [
        {
            "iterations": i,
            "parallel": p,
            "category": category,
            "metric_mean": repr(stats.mean),
            "metric_std": repr(stats.std),
            "n": stats.n,
        }
        for (i, p), categories in sorted(result.categories.items())
        for category, stats in categories.items()
    ]
    fields = ["iterations", "parallel", "category", "metric_mean", "metric_std", "n"]
    return _write_rows(path, fields, rows)


def write_ablation_csv(result: AblationResult, path: Union[str, Path]) -> Path:
    """Columns: <axis>, metric_mean, metric_std."""
    rows = [
        {result.axis: value, "metric_mean": repr(s.mean), "metric_std": repr(s.std)}
        for value, s in result.rows
    ]
    return _write_rows(path, [result.axis, "metric_mean", "metric_std"], rows)


def format_table(result: SweepResult) -> str:
    """Iterations as rows, parallel counts as columns, cells as mean ± std."""
    header = [f"{result.metric}"] + [f"{p} parallel" for p in result.parallel]
    lines = [header]
    for n_iter in result.iterations:
        row = [f"{n_iter} iter"]
        for n_par in result.parallel:
            stats = result.cells.get((n_iter, n_par))
            row.append("-" if stats is None else f"{stats.mean:.4f} ± {stats.std:.4f}")
        lines.append(row)
    widths = [max(len(line[c]) for line in lines) for c in range(len(header))]
    return "\n".join(
        "  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
        for line in lines
    )
