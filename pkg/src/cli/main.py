"""
Command-line entry point.

    pivot optimize IMAGE INSTRUCTION [--config run.toml]
    pivot eval [MANIFEST] [--grid 1,2,3x0,2,3 | --samples-grid 5,10,20]
    pivot sim [WORLD] [--episodes 20] [--no-images]
    pivot gen-arrows [--mode object-referential] [--out DIR]

Exit codes: 0 success, 1 other toolkit error, 2 configuration, 3 oracle,
4 file I/O. Results go to stdout, logs to stderr.
"""

import argparse
import json
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import anyio
import numpy as np
import structlog

from src.action_space.spaces import ActionSpaceSpec
from src.annotate.arrows import (
    BLANK,
    OBJECT_REFERENTIAL,
    ArrowGrid,
    gen_arrow_dataset,
    write_arrow_dataset,
)
from src.annotate.io import read_image
from src.config.loader import load_run_config, load_world_config
from src.errors import (
    ConfigurationError,
    ImageIOError,
    OracleError,
    ParallelPivotError,
    PivotError,
    RecordIOError,
)
from src.eval.dataset import load_manifest, sample_records
from src.eval.sweep import (
    format_table,
    run_ablation,
    run_sweep,
    write_ablation_csv,
    write_category_csv,
    write_csv,
)
from src.models.config import RunConfig
from src.observability.logging import setup_logging
from src.observability.metrics import MetricsConfig, setup_metrics
from src.observability.tracing import TracingConfig, setup_tracing
from src.optimize.engine import PivotProblem
from src.optimize.parallel import solve
from src.oracle.base import BaseOracle
from src.oracle.factory import build_oracle
from src.oracle.prompts import load_exemplars
from src.sim.rollout import run_episodes

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_ORACLE = 3
EXIT_IO = 4

ORACLE_KINDS = ("remote", "synthetic", "replay", "text-baseline")


def exit_code_for(error: BaseException) -> int:
    """Exit code of an error family."""
    if isinstance(error, ParallelPivotError):
        codes = {exit_code_for(e) for e in error.errors}
        return codes.pop() if len(codes) == 1 else EXIT_ERROR
    if isinstance(error, ConfigurationError):
        return EXIT_CONFIG
    if isinstance(error, OracleError):
        return EXIT_ORACLE
    if isinstance(error, (ImageIOError, RecordIOError, OSError)):
        return EXIT_IO
    return EXIT_ERROR


def _int_list(text: str, field: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigurationError(
            f"Expected comma-separated integers: {text!r}", field=field
        ) from e
    if not values:
        raise ConfigurationError(f"Empty list: {text!r}", field=field)
    return values


def parse_grid(text: str) -> Tuple[List[int], List[int]]:
    """
    Parse "1,2,3x0,2,3" into (iterations, parallel).

    Raises:
        ConfigurationError: For a malformed grid
    """
    parts = text.lower().replace(" ", "").split("x")
    if len(parts) != 2:
        raise ConfigurationError(
            f"Grid must look like ITERATIONSxPARALLEL, got {text!r}", field="grid"
        )
    iterations = _int_list(parts[0], "grid")
    parallel = _int_list(parts[1], "grid")
    if any(i < 1 for i in iterations) or any(p < 0 for p in parallel):
        raise ConfigurationError(f"Grid values out of range: {text!r}", field="grid")
    return iterations, parallel


def make_run_dir(out_dir: str, command: str, seed: int) -> Path:
    """New run directory named by command, timestamp and seed; never reused."""
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    base = Path(out_dir) / f"{command}-{stamp}-seed{seed}"
    path = base
    suffix = 1
    while path.exists():
        path = base.with_name(f"{base.name}-{suffix}")
        suffix += 1
    path.mkdir(parents=True)
    return path


def write_snapshot(
    run_dir: Path, config: RunConfig, extra: Optional[Dict[str, Any]] = None
) -> None:
    """Write config.json (replayable with --config) and the invocation arguments."""
    snapshot = config.model_dump(mode="json")
    (run_dir / "config.json").write_text(
        json.dumps(snapshot, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if extra:
        (run_dir / "invocation.json").write_text(
            json.dumps(extra, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


OracleFactory = Callable[[int, int], BaseOracle]


def oracle_factory(
    config: RunConfig, spec: Optional[ActionSpaceSpec]
) -> Tuple[OracleFactory, List[BaseOracle]]:
    """
    Factory building one oracle per run.

    Remote-backed oracles are shared across runs so they share one client and
    one request throttle; those shared instances are returned for closing.
    A fixed synthetic truth is dropped: records and episodes carry their own.
    """
    oracle = config.oracle
    if oracle.synthetic.truth is not None:
        synthetic = oracle.synthetic.model_copy(update={"truth": None})
        oracle = oracle.model_copy(update={"synthetic": synthetic})
    remote = oracle.kind == "remote" or (
        oracle.kind == "text-baseline" and oracle.text_baseline.backend == "remote"
    )
    if remote:
        shared = build_oracle(oracle, config.run.seed, spec)
        return (lambda index, seed: shared), [shared]
    return (lambda index, seed: build_oracle(oracle, seed, spec)), []


async def _close(oracles: Sequence[BaseOracle]) -> None:
    for oracle in oracles:
        await oracle.aclose()


async def cmd_optimize(args: argparse.Namespace, config: RunConfig) -> int:
    """Optimize one image and write the best action, trace and images."""
    spec = config.action_space_spec()
    camera = config.camera_model()
    image = read_image(args.image)
    truth = None
    if config.oracle.synthetic.truth is not None:
        try:
            truth = spec.action(config.oracle.synthetic.truth)
        except PivotError as e:
            raise ConfigurationError(str(e), field="oracle.synthetic.truth") from e
    problem = PivotProblem(
        image=image,
        instruction=args.instruction,
        spec=spec,
        camera=camera,
        style=config.style,
        prompt=config.prompt,
        exemplars=load_exemplars(config.prompt),
        truth=truth,
    )
    seed = config.pivot.seed
    oracle = build_oracle(config.oracle, seed, spec)
    try:
        result = await solve(problem, oracle, config.pivot, np.random.default_rng(seed))
    finally:
        await oracle.aclose()

    run_dir = make_run_dir(config.run.out_dir, "optimize", seed)
    write_snapshot(
        run_dir, config, {"image": str(args.image), "instruction": args.instruction}
    )
    result.export(run_dir, images=not args.no_images)
    best = {
        "action": list(result.best.components),
        "space": spec.kind.value,
        "candidates": [None if c is None else list(c.components) for c in result.candidates],
    }
    if result.baseline_text is not None:
        best["baseline_text"] = result.baseline_text
    (run_dir / "best_action.json").write_text(json.dumps(best, indent=2) + "\n", encoding="utf-8")
    print(json.dumps({"action": best["action"], "run_dir": str(run_dir)}))
    return EXIT_OK


async def cmd_eval(args: argparse.Namespace, config: RunConfig) -> int:
    """Run a sweep (or a sample-count ablation) over a manifest."""
    manifest = args.manifest or config.eval.manifest
    if not manifest:
        raise ConfigurationError("Missing required field eval.manifest", field="eval.manifest")
    seed = config.run.seed
    records = sample_records(load_manifest(manifest), config.eval.subset, seed)
    spec = config.action_space_spec()
    factory, shared = oracle_factory(config, spec)
    exemplars = load_exemplars(config.prompt)
    repeats = args.repeats or config.eval.repeats

    try:
        if args.samples_grid:
            values = [str(v) for v in _int_list(args.samples_grid, "samples_grid")]
            ablation = await run_ablation(
                records, "samples", values, config, factory, repeats, seed, exemplars=exemplars
            )
        else:
            iterations, parallel = (
                parse_grid(args.grid)
                if args.grid
                else (config.eval.iterations, config.eval.parallel)
            )
            sweep = await run_sweep(
                records,
                iterations,
                parallel,
                config,
                factory,
                repeats,
                seed,
                exemplars=exemplars,
            )
    finally:
        await _close(shared)

    run_dir = make_run_dir(config.run.out_dir, "eval", seed)
    write_snapshot(run_dir, config, {"manifest": str(manifest), "records": len(records)})
    if args.samples_grid:
        path = write_ablation_csv(ablation, run_dir / "ablation_samples.csv")
        for value, stats in ablation.rows:
            print(f"samples={value} {ablation.metric}={stats.mean:.4f} ± {stats.std:.4f}")
    else:
        path = write_csv(sweep, run_dir / "sweep.csv")
        write_category_csv(sweep, run_dir / "sweep_categories.csv")
        print(format_table(sweep))
    print(f"wrote {path}")
    return EXIT_OK


async def cmd_sim(args: argparse.Namespace, config: RunConfig) -> int:
    """Run a seeded batch of simulator episodes."""
    world = load_world_config(args.world) if args.world else config.world
    seed = config.run.seed
    factory, shared = oracle_factory(config, None)
    try:
        batch = await run_episodes(
            world,
            factory,
            config.pivot,
            args.episodes,
            seed=seed,
            style=config.style,
            prompt=config.prompt,
            exemplars=load_exemplars(config.prompt),
            jobs=config.run.jobs,
            keep_frames=not args.no_images,
        )
    finally:
        await _close(shared)

    run_dir = make_run_dir(config.run.out_dir, "sim", seed)
    write_snapshot(
        run_dir,
        config.model_copy(update={"world": world}),
        {"episodes": args.episodes},
    )
    for index, result in enumerate(batch.results):
        result.export(run_dir / f"episode_{index:03d}", images=not args.no_images)
    summary = {
        "episodes": len(batch.results),
        "success_rate": batch.success_rate,
        "median_steps": batch.median_steps,
        "steps": [r.steps for r in batch.results],
        "success": [r.success for r in batch.results],
    }
    (run_dir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    print(
        f"episodes={summary['episodes']} success_rate={batch.success_rate:.4f} "
        f"median_steps={batch.median_steps:.1f}"
    )
    return EXIT_OK


async def cmd_gen_arrows(args: argparse.Namespace, config: RunConfig) -> int:
    """Generate the arrow-robustness dataset."""
    defaults = ArrowGrid()
    try:
        grid = ArrowGrid(
            colors=args.colors.split(",") if args.colors else defaults.colors,
            thicknesses=(
                _int_list(args.thicknesses, "thicknesses")
                if args.thicknesses
                else defaults.thicknesses
            ),
            arrowhead_ratios=(
                [float(v) for v in args.arrowheads.split(",")]
                if args.arrowheads
                else defaults.arrowhead_ratios
            ),
            directions=args.directions.split(",") if args.directions else defaults.directions,
        )
    except ValueError as e:
        raise ConfigurationError(str(e), field="grid") from e
    background = read_image(args.background) if args.background else None
    samples = gen_arrow_dataset(
        grid,
        mode=args.mode,
        seed=config.run.seed,
        image_size=args.image_size,
        background=background,
    )
    out_dir = (
        Path(args.out)
        if args.out
        else make_run_dir(config.run.out_dir, "gen-arrows", config.run.seed)
    )
    manifest = write_arrow_dataset(samples, str(out_dir))
    write_snapshot(out_dir, config, {"mode": args.mode, "samples": len(samples)})
    print(f"wrote {len(samples)} samples to {manifest}")
    return EXIT_OK


COMMANDS = {
    "optimize": cmd_optimize,
    "eval": cmd_eval,
    "sim": cmd_sim,
    "gen-arrows": cmd_gen_arrows,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Run config (TOML, or a run directory's config.json)")
    common.add_argument("--seed", type=int, help="RNG seed")
    common.add_argument("--jobs", type=int, help="Concurrent records or episodes")
    common.add_argument("--iterations", type=int, help="Iterations per PIVOT instance (N)")
    common.add_argument("--parallel", type=int, help="Parallel PIVOT instances (E)")
    common.add_argument("--samples", type=int, help="Candidates per iteration (M)")
    common.add_argument("--k", type=int, help="Labels the oracle picks (K)")
    common.add_argument("--oracle", choices=ORACLE_KINDS, help="Oracle kind")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")

    parser = argparse.ArgumentParser(
        prog="pivot", description="Iterative visual prompting optimizer"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    optimize = sub.add_parser("optimize", parents=[common], help="Optimize one image")
    optimize.add_argument("image", help="Input image (PNG/JPEG)")
    optimize.add_argument("instruction", help="Task instruction")
    optimize.add_argument("--no-images", action="store_true", help="Skip annotated PNGs")

    evaluate = sub.add_parser("eval", parents=[common], help="Offline evaluation sweep")
    evaluate.add_argument("manifest", nargs="?", help="Dataset manifest (JSON lines)")
    evaluate.add_argument("--grid", help="ITERATIONSxPARALLEL, e.g. 1,2,3x0,2,3")
    evaluate.add_argument("--samples-grid", help="Sample-count ablation, e.g. 5,10,20")
    evaluate.add_argument("--repeats", type=int, help="Runs per grid cell")

    sim = sub.add_parser("sim", parents=[common], help="Closed-loop simulator episodes")
    sim.add_argument("world", nargs="?", help="World definition (TOML)")
    sim.add_argument("--episodes", type=int, default=10, help="Number of episodes")
    sim.add_argument("--no-images", action="store_true", help="Skip per-step PNGs")

    arrows = sub.add_parser("gen-arrows", parents=[common], help="Arrow-robustness dataset")
    arrows.add_argument("--mode", choices=(BLANK, OBJECT_REFERENTIAL), default=BLANK)
    arrows.add_argument("--colors", help="Comma-separated color names")
    arrows.add_argument("--thicknesses", help="Comma-separated line thicknesses (px)")
    arrows.add_argument("--arrowheads", help="Comma-separated arrowhead ratios")
    arrows.add_argument("--directions", help="Comma-separated directions, e.g. up+right")
    arrows.add_argument("--image-size", type=int, default=256, help="Square image size (px)")
    arrows.add_argument("--background", help="Background image for object-referential mode")
    return parser


def overrides_from(args: argparse.Namespace) -> Dict[str, Any]:
    """Dotted config overrides from command-line flags."""
    mapping = {
        "run.seed": args.seed,
        "pivot.seed": args.seed,
        "run.jobs": args.jobs,
        "pivot.iterations": args.iterations,
        "pivot.parallel": args.parallel,
        "pivot.samples": args.samples,
        "pivot.k": args.k,
        "oracle.kind": args.oracle,
    }
    if args.command != "gen-arrows":
        mapping["run.out_dir"] = args.out
    return {k: v for k, v in mapping.items() if v is not None}


def _setup_observability(config: RunConfig) -> None:
    obs = config.observability
    setup_tracing(TracingConfig.from_observability(obs))
    setup_metrics(MetricsConfig.from_observability(obs))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run a command and return its exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level or "INFO", force=True)

    try:
        config = load_run_config(args.config, overrides_from(args))
        if not args.log_level:
            setup_logging(config.logging.level, config.logging.format, force=True)
        _setup_observability(config)
        return anyio.run(COMMANDS[args.command], args, config)
    except (PivotError, OSError) as e:
        code = exit_code_for(e)
        logger.error("Command failed", command=args.command, error=str(e), exit_code=code)
        print(f"error: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
