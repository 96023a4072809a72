"""
Tests for the pivot command line.
"""

import csv
import json

import numpy as np
import pytest


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    """Empty working directory so no repository config is picked up."""
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture
def frame(workspace):
    from src.annotate import write_image

    return write_image(workspace / "frame.png", np.full((120, 160, 3), 128, dtype=np.uint8))


def _only_run_dir(out_dir, prefix):
    [run_dir] = [p for p in out_dir.iterdir() if p.name.startswith(prefix)]
    return run_dir


class TestHelpers:
    """Tests for CLI helpers."""

    def test_exit_codes(self):
        """Error families map onto exit codes."""
        from src.cli.main import exit_code_for
        from src.errors import (
            ConfigurationError,
            EmptySelection,
            ImageIOError,
            ManifestError,
            OracleTransportError,
            ParallelPivotError,
            ScriptExhausted,
        )

        assert exit_code_for(ConfigurationError("x")) == 2
        assert exit_code_for(ManifestError("x", 3)) == 2
        assert exit_code_for(OracleTransportError("x")) == 3
        assert exit_code_for(ImageIOError("x", "a.png")) == 4
        assert exit_code_for(EmptySelection("x")) == 1
        assert exit_code_for(ParallelPivotError([ScriptExhausted("a"), ScriptExhausted("b")])) == 3
        assert exit_code_for(ParallelPivotError([ScriptExhausted("a"), EmptySelection("b")])) == 1

    def test_parse_grid(self):
        """ITERATIONSxPARALLEL lists."""
        from src.cli.main import parse_grid

        assert parse_grid("1,3x1,3") == ([1, 3], [1, 3])
        assert parse_grid("1, 2 X 0") == ([1, 2], [0])

    @pytest.mark.parametrize("text", ["1,2", "0x1", "1x-1", "axb", "x1"])
    def test_bad_grid(self, text):
        """Malformed grids are configuration errors."""
        from src.cli.main import parse_grid
        from src.errors import ConfigurationError

        with pytest.raises(ConfigurationError):
            parse_grid(text)

    def test_run_dirs_are_unique(self, tmp_path):
        """Run directories are never reused."""
        from src.cli.main import make_run_dir

        first = make_run_dir(str(tmp_path), "eval", 3)
        second = make_run_dir(str(tmp_path), "eval", 3)
        assert first != second
        assert first.name.startswith("eval-") and first.name.endswith("seed3")

    def test_overrides(self):
        """Flags become dotted overrides; --seed sets both seeds."""
        from src.cli.main import build_parser, overrides_from

        args = build_parser().parse_args(["sim", "--seed", "5", "--parallel", "1", "--oracle", "replay"])
        assert overrides_from(args) == {
            "run.seed": 5,
            "pivot.seed": 5,
            "pivot.parallel": 1,
            "oracle.kind": "replay",
        }

    def test_fixed_truth_dropped_for_batches(self, nav2d_spec):
        """Batch commands ignore a fixed synthetic truth."""
        from src.cli.main import oracle_factory
        from src.models.config import RunConfig

        config = RunConfig.model_validate({"oracle": {"synthetic": {"truth": [1, 2]}}})
        factory, shared = oracle_factory(config, None)
        assert factory(0, 1).truth is None
        assert shared == []


class TestOptimizeCommand:
    """Tests for pivot optimize."""

    def test_synthetic(self, workspace, frame, capsys):
        """A fixed synthetic truth drives a full run."""
        from src.cli.main import main

        config = workspace / "run.toml"
        config.write_text(
            '[action_space]\nkind = "nav2d"\nlower = [0, 0]\nupper = [159, 119]\n\n'
            "[oracle.synthetic]\ntruth = [40, 30]\n"
        )
        code = main(["optimize", str(frame), "go left", "--config", str(config), "--out", "runs"])
        assert code == 0

        output = json.loads(capsys.readouterr().out)
        assert len(output["action"]) == 2
        run_dir = _only_run_dir(workspace / "runs", "optimize-")
        best = json.loads((run_dir / "best_action.json").read_text())
        assert best["action"] == output["action"]
        assert best["space"] == "nav2d"
        assert (run_dir / "config.json").exists()
        assert (run_dir / "instance_01" / "trace.jsonl").exists()
        assert (run_dir / "instance_01" / "iter_01.png").exists()

    def test_replay(self, workspace, frame):
        """A replay script with one instance."""
        from src.cli.main import main

        config = workspace / "run.toml"
        config.write_text(
            '[action_space]\nkind = "nav2d"\nlower = [0, 0]\nupper = [159, 119]\n\n'
            '[oracle]\nkind = "replay"\n\n[oracle.replay]\nscript = ["{\\"points\\": [1]}"]\n'
        )
        code = main(
            [
                "optimize", str(frame), "go", "--config", str(config),
                "--parallel", "1", "--iterations", "1", "--no-images",
            ]
        )
        assert code == 0
        run_dir = _only_run_dir(workspace / "runs", "optimize-")
        assert not list((run_dir / "instance_01").glob("*.png"))

    def test_exhausted_script(self, workspace, frame):
        """Running out of canned answers is an oracle failure."""
        from src.cli.main import main

        config = workspace / "run.toml"
        config.write_text('[oracle]\nkind = "replay"\n\n[oracle.replay]\nscript = ["Arrow: [1]"]\n')
        assert main(["optimize", str(frame), "go", "--config", str(config)]) == 3

    def test_malformed_script_file(self, workspace, frame):
        """A replay script that is not valid JSON exits with 2."""
        from src.cli.main import main

        script = workspace / "script.json"
        script.write_text('["Arrow: [1]", ')
        config = workspace / "run.toml"
        config.write_text(
            f'[oracle]\nkind = "replay"\n\n[oracle.replay]\nscript_file = "{script.as_posix()}"\n'
        )
        assert main(["optimize", str(frame), "go", "--config", str(config)]) == 2

    def test_missing_image(self, workspace):
        """Unreadable input images exit with 4."""
        from src.cli.main import main

        assert main(["optimize", str(workspace / "none.png"), "go"]) == 4

    def test_remote_without_key(self, workspace, frame):
        """A missing API key is a configuration error."""
        from src.cli.main import main

        assert main(["optimize", str(frame), "go", "--oracle", "remote"]) == 2


class TestEvalCommand:
    """Tests for pivot eval."""

    def test_sweep(self, workspace, nav_manifest, capsys):
        """A sweep writes sweep.csv and prints the table."""
        from src.cli.main import main

        config = workspace / "run.toml"
        config.write_text("[eval]\nsubset = 3\nrepeats = 1\n\n[pivot]\nsamples = 6\n")
        code = main(["eval", str(nav_manifest), "--config", str(config), "--grid", "1,2x0"])
        assert code == 0
        assert "normalized_l2" in capsys.readouterr().out

        run_dir = _only_run_dir(workspace / "runs", "eval-")
        with open(run_dir / "sweep.csv", newline="") as f:
            rows = list(csv.DictReader(f))
        assert [(r["iterations"], r["parallel"], r["n"]) for r in rows] == [
            ("1", "0", "1"),
            ("2", "0", "1"),
        ]
        assert (run_dir / "sweep_categories.csv").exists()
        snapshot = json.loads((run_dir / "config.json").read_text())
        assert snapshot["eval"]["subset"] == 3

    def test_samples_ablation(self, workspace, nav_manifest):
        """--samples-grid writes the ablation CSV."""
        from src.cli.main import main

        config = workspace / "run.toml"
        config.write_text("[eval]\nsubset = 2\nrepeats = 1\n\n[pivot]\niterations = 1\nparallel = 1\n")
        code = main(["eval", str(nav_manifest), "--config", str(config), "--samples-grid", "4,8"])
        assert code == 0
        run_dir = _only_run_dir(workspace / "runs", "eval-")
        with open(run_dir / "ablation_samples.csv", newline="") as f:
            assert [r["samples"] for r in csv.DictReader(f)] == ["4", "8"]

    def test_missing_manifest(self, workspace):
        """No manifest anywhere exits with 2."""
        from src.cli.main import main

        assert main(["eval"]) == 2

    def test_bad_truth_kind(self, workspace):
        """Manifest schema errors exit with 2."""
        from src.cli.main import main

        manifest = workspace / "bad.jsonl"
        manifest.write_text(
            json.dumps({"image": "a.png", "instruction": "x", "truth_kind": "mask", "truth": [1]})
            + "\n"
        )
        assert main(["eval", str(manifest)]) == 2


class TestSimCommand:
    """Tests for pivot sim."""

    def test_summary(self, workspace, capsys):
        """Episodes produce a summary and trajectories."""
        from src.cli.main import main

        code = main(["sim", "--episodes", "2", "--parallel", "1", "--no-images", "--seed", "3"])
        assert code == 0
        assert "episodes=2" in capsys.readouterr().out

        run_dir = _only_run_dir(workspace / "runs", "sim-")
        summary = json.loads((run_dir / "summary.json").read_text())
        assert summary["episodes"] == 2
        assert len(summary["steps"]) == 2
        assert (run_dir / "episode_000" / "trajectory.jsonl").exists()
        assert run_dir.name.endswith("seed3")

    def test_world_file(self, workspace):
        """World files are validated."""
        from src.cli.main import main

        world = workspace / "world.toml"
        world.write_text("[world]\nmax_step = -1.0\n")
        assert main(["sim", str(world)]) == 2


class TestGenArrowsCommand:
    """Tests for pivot gen-arrows."""

    def test_default_grid(self, workspace, capsys):
        """The default grid has 6 colors x 3 thicknesses x 3 ratios x 4 directions."""
        from src.cli.main import main

        code = main(["gen-arrows", "--out", "arrows", "--image-size", "64"])
        assert code == 0
        assert "wrote 216 samples" in capsys.readouterr().out
        lines = (workspace / "arrows" / "manifest.jsonl").read_text().splitlines()
        assert len(lines) == 216

    def test_runs_never_share_a_directory(self, workspace):
        """Without --out every run gets its own run directory with a snapshot."""
        from src.cli.main import main

        argv = ["gen-arrows", "--colors", "red", "--thicknesses", "2", "--image-size", "32"]
        assert main(argv) == 0
        assert main(argv) == 0

        run_dirs = [p for p in (workspace / "runs").iterdir() if p.name.startswith("gen-arrows-")]
        assert len(run_dirs) == 2
        for run_dir in run_dirs:
            assert (run_dir / "manifest.jsonl").exists()
            assert json.loads((run_dir / "config.json").read_text())["run"]["seed"] == 0

    def test_unknown_color(self, workspace):
        """Unknown grid values exit with 2."""
        from src.cli.main import main

        assert main(["gen-arrows", "--colors", "chartreuse"]) == 2


def _run_twice(workspace, argv, prefix):
    """Run a command twice and return the contents of both run directories."""
    from src.cli.main import main

    assert main(argv) == 0
    assert main(argv) == 0
    run_dirs = sorted(p for p in (workspace / "runs").iterdir() if p.name.startswith(prefix))
    assert len(run_dirs) == 2
    return [
        {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}
        for d in run_dirs
    ]


class TestDeterminism:
    """Fixed seeds reproduce every output file byte for byte."""

    def test_optimize(self, workspace, frame):
        """Traces, annotated frames and the best action repeat exactly."""
        config = workspace / "run.toml"
        config.write_text(
            '[action_space]\nkind = "nav2d"\nlower = [0, 0]\nupper = [159, 119]\n\n'
            "[oracle.synthetic]\ntruth = [40, 30]\nnoise_sigma = 0.1\n"
        )
        first, second = _run_twice(
            workspace,
            ["optimize", str(frame), "go left", "--config", str(config), "--seed", "3"],
            "optimize-",
        )
        assert "instance_01/trace.jsonl" in first
        assert "best_action.json" in first
        assert first == second

    def test_eval(self, workspace, nav_manifest):
        """Sweep CSVs repeat exactly."""
        config = workspace / "run.toml"
        config.write_text(
            "[eval]\nsubset = 4\nrepeats = 2\n\n[pivot]\nsamples = 6\n\n"
            "[oracle.synthetic]\nnoise_sigma = 0.1\n"
        )
        first, second = _run_twice(
            workspace,
            [
                "eval", str(nav_manifest), "--config", str(config),
                "--grid", "1,2x0,2", "--seed", "5",
            ],
            "eval-",
        )
        assert "sweep.csv" in first
        assert "sweep_categories.csv" in first
        assert first == second

    def test_sim(self, workspace):
        """Summaries and trajectories repeat exactly."""
        config = workspace / "run.toml"
        config.write_text("[world]\njitter = 0.5\n\n[oracle.synthetic]\nnoise_sigma = 0.1\n")
        first, second = _run_twice(
            workspace,
            [
                "sim", "--config", str(config), "--episodes", "3", "--parallel", "2",
                "--seed", "7", "--no-images",
            ],
            "sim-",
        )
        assert "summary.json" in first
        assert "episode_002/trajectory.jsonl" in first
        assert first == second
