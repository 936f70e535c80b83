"""Tests for morethan.cli module."""

import json
from pathlib import Path

import pytest

from morethan.checkpoint import load_checkpoint
from morethan.cli import build_parser, figure1, main, report, selftest
from morethan.figures import read_csv_rows
from morethan.harness import CHECKPOINT_FILENAME, METRICS_FILENAME

BANDIT_CONFIG = """\
# short bandit run
env_kind = bandit
total_env_steps = 200
batches_per_iteration = 4
seed = 7
log_every = 1
"""

CARTPOLE_CONFIG = """\
env_kind = cartpole
total_env_steps = 300
batches_per_iteration = 2
batch_size = 32
permutations_per_batch = 3
hidden_width = 16
eval_episodes_per_cell = 1
seed = 3
"""


def write_config(temp_dir, text: str, name: str = "run.conf") -> str:
    path = Path(temp_dir) / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def train_bandit(temp_dir, name: str = "bandit", quiet: bool = True) -> Path:
    out = Path(temp_dir) / name
    config = write_config(temp_dir, BANDIT_CONFIG)
    argv = ["train", "--config", config, "--out", str(out)]
    assert main(argv + (["-q"] if quiet else [])) == 0
    return out


class TestArguments:
    """Test argument handling."""

    def test_main_no_arguments(self, capsys):
        """Test main with no command prints help."""
        assert main([]) == 1
        assert "usage" in capsys.readouterr().out

    def test_train_requires_config_source(self):
        """Test train without --preset, --config or --resume exits with usage error."""
        with pytest.raises(SystemExit) as exc_info:
            main(["train"])
        assert exc_info.value.code == 2

    def test_unknown_preset(self):
        """Test presets are restricted to known names."""
        with pytest.raises(SystemExit):
            main(["train", "--preset", "pendulum"])

    def test_sweep_requires_config_source(self, temp_dir):
        """Test sweep without --preset or --config exits with usage error."""
        with pytest.raises(SystemExit):
            main(["sweep", "--seeds", "1", "--out", temp_dir])

    def test_parser_defaults(self):
        """Test figure2 defaults."""
        args = build_parser().parse_args(["figure2", "--checkpoint", "a.txt", "b.txt"])
        assert args.checkpoint == ["a.txt", "b.txt"]
        assert args.episodes_per_cell == 10
        assert args.out == "figure2.csv"

    def test_selftest_runs_random_play_by_default(self):
        """Test selftest includes the random-play band unless skipped."""
        assert not build_parser().parse_args(["selftest"]).skip_random_play
        assert build_parser().parse_args(["selftest", "--skip-random-play"]).skip_random_play


class TestTrainCommand:
    """Test the train command."""

    def test_writes_artifacts(self, temp_dir, capsys):
        """Test a run writes metrics.jsonl and checkpoint.txt."""
        out = train_bandit(temp_dir, quiet=False)
        assert (out / METRICS_FILENAME).exists()
        checkpoint = load_checkpoint(out / CHECKPOINT_FILENAME)
        assert checkpoint.env_steps == 200
        assert "✓" in capsys.readouterr().out

    def test_seeded_runs_are_identical(self, temp_dir):
        """Test two runs with the same config write identical metrics."""
        a = train_bandit(temp_dir, "a")
        b = train_bandit(temp_dir, "b")
        assert (a / METRICS_FILENAME).read_bytes() == (b / METRICS_FILENAME).read_bytes()

    def test_pause_and_resume(self, temp_dir):
        """Test --max-iterations then --resume matches an uninterrupted run."""
        full = train_bandit(temp_dir, "full")
        config = write_config(temp_dir, BANDIT_CONFIG)
        paused = Path(temp_dir) / "paused"
        assert (
            main(["train", "--config", config, "--out", str(paused), "--max-iterations", "3"])
            == 0
        )
        checkpoint = str(paused / CHECKPOINT_FILENAME)
        assert main(["train", "--resume", checkpoint, "-q"]) == 0
        assert (paused / METRICS_FILENAME).read_bytes() == (full / METRICS_FILENAME).read_bytes()

    def test_invalid_config_file(self, temp_dir, capsys):
        """Test an invalid config value returns 1 with an error."""
        config = write_config(temp_dir, "env_kind = bandit\nbatch_size = zero\n")
        assert main(["train", "--config", config, "--out", temp_dir]) == 1
        assert "batch_size" in capsys.readouterr().err

    def test_missing_resume_checkpoint(self, temp_dir):
        """Test resuming from a missing file returns 1."""
        assert main(["train", "--resume", str(Path(temp_dir) / "none.txt")]) == 1


class TestEvaluationCommands:
    """Test eval, figure1 and figure2 commands."""

    def test_eval_bandit(self, temp_dir):
        """Test eval on a bandit checkpoint writes figure1 rows."""
        out = train_bandit(temp_dir)
        csv_path = Path(temp_dir) / "eval.csv"
        checkpoint = str(out / CHECKPOINT_FILENAME)
        assert main(["eval", "--checkpoint", checkpoint, "--out", str(csv_path)]) == 0
        assert len(read_csv_rows(csv_path)) == 126

    def test_figure1_rejects_cartpole(self, temp_dir, capsys):
        """Test figure1 on a CartPole checkpoint fails cleanly."""
        out = Path(temp_dir) / "cartpole"
        config = write_config(temp_dir, CARTPOLE_CONFIG, "cartpole.conf")
        main(["train", "--config", config, "--out", str(out), "--max-iterations", "1", "-q"])
        assert figure1(str(out / CHECKPOINT_FILENAME), str(Path(temp_dir) / "f1.csv")) == 1
        assert "✗ Error" in capsys.readouterr().err

    def test_figure2(self, temp_dir):
        """Test figure2 writes the per-episode CSV and its summary."""
        out = Path(temp_dir) / "cartpole"
        config = write_config(temp_dir, CARTPOLE_CONFIG, "cartpole.conf")
        main(["train", "--config", config, "--out", str(out), "--max-iterations", "1", "-q"])
        csv_path = Path(temp_dir) / "figure2.csv"
        code = main(
            [
                "figure2",
                "--checkpoint",
                str(out / CHECKPOINT_FILENAME),
                "--out",
                str(csv_path),
                "--episodes-per-cell",
                "1",
            ]
        )
        assert code == 0
        assert len(read_csv_rows(csv_path)) == 60
        assert (Path(temp_dir) / "figure2_summary.csv").exists()


class TestReportCommand:
    """Test the report command."""

    def test_nothing_to_check(self):
        """Test report without inputs returns 1."""
        assert report() == 1

    def test_metrics_report_json(self, temp_dir):
        """Test the report is saved as JSON."""
        out = train_bandit(temp_dir)
        json_path = Path(temp_dir) / "report.json"
        report(metrics_paths=[str(out / METRICS_FILENAME)], output_json=str(json_path))
        data = json.loads(json_path.read_text())
        assert data["summary"]["sources"] == 1

    def test_missing_file(self, temp_dir):
        """Test unreadable inputs return 1."""
        assert report(figure2_path=str(Path(temp_dir) / "missing.csv")) == 1


@pytest.mark.slow
class TestSelftestCommand:
    """Test the selftest command."""

    def test_all_suites_pass(self, capsys):
        """Test the default suites pass."""
        assert selftest(seed=0) == 0
        assert "All 5 suites passed" in capsys.readouterr().out
