"""Tests for morethan.harness module."""

import dataclasses
from pathlib import Path

import numpy as np
import pytest

from morethan.checkpoint import load_checkpoint, save_checkpoint
from morethan.harness import (
    CHECKPOINT_FILENAME,
    METRICS_FILENAME,
    MetricsRecord,
    collect_episodes,
    new_training_state,
    read_metrics,
    restore_training_state,
    run_training,
    train,
    warm_up,
    write_metrics,
)
from morethan.types import CheckpointError, ConfigError, EnvKind


class TestMetricsRecord:
    """Test MetricsRecord serialization."""

    def test_json_line(self):
        """Test a record survives its JSON line."""
        record = MetricsRecord(3, 120, 120, 4.5, 1.25, [0.25, 0.5, 0.25])
        assert MetricsRecord.from_json(record.to_json()) == record

    def test_write_and_read(self, temp_dir):
        """Test write_metrics and read_metrics agree, with append."""
        path = Path(temp_dir) / METRICS_FILENAME
        first = MetricsRecord(1, 10, 10, 1.0, 2.0, [0.0, 1.0, 0.0])
        second = MetricsRecord(2, 20, 20, 2.0, 1.0, [0.5, 0.0, 0.5])
        write_metrics([first], path)
        write_metrics([second], path, append=True)
        assert read_metrics(path) == [first, second]


class TestCollection:
    """Test episode collection and the step budget."""

    def test_warm_up_fills_buffer(self, tiny_bandit_config):
        """Test warm-up collects one iteration's worth of random episodes."""
        state = new_training_state(tiny_bandit_config)
        returns = warm_up(state)
        assert len(returns) == 16
        assert len(state.buffer) == 16
        assert state.env_steps == 16
        assert state.episodes == 16

    def test_collection_stops_at_budget(self, tiny_bandit_config):
        """Test no episode starts once the budget is spent."""
        config = dataclasses.replace(tiny_bandit_config, total_env_steps=5)
        state = new_training_state(config)
        warm_up(state)
        assert state.env_steps == 5
        assert collect_episodes(state, state.policy, 4, lambda: None) == []

    def test_cartpole_last_episode_completes(self, tiny_cartpole_config):
        """Test the budget is overshot by at most one episode."""
        config = dataclasses.replace(tiny_cartpole_config, total_env_steps=30)
        state = new_training_state(config)
        warm_up(state)
        lengths = state.buffer.lengths()
        assert state.env_steps == int(lengths.sum())
        assert state.env_steps - int(lengths[-1]) < 30 <= state.env_steps


class TestTrain:
    """Test train function."""

    def test_bandit_step_accounting(self, tiny_bandit_config):
        """Test a bandit run collects exactly total_env_steps episodes."""
        result = train(tiny_bandit_config)
        assert result.finished
        assert result.state.episodes == 200
        assert result.state.env_steps == 200
        assert len(result.state.buffer) == 100
        assert result.metrics[-1].env_steps_so_far == 200

    def test_record_contents(self, tiny_bandit_config):
        """Test records are numbered and label frequencies are distributions."""
        result = train(tiny_bandit_config)
        assert [r.iteration for r in result.metrics] == list(range(1, len(result.metrics) + 1))
        steps = [r.env_steps_so_far for r in result.metrics]
        assert steps == sorted(steps)
        for record in result.metrics:
            assert sum(record.m_label_frequencies) == pytest.approx(1.0)
            assert np.isfinite(record.mean_batch_loss)
            assert 1.0 <= record.mean_recent_return <= 6.0

    def test_identity_share_of_labels(self, tiny_bandit_config):
        """Test at least 1 / permutations of the labels are m = 0."""
        result = train(tiny_bandit_config)
        for record in result.metrics:
            assert record.m_label_frequencies[1] >= 0.5

    def test_same_seed_same_run(self, tiny_bandit_config):
        """Test two runs with one seed produce identical records and parameters."""
        a = train(tiny_bandit_config)
        b = train(tiny_bandit_config)
        assert a.metrics == b.metrics
        for label, value in a.state.policy.net.parameters().items():
            np.testing.assert_array_equal(value, b.state.policy.net.parameters()[label])

    def test_different_seeds_differ(self, tiny_bandit_config):
        """Test another seed gives another run."""
        a = train(tiny_bandit_config)
        b = train(dataclasses.replace(tiny_bandit_config, seed=8))
        assert a.metrics != b.metrics

    def test_cartpole_iterations_add_episodes(self, tiny_cartpole_config):
        """Test every CartPole iteration but the last adds five episodes."""
        result = train(tiny_cartpole_config)
        episodes = [5] + [r.episodes_so_far for r in result.metrics]
        for before, after in zip(episodes[:-2], episodes[1:-1]):
            assert after - before == 5
        assert result.state.env_steps >= 300

    def test_gradient_steps_per_iteration(self, tiny_cartpole_config):
        """Test each iteration takes batches x permutations optimizer steps."""
        result = train(tiny_cartpole_config, max_iterations=1)
        assert result.state.optimizer.step_count == 2 * 3
        assert result.state.policy.net.version == 2 * 3

    def test_random_actions_keep_every_arm_buffered(self, tiny_bandit_config):
        """Test exploration with random actions leaves all six arms in the buffer."""
        config = dataclasses.replace(
            tiny_bandit_config, total_env_steps=1000, random_action_prob=0.9
        )
        result = train(config)
        arms = {int(episode.actions[0]) for episode in result.state.buffer}
        assert arms == set(range(6))

    def test_random_action_runs_are_seeded(self, tiny_bandit_config):
        """Test random-action runs repeat per seed and differ from policy-only runs."""
        config = dataclasses.replace(tiny_bandit_config, random_action_prob=0.5)
        assert train(config).metrics == train(config).metrics
        assert train(config).metrics != train(tiny_bandit_config).metrics

    def test_invalid_config_rejected(self, tiny_bandit_config):
        """Test train validates its config."""
        with pytest.raises(ConfigError):
            train(dataclasses.replace(tiny_bandit_config, batch_size=0))


class TestResume:
    """Test pausing and resuming."""

    @pytest.mark.parametrize("pause_at", [1, 5])
    def test_resume_matches_uninterrupted(self, tiny_bandit_config, temp_dir, pause_at):
        """Test pause, save, load and resume equals one uninterrupted run."""
        full = train(tiny_bandit_config)

        paused = train(tiny_bandit_config, max_iterations=pause_at)
        assert not paused.finished
        assert paused.state.iteration == pause_at
        path = save_checkpoint(paused.checkpoint(), Path(temp_dir) / "paused.txt")
        resumed = train(tiny_bandit_config, resume=load_checkpoint(path))

        assert paused.metrics + resumed.metrics == full.metrics
        for label, value in full.state.policy.net.parameters().items():
            np.testing.assert_array_equal(value, resumed.state.policy.net.parameters()[label])

    def test_thousand_step_bandit_resume(self, tiny_bandit_config, temp_dir):
        """Test a 1,000-step bandit run resumed mid-way ends bit-identically."""
        config = dataclasses.replace(tiny_bandit_config, total_env_steps=1000)
        full = train(config)
        paused = train(config, max_iterations=30)
        path = save_checkpoint(paused.checkpoint(), Path(temp_dir) / "paused.txt")
        resumed = train(config, resume=load_checkpoint(path))
        assert resumed.state.episodes == 1000
        assert paused.metrics + resumed.metrics == full.metrics
        assert resumed.state.optimizer.step_count == full.state.optimizer.step_count
        for label, value in full.state.policy.net.parameters().items():
            np.testing.assert_array_equal(value, resumed.state.policy.net.parameters()[label])

    def test_cartpole_resume(self, tiny_cartpole_config, temp_dir):
        """Test CartPole with Adam resumes bit-identically."""
        full = train(tiny_cartpole_config)
        paused = train(tiny_cartpole_config, max_iterations=1)
        path = save_checkpoint(paused.checkpoint(), Path(temp_dir) / "paused.txt")
        resumed = train(tiny_cartpole_config, resume=load_checkpoint(path))
        assert paused.metrics + resumed.metrics == full.metrics

    def test_resume_requires_buffer(self, tiny_bandit_config):
        """Test a checkpoint saved without its buffer cannot be resumed."""
        paused = train(tiny_bandit_config, max_iterations=1)
        with pytest.raises(CheckpointError):
            restore_training_state(tiny_bandit_config, paused.checkpoint(include_buffer=False))

    def test_resume_requires_same_env(self, tiny_bandit_config, tiny_cartpole_config):
        """Test a bandit checkpoint cannot continue as CartPole."""
        paused = train(tiny_bandit_config, max_iterations=1)
        with pytest.raises(CheckpointError):
            train(tiny_cartpole_config, resume=paused.checkpoint())

    def test_snapshot_is_detached(self, tiny_bandit_config):
        """Test further training does not alter an earlier snapshot."""
        paused = train(tiny_bandit_config, max_iterations=1)
        checkpoint = paused.checkpoint()
        before = checkpoint.net.out_layer.weights.copy()
        train(tiny_bandit_config, resume=checkpoint)
        np.testing.assert_array_equal(checkpoint.net.out_layer.weights, before)


class TestRunTraining:
    """Test run_training artifacts."""

    def test_writes_metrics_and_checkpoint(self, tiny_bandit_config, temp_dir):
        """Test the run directory holds metrics.jsonl and checkpoint.txt."""
        result = run_training(tiny_bandit_config)
        out = Path(temp_dir)
        assert read_metrics(out / METRICS_FILENAME) == result.metrics
        checkpoint = load_checkpoint(out / CHECKPOINT_FILENAME)
        assert checkpoint.env_kind is EnvKind.BANDIT
        assert checkpoint.env_steps == 200
        assert len(checkpoint.buffer) == 100

    def test_resume_appends_metrics(self, tiny_bandit_config, temp_dir):
        """Test a resumed run appends to the existing metrics file."""
        out = Path(temp_dir)
        run_training(tiny_bandit_config, max_iterations=2)
        resumed = run_training(
            tiny_bandit_config, resume=load_checkpoint(out / CHECKPOINT_FILENAME)
        )
        records = read_metrics(out / METRICS_FILENAME)
        assert len(records) == 2 + len(resumed.metrics)
        assert [r.iteration for r in records] == list(range(1, len(records) + 1))

    def test_metrics_are_byte_identical_across_runs(self, tiny_bandit_config, temp_dir):
        """Test two seeded runs write identical metrics files."""
        first = dataclasses.replace(tiny_bandit_config, output_dir=str(Path(temp_dir) / "a"))
        second = dataclasses.replace(tiny_bandit_config, output_dir=str(Path(temp_dir) / "b"))
        run_training(first)
        run_training(second)
        a = (Path(first.output_dir) / METRICS_FILENAME).read_bytes()
        b = (Path(second.output_dir) / METRICS_FILENAME).read_bytes()
        assert a == b
