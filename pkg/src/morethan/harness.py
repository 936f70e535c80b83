"""
Training harness.

train() runs the online procedure: a warm-up of uniformly random episodes,
then iterations of (collect exploratory episodes, train on relabeled
segment batches, record metrics) until the environment-step budget is
spent. run_training() wraps it with the on-disk artifacts of a run
directory: metrics.jsonl and the final checkpoint.
"""

import copy
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Union

import numpy as np

from .agent import (
    Actor,
    Policy,
    UniformRandomPolicy,
    build_policy,
    default_command,
    encode_commands,
    exploration_actor,
    exploratory_command,
)
from .checkpoint import Checkpoint, save_checkpoint
from .config import ExperimentConfig
from .envs import make_env, rollout
from .nn_core import OptimizerState, make_optimizer, train_step
from .replay import (
    ReplayBuffer,
    m_label_histogram,
    make_training_batch,
    sample_segments,
    training_permutations,
)
from .types import MORETHAN_VALUES, CheckpointError, Command

logger = logging.getLogger(__name__)

METRICS_FILENAME = "metrics.jsonl"
CHECKPOINT_FILENAME = "checkpoint.txt"


@dataclass
class MetricsRecord:
    """
    Summary of one training iteration.

    Attributes:
        iteration: 1-based iteration number
        env_steps_so_far: Environment steps collected, warm-up included
        episodes_so_far: Episodes collected, warm-up included
        mean_recent_return: Mean return of this iteration's exploratory episodes
        mean_batch_loss: Mean cross-entropy over this iteration's gradient steps
        m_label_frequencies: Share of training samples with m = -1, 0, +1
    """

    iteration: int
    env_steps_so_far: int
    episodes_so_far: int
    mean_recent_return: float
    mean_batch_loss: float
    m_label_frequencies: List[float]

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, line: str) -> "MetricsRecord":
        return cls(**json.loads(line))


@dataclass
class TrainingState:
    """Everything train() mutates; one instance per run."""

    config: ExperimentConfig
    policy: Policy
    optimizer: OptimizerState
    buffer: ReplayBuffer
    rng: np.random.Generator
    iteration: int = 0
    env_steps: int = 0
    episodes: int = 0

    @property
    def budget_left(self) -> bool:
        return self.env_steps < self.config.total_env_steps

    def snapshot(self, include_buffer: bool = True) -> Checkpoint:
        """Checkpoint of the current state, detached from further training."""
        buffer = None
        if include_buffer:
            buffer = ReplayBuffer(self.buffer.capacity)
            for episode in self.buffer:
                buffer.push(episode)
        return Checkpoint(
            config=self.config,
            net=self.policy.net.copy(),
            optimizer=copy.deepcopy(self.optimizer),
            rng_state=copy.deepcopy(self.rng.bit_generator.state),
            iteration=self.iteration,
            env_steps=self.env_steps,
            episodes=self.episodes,
            buffer=buffer,
        )


def new_training_state(config: ExperimentConfig) -> TrainingState:
    """Fresh state: the seed's random stream first initializes the network."""
    rng = np.random.default_rng(config.seed)
    policy = build_policy(config.env_kind, config.hidden_width, rng, config.obs_activation)
    optimizer = make_optimizer(config.optimizer, config.step_size, policy.net.parameters())
    return TrainingState(
        config=config,
        policy=policy,
        optimizer=optimizer,
        buffer=ReplayBuffer(config.buffer_capacity),
        rng=rng,
    )


def restore_training_state(config: ExperimentConfig, checkpoint: Checkpoint) -> TrainingState:
    """
    State to continue training from a checkpoint.

    The config may extend the budget but must target the same environment.

    Raises:
        CheckpointError: If the checkpoint has no buffer or another environment
    """
    checkpoint.require_env(config.env_kind)
    if checkpoint.buffer is None:
        raise CheckpointError("checkpoint was saved without its replay buffer; cannot resume")
    restored = copy.deepcopy(checkpoint)
    return TrainingState(
        config=config,
        policy=restored.policy(),
        optimizer=restored.optimizer,
        buffer=restored.buffer,
        rng=restored.make_rng(),
        iteration=restored.iteration,
        env_steps=restored.env_steps,
        episodes=restored.episodes,
    )


@dataclass
class TrainingResult:
    """Final state of a train() call plus the records it produced."""

    state: TrainingState
    metrics: List[MetricsRecord] = field(default_factory=list)

    @property
    def finished(self) -> bool:
        return not self.state.budget_left

    def checkpoint(self, include_buffer: bool = True) -> Checkpoint:
        return self.state.snapshot(include_buffer)


def collect_episodes(
    state: TrainingState,
    actor: Actor,
    count: int,
    command_source: Callable[[], Command],
) -> List[float]:
    """
    Roll out up to count episodes into the buffer, stopping once the budget is spent.

    The last episode always runs to completion, so the budget may be
    overshot by at most one episode.

    Returns:
        Total return of each collected episode
    """
    env = make_env(state.config.env_kind)
    returns = []
    for _ in range(count):
        if not state.budget_left:
            break
        episode = rollout(env, actor, command_source(), state.rng)
        state.buffer.push(episode)
        state.env_steps += len(episode)
        state.episodes += 1
        returns.append(episode.total_return)
    return returns


def warm_up(state: TrainingState) -> List[float]:
    """Fill the empty buffer with uniformly random-action episodes."""
    kind = state.config.env_kind
    actor = UniformRandomPolicy(state.policy.action_count)
    returns = collect_episodes(
        state, actor, state.config.episodes_per_iteration, lambda: default_command(kind)
    )
    logger.debug("Warm-up collected %d random episodes", len(returns))
    return returns


def train_iteration(state: TrainingState) -> MetricsRecord:
    """
    One iteration: collect exploratory episodes, then train.

    Every batch samples batch_size segments and takes one gradient step per
    permutation, identity pairing first.
    """
    config = state.config
    returns = collect_episodes(
        state,
        exploration_actor(state.policy, config.random_action_prob),
        config.episodes_per_iteration,
        lambda: exploratory_command(state.buffer, state.rng, config.best_k, config.env_kind),
    )

    losses = []
    label_counts = dict.fromkeys(MORETHAN_VALUES, 0)
    for _ in range(config.batches_per_iteration):
        segments = sample_segments(state.buffer, config.batch_size, state.rng)
        for perm in training_permutations(
            config.batch_size, config.permutations_per_batch, state.rng
        ):
            batch = make_training_batch(segments, perm)
            encoded = encode_commands(
                config.env_kind, batch.desired, batch.horizons, batch.morethan
            )
            losses.append(
                train_step(
                    state.policy.net,
                    batch.observations,
                    encoded,
                    batch.target_actions,
                    state.optimizer,
                )
            )
            for m, count in m_label_histogram(batch).items():
                label_counts[m] += count

    state.iteration += 1
    total_labels = sum(label_counts.values())
    record = MetricsRecord(
        iteration=state.iteration,
        env_steps_so_far=state.env_steps,
        episodes_so_far=state.episodes,
        mean_recent_return=float(np.mean(returns)) if returns else 0.0,
        mean_batch_loss=float(np.mean(losses)),
        m_label_frequencies=[label_counts[m] / total_labels for m in MORETHAN_VALUES],
    )
    logger.debug(
        "Iteration %d: steps=%d return=%.3f loss=%.4f",
        record.iteration,
        record.env_steps_so_far,
        record.mean_recent_return,
        record.mean_batch_loss,
    )
    return record


def train(
    config: ExperimentConfig,
    resume: Optional[Checkpoint] = None,
    max_iterations: Optional[int] = None,
    on_record: Optional[Callable[[MetricsRecord], None]] = None,
) -> TrainingResult:
    """
    Train a command-conditioned policy until total_env_steps are collected.

    Args:
        config: Validated experiment configuration
        resume: Checkpoint to continue from (must include its buffer)
        max_iterations: Pause once this many iterations have completed in total
        on_record: Called with each MetricsRecord as soon as it is produced

    Returns:
        TrainingResult with the final state and this call's metrics

    Example:
        result = train(PRESETS["bandit-paper"])
        save_checkpoint(result.checkpoint(), "runs/checkpoint.txt")
    """
    config.validate()
    state = new_training_state(config) if resume is None else restore_training_state(config, resume)
    result = TrainingResult(state)

    if state.episodes == 0:
        warm_up(state)

    while state.budget_left:
        if max_iterations is not None and state.iteration >= max_iterations:
            logger.info("Pausing at iteration %d", state.iteration)
            break
        record = train_iteration(state)
        result.metrics.append(record)
        if on_record is not None:
            on_record(record)

    logger.info(
        "Training stopped after %d iterations, %d env steps, %d episodes",
        state.iteration,
        state.env_steps,
        state.episodes,
    )
    return result


def write_metrics(
    records: List[MetricsRecord], path: Union[str, Path], append: bool = False
) -> Path:
    """Write records as JSON lines."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "a" if append else "w", encoding="utf-8") as f:
        for record in records:
            f.write(record.to_json() + "\n")
    return out


def read_metrics(path: Union[str, Path]) -> List[MetricsRecord]:
    """Parse a metrics.jsonl file."""
    with open(path, "r", encoding="utf-8") as f:
        return [MetricsRecord.from_json(line) for line in f if line.strip()]


def run_training(
    config: ExperimentConfig,
    resume: Optional[Checkpoint] = None,
    max_iterations: Optional[int] = None,
    on_record: Optional[Callable[[MetricsRecord], None]] = None,
) -> TrainingResult:
    """
    train() with its artifacts written under config.output_dir.

    metrics.jsonl is streamed record by record (appended to when resuming)
    and checkpoint.txt holds the final state, buffer included.
    """
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = out_dir / METRICS_FILENAME

    with open(metrics_path, "a" if resume is not None else "w", encoding="utf-8") as f:

        def stream(record: MetricsRecord) -> None:
            f.write(record.to_json() + "\n")
            f.flush()
            if on_record is not None:
                on_record(record)

        result = train(config, resume=resume, max_iterations=max_iterations, on_record=stream)

    save_checkpoint(result.checkpoint(), out_dir / CHECKPOINT_FILENAME)
    return result
