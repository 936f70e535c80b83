"""
Episode storage and permutation-paired hindsight relabeling.

Episodes are stored in a FIFO replay buffer. Training segments are suffixes
of stored episodes; pairs of segments are turned into morethan-labeled
training samples: the *anchor* contributes the desired value d, the
*achiever* contributes observation, action and horizon, and the morethan
digit records how the achiever's return-to-go compares with d.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .types import MORETHAN_VALUES, ReplayError

logger = logging.getLogger(__name__)


def _as_rows(values, n: int) -> np.ndarray:
    """Stack values into an (n, width) float matrix; width may be 0."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return np.zeros((n, 0))
    return values.reshape(n, -1)


@dataclass
class Episode:
    """
    A complete rollout trace.

    Attributes:
        observations: Matrix (length, observation_width); width 0 for the bandit
        actions: Action index per step (0-indexed)
        rewards: Reward per step
        returns_to_go: Sum of rewards from each step to the end (derived)
        total_return: returns_to_go[0] (derived)
    """

    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    returns_to_go: np.ndarray = field(init=False, repr=False)
    total_return: float = field(init=False)

    def __post_init__(self):
        self.rewards = np.asarray(self.rewards, dtype=np.float64).reshape(-1)
        self.actions = np.asarray(self.actions, dtype=np.int64).reshape(-1)
        observations = np.asarray(self.observations, dtype=np.float64)
        if observations.ndim != 2:
            observations = _as_rows(observations, len(self.rewards))
        self.observations = observations

        if len(self.rewards) < 1:
            raise ReplayError("episode must contain at least one step")
        if not len(self.actions) == len(self.rewards) == self.observations.shape[0]:
            raise ReplayError(
                f"episode arrays disagree: {self.observations.shape[0]} observations, "
                f"{len(self.actions)} actions, {len(self.rewards)} rewards"
            )
        self.returns_to_go = np.cumsum(self.rewards[::-1])[::-1].copy()
        self.total_return = float(self.returns_to_go[0])

    @classmethod
    def from_steps(cls, steps: Sequence[Tuple[np.ndarray, int, float]]) -> "Episode":
        """
        Build an episode from (observation, action, reward) triples.

        Raises:
            ReplayError: If steps is empty
        """
        if not steps:
            raise ReplayError("episode must contain at least one step")
        observations = _as_rows([obs for obs, _, _ in steps], len(steps))
        actions = [action for _, action, _ in steps]
        rewards = [reward for _, _, reward in steps]
        return cls(observations, actions, rewards)

    def __len__(self) -> int:
        return len(self.rewards)

    @property
    def steps(self) -> List[Tuple[np.ndarray, int, float]]:
        """The episode as (observation, action, reward) triples."""
        return [
            (self.observations[t], int(self.actions[t]), float(self.rewards[t]))
            for t in range(len(self))
        ]


@dataclass
class Segment:
    """
    Suffix view of an episode starting at step t.

    Attributes:
        observation: State at t
        action: Action taken at t
        horizon: Remaining steps (length - t), >= 1
        return_to_go: Sum of rewards from t through the end
    """

    observation: np.ndarray
    action: int
    horizon: int
    return_to_go: float


@dataclass
class TrainingSample:
    """
    One hindsight-relabeled training example.

    The relation m = sign(achieved - desired) holds by construction.

    Attributes:
        observation: Achiever's observation
        desired: d, taken from the anchor's return-to-go
        horizon: h, the achiever's remaining horizon
        morethan: m in {-1, 0, +1}
        target_action: Achiever's action
    """

    observation: np.ndarray
    desired: float
    horizon: int
    morethan: int
    target_action: int


@dataclass
class SegmentBatch:
    """Column-wise storage of segments; indexing yields Segment objects."""

    observations: np.ndarray
    actions: np.ndarray
    horizons: np.ndarray
    returns_to_go: np.ndarray

    @classmethod
    def from_segments(cls, segments: Sequence[Segment]) -> "SegmentBatch":
        if not segments:
            raise ReplayError("cannot build an empty segment batch")
        return cls(
            observations=_as_rows([s.observation for s in segments], len(segments)),
            actions=np.array([s.action for s in segments], dtype=np.int64),
            horizons=np.array([s.horizon for s in segments], dtype=np.int64),
            returns_to_go=np.array([s.return_to_go for s in segments], dtype=np.float64),
        )

    def __len__(self) -> int:
        return len(self.actions)

    def __getitem__(self, i: int) -> Segment:
        return Segment(
            observation=self.observations[i],
            action=int(self.actions[i]),
            horizon=int(self.horizons[i]),
            return_to_go=float(self.returns_to_go[i]),
        )

    def __iter__(self) -> Iterator[Segment]:
        return (self[i] for i in range(len(self)))


@dataclass
class TrainingBatch:
    """Column-wise storage of training samples; indexing yields TrainingSample objects."""

    observations: np.ndarray
    desired: np.ndarray
    horizons: np.ndarray
    morethan: np.ndarray
    target_actions: np.ndarray

    def __len__(self) -> int:
        return len(self.target_actions)

    def __getitem__(self, i: int) -> TrainingSample:
        return TrainingSample(
            observation=self.observations[i],
            desired=float(self.desired[i]),
            horizon=int(self.horizons[i]),
            morethan=int(self.morethan[i]),
            target_action=int(self.target_actions[i]),
        )

    def __iter__(self) -> Iterator[TrainingSample]:
        return (self[i] for i in range(len(self)))


class ReplayBuffer:
    """
    FIFO store of episodes.

    A bounded buffer evicts its oldest episode when a push exceeds the
    capacity; capacity None means unbounded. A flattened view of all stored
    steps is rebuilt lazily after pushes so segment sampling is vectorized.

    Example:
        buffer = ReplayBuffer(capacity=100)
        buffer.push(episode)
        segments = sample_segments(buffer, 16, rng)
    """

    def __init__(self, capacity: Optional[int] = None):
        """
        Initialize an empty buffer.

        Args:
            capacity: Maximum number of episodes, or None for unbounded
        """
        if capacity is not None and capacity < 1:
            raise ReplayError(f"capacity must be positive or None, got {capacity}")
        self.capacity = capacity
        self._episodes: deque = deque(maxlen=capacity)
        self._flat: Optional[Dict[str, np.ndarray]] = None

    def __len__(self) -> int:
        return len(self._episodes)

    def __iter__(self) -> Iterator[Episode]:
        return iter(self._episodes)

    @property
    def episodes(self) -> List[Episode]:
        """Stored episodes, oldest first."""
        return list(self._episodes)

    def push(self, episode: Episode) -> None:
        """
        Append an episode, evicting the oldest one when over capacity.

        Raises:
            ReplayError: If the episode is empty
        """
        if len(episode) < 1:
            raise ReplayError("cannot push an empty episode")
        self._episodes.append(episode)
        self._flat = None

    def returns(self) -> np.ndarray:
        """Total return of each stored episode, oldest first."""
        return np.array([ep.total_return for ep in self._episodes], dtype=np.float64)

    def lengths(self) -> np.ndarray:
        """Length of each stored episode, oldest first."""
        return np.array([len(ep) for ep in self._episodes], dtype=np.int64)

    def flat(self) -> Dict[str, np.ndarray]:
        """Concatenated per-step arrays plus per-episode offsets and lengths."""
        if self._flat is None:
            episodes = self._episodes
            lengths = self.lengths()
            offsets = np.zeros(len(episodes), dtype=np.int64)
            if len(episodes) > 1:
                offsets[1:] = np.cumsum(lengths)[:-1]
            self._flat = {
                "observations": np.concatenate([ep.observations for ep in episodes]),
                "actions": np.concatenate([ep.actions for ep in episodes]),
                "returns_to_go": np.concatenate([ep.returns_to_go for ep in episodes]),
                "offsets": offsets,
                "lengths": lengths,
            }
        return self._flat


def extract_segment(episode: Episode, t: int) -> Segment:
    """
    Suffix view of an episode starting at step t.

    Raises:
        ReplayError: If t is outside [0, length - 1]
    """
    if not 0 <= t < len(episode):
        raise ReplayError(f"segment start {t} out of range for an episode of length {len(episode)}")
    return Segment(
        observation=episode.observations[t],
        action=int(episode.actions[t]),
        horizon=len(episode) - t,
        return_to_go=float(episode.returns_to_go[t]),
    )


def sample_segments(buffer: ReplayBuffer, k: int, rng: np.random.Generator) -> SegmentBatch:
    """
    Sample k segments.

    Episodes are drawn uniformly with replacement; within each drawn episode
    the start index is uniform over [0, length - 1].

    Raises:
        ReplayError: If the buffer is empty or k < 1
    """
    if len(buffer) == 0:
        raise ReplayError("cannot sample from an empty replay buffer")
    if k < 1:
        raise ReplayError(f"segment count must be positive, got {k}")

    flat = buffer.flat()
    episode_index = rng.integers(0, len(buffer), size=k)
    lengths = flat["lengths"][episode_index]
    starts = np.floor(rng.random(k) * lengths).astype(np.int64)
    starts = np.minimum(starts, lengths - 1)
    rows = flat["offsets"][episode_index] + starts
    return SegmentBatch(
        observations=flat["observations"][rows],
        actions=flat["actions"][rows],
        horizons=lengths - starts,
        returns_to_go=flat["returns_to_go"][rows],
    )


def relabel_pair(anchor: Segment, achiever: Segment) -> TrainingSample:
    """
    Turn an (anchor, achiever) pair into a training sample.

    The anchor's return-to-go becomes the desired value; the achiever
    supplies observation, target action and horizon; m is the sign of
    achiever return minus anchor return.
    """
    gap = achiever.return_to_go - anchor.return_to_go
    return TrainingSample(
        observation=achiever.observation,
        desired=anchor.return_to_go,
        horizon=achiever.horizon,
        morethan=int(np.sign(gap)),
        target_action=achiever.action,
    )


def validate_permutation(permutation: Sequence[int], n: int) -> np.ndarray:
    """
    Check that permutation is a bijection on 0..n-1.

    Raises:
        ReplayError: If it is not
    """
    perm = np.asarray(permutation)
    if perm.shape != (n,) or not np.issubdtype(perm.dtype, np.integer):
        raise ReplayError(f"permutation must be {n} integers, got shape {perm.shape}")
    if not np.array_equal(np.sort(perm), np.arange(n)):
        raise ReplayError("permutation is not a bijection")
    return perm.astype(np.int64)


def make_training_batch(
    segments: Union[SegmentBatch, Sequence[Segment]], permutation: Sequence[int]
) -> TrainingBatch:
    """
    Relabel segments[i] (anchor) against segments[permutation[i]] (achiever).

    Args:
        segments: n segments
        permutation: Bijection on 0..n-1

    Returns:
        n training samples, sample i = relabel_pair(segments[i], segments[permutation[i]])

    Raises:
        ReplayError: If permutation is not a bijection
    """
    if not isinstance(segments, SegmentBatch):
        segments = SegmentBatch.from_segments(list(segments))
    perm = validate_permutation(permutation, len(segments))

    achieved = segments.returns_to_go[perm]
    desired = segments.returns_to_go.copy()
    return TrainingBatch(
        observations=segments.observations[perm],
        desired=desired,
        horizons=segments.horizons[perm],
        morethan=np.sign(achieved - desired).astype(np.int64),
        target_actions=segments.actions[perm],
    )


def training_permutations(n: int, count: int, rng: np.random.Generator) -> List[np.ndarray]:
    """Identity first, then count - 1 independent uniform permutations of 0..n-1."""
    perms = [np.arange(n, dtype=np.int64)]
    perms.extend(rng.permutation(n) for _ in range(count - 1))
    return perms


def m_label_histogram(samples: Union[TrainingBatch, Iterable[TrainingSample]]) -> Dict[int, int]:
    """Count samples per morethan value; keys are -1, 0 and +1."""
    if isinstance(samples, TrainingBatch):
        labels = samples.morethan
    else:
        labels = np.array([s.morethan for s in samples], dtype=np.int64)
    return {m: int(np.count_nonzero(labels == m)) for m in MORETHAN_VALUES}
