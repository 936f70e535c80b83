"""
Command handling and acting for the command-conditioned worker.

This module covers command encoding, the command-conditioned policy,
per-step command bookkeeping while acting, and the exploratory commands the
manager issues when collecting new episodes.
"""

import logging
from typing import Optional, Protocol

import numpy as np

from .nn_core import GatedPolicyNet, build_policy_net, forward, softmax
from .replay import ReplayBuffer
from .types import (
    ACTION_COUNTS,
    MORETHAN_VALUES,
    OBSERVATION_WIDTHS,
    STEP_CAPS,
    Activation,
    ArchTag,
    Command,
    DimensionError,
    EnvKind,
)

logger = logging.getLogger(__name__)

# Bandit desire slots cover d = 0..6.
BANDIT_DESIRE_BINS = 7
BANDIT_MAX_DESIRE = BANDIT_DESIRE_BINS - 1

CARTPOLE_DESIRE_SCALE = 0.02
CARTPOLE_HORIZON_SCALE = 0.01

COMMAND_WIDTHS = {
    EnvKind.BANDIT: BANDIT_DESIRE_BINS + len(MORETHAN_VALUES),
    EnvKind.CARTPOLE: 2 + len(MORETHAN_VALUES),
}

ARCHITECTURES = {EnvKind.BANDIT: ArchTag.PLAIN_MLP, EnvKind.CARTPOLE: ArchTag.GATED}


def clip_bandit_desire(desired: float) -> int:
    """Round a desired return to the nearest bandit slot in 0..6."""
    return int(np.clip(np.rint(desired), 0, BANDIT_MAX_DESIRE))


def encode_commands(
    env_kind: EnvKind, desired: np.ndarray, horizons: np.ndarray, morethan: np.ndarray
) -> np.ndarray:
    """
    Encode a batch of commands column-wise.

    Bandit rows are one-hot(d over 0..6) followed by one-hot(m); the horizon
    is omitted. CartPole rows are [d * 0.02, h * 0.01] followed by one-hot(m).
    The m slots are ordered (-1, 0, +1).

    Returns:
        Matrix (batch, COMMAND_WIDTHS[env_kind])
    """
    desired = np.asarray(desired, dtype=np.float64).reshape(-1)
    horizons = np.asarray(horizons, dtype=np.float64).reshape(-1)
    morethan = np.asarray(morethan, dtype=np.int64).reshape(-1)
    batch = len(desired)
    rows = np.arange(batch)

    encoded = np.zeros((batch, COMMAND_WIDTHS[env_kind]))
    if env_kind is EnvKind.BANDIT:
        slots = np.clip(np.rint(desired), 0, BANDIT_MAX_DESIRE).astype(np.int64)
        encoded[rows, slots] = 1.0
        offset = BANDIT_DESIRE_BINS
    else:
        encoded[:, 0] = desired * CARTPOLE_DESIRE_SCALE
        encoded[:, 1] = horizons * CARTPOLE_HORIZON_SCALE
        offset = 2
    encoded[rows, offset + morethan + 1] = 1.0
    return encoded


def encode_command(env_kind: EnvKind, cmd: Command) -> np.ndarray:
    """
    Encode a single command.

    Example:
        encode_command(EnvKind.BANDIT, Command(3, 1, 1))
        # -> [0, 0, 0, 1, 0, 0, 0, 0, 0, 1]
    """
    return encode_commands(env_kind, [cmd.desired], [cmd.horizon], [cmd.morethan])[0]


def decode_command(env_kind: EnvKind, encoded: np.ndarray) -> Command:
    """
    Invert encode_command.

    Bandit decoding yields the clipped integer desire and horizon 1.
    """
    encoded = np.asarray(encoded, dtype=np.float64)
    if encoded.shape != (COMMAND_WIDTHS[env_kind],):
        raise DimensionError(f"expected a {COMMAND_WIDTHS[env_kind]}-wide command encoding")
    if env_kind is EnvKind.BANDIT:
        desired = float(np.argmax(encoded[:BANDIT_DESIRE_BINS]))
        horizon = 1
        m_slots = encoded[BANDIT_DESIRE_BINS:]
    else:
        desired = float(encoded[0] / CARTPOLE_DESIRE_SCALE)
        horizon = max(1, int(round(encoded[1] / CARTPOLE_HORIZON_SCALE)))
        m_slots = encoded[2:]
    return Command(desired, horizon, MORETHAN_VALUES[int(np.argmax(m_slots))])


class Actor(Protocol):
    """Anything that picks an action for an observation under a command."""

    action_count: int

    def act(self, observation: np.ndarray, cmd: Command, rng: np.random.Generator) -> int: ...


class Policy:
    """
    Command-conditioned categorical policy.

    Attributes:
        net: Policy network producing action logits
        env_kind: Environment whose command encoding the network expects
    """

    def __init__(self, net: GatedPolicyNet, env_kind: EnvKind):
        if net.command_width != COMMAND_WIDTHS[env_kind]:
            raise DimensionError(
                f"network takes {net.command_width}-wide commands, "
                f"{env_kind.value} encodes {COMMAND_WIDTHS[env_kind]}"
            )
        self.net = net
        self.env_kind = env_kind

    @property
    def action_count(self) -> int:
        return self.net.action_count

    def probabilities(self, observation: Optional[np.ndarray], cmd: Command) -> np.ndarray:
        """pi(s, .) under a command."""
        logits, _ = forward(self.net, observation, encode_command(self.env_kind, cmd))
        return softmax(logits)

    def act(
        self,
        observation: Optional[np.ndarray],
        cmd: Command,
        rng: np.random.Generator,
        greedy: bool = False,
    ) -> int:
        """Sample an action; greedy=True returns the argmax instead (debugging only)."""
        probs = self.probabilities(observation, cmd)
        if greedy:
            return int(np.argmax(probs))
        return int(rng.choice(len(probs), p=probs))


class UniformRandomPolicy:
    """Ignores observation and command; picks actions uniformly."""

    def __init__(self, action_count: int):
        self.action_count = action_count

    def act(
        self,
        observation: Optional[np.ndarray],
        cmd: Command,
        rng: np.random.Generator,
        greedy: bool = False,
    ) -> int:
        return int(rng.integers(0, self.action_count))


class RandomActionMixture:
    """
    Exploration actor: each step is uniformly random with probability
    random_action_prob, otherwise the wrapped actor's choice.

    Every step first draws one uniform number from the run's stream to pick
    the branch.
    """

    def __init__(self, actor: Actor, random_action_prob: float):
        if not 0.0 <= random_action_prob <= 1.0:
            raise ValueError(f"random_action_prob must be in [0, 1], got {random_action_prob}")
        self.actor = actor
        self.random_action_prob = random_action_prob

    @property
    def action_count(self) -> int:
        return self.actor.action_count

    def act(
        self,
        observation: Optional[np.ndarray],
        cmd: Command,
        rng: np.random.Generator,
        greedy: bool = False,
    ) -> int:
        if rng.random() < self.random_action_prob:
            return int(rng.integers(0, self.action_count))
        return self.actor.act(observation, cmd, rng)


def exploration_actor(policy: Policy, random_action_prob: float) -> Actor:
    """The policy itself when random_action_prob is 0, else a RandomActionMixture."""
    if random_action_prob == 0.0:
        return policy
    return RandomActionMixture(policy, random_action_prob)


def build_policy(
    env_kind: EnvKind,
    hidden_width: int,
    rng: np.random.Generator,
    obs_activation: Optional[Activation] = None,
) -> Policy:
    """
    Build a freshly initialized policy for an environment.

    Bandit: plain MLP over the one-hot command (ReLU hidden layer).
    CartPole: gated network, tanh observation pathway, sigmoid command gate.
    """
    net = build_policy_net(
        ARCHITECTURES[env_kind],
        observation_width=OBSERVATION_WIDTHS[env_kind],
        command_width=COMMAND_WIDTHS[env_kind],
        hidden_width=hidden_width,
        action_count=ACTION_COUNTS[env_kind],
        rng=rng,
        obs_activation=obs_activation,
    )
    return Policy(net, env_kind)


def act(
    policy: Actor,
    observation: Optional[np.ndarray],
    cmd: Command,
    rng: np.random.Generator,
    greedy: bool = False,
) -> int:
    """Pick an action with policy under cmd."""
    return policy.act(observation, cmd, rng, greedy=greedy)


def update_command(cmd: Command, reward: float) -> Command:
    """
    Command bookkeeping after one step.

    The collected reward is subtracted from d, the horizon shrinks by one
    (never below 1), m is unchanged.
    """
    return Command(
        desired=cmd.desired - reward,
        horizon=max(1, cmd.horizon - 1),
        morethan=cmd.morethan,
    )


def default_command(env_kind: EnvKind) -> Command:
    """Exploratory command used before the buffer holds enough episodes."""
    if env_kind is EnvKind.BANDIT:
        return Command(desired=0.0, horizon=1, morethan=1)
    return Command(desired=1.0, horizon=STEP_CAPS[env_kind], morethan=1)


def exploratory_command(
    buffer: ReplayBuffer, rng: np.random.Generator, best_k: int, env_kind: EnvKind
) -> Command:
    """
    Command for collecting a new episode.

    Takes the best_k highest-return episodes in the buffer; with M and S
    their mean and population standard deviation, d ~ Uniform(M, M + S) and
    h is their rounded mean length. m is always +1. Bandit desires are
    rounded and clipped to 0..6 and the bandit horizon is always 1.

    Args:
        buffer: Replay buffer
        rng: Random source
        best_k: Number of top episodes to summarize
        env_kind: Environment the command is for

    Returns:
        The default command when the buffer has fewer than best_k episodes
    """
    if len(buffer) < best_k:
        return default_command(env_kind)

    returns = buffer.returns()
    lengths = buffer.lengths()
    best = np.argsort(-returns, kind="stable")[:best_k]
    mean = float(np.mean(returns[best]))
    spread = float(np.std(returns[best]))
    desired = float(rng.uniform(mean, mean + spread))

    if env_kind is EnvKind.BANDIT:
        return Command(desired=float(clip_bandit_desire(desired)), horizon=1, morethan=1)
    horizon = max(1, int(np.rint(np.mean(lengths[best]))))
    return Command(desired=desired, horizon=horizon, morethan=1)
