"""
Evaluation protocols for trained command-conditioned policies.

- evaluate_bandit: exact action probabilities over the (d, m) command grid
- evaluate_cartpole: observed returns when acting under a (d, 200, m) command
"""

from typing import List, Sequence

import numpy as np

from .agent import BANDIT_DESIRE_BINS, Actor, Policy, UniformRandomPolicy, encode_commands
from .envs import CartPoleEnv, rollout
from .nn_core import forward, softmax
from .types import MORETHAN_VALUES, OBSERVATION_WIDTHS, STEP_CAPS, Command, EnvKind

BANDIT_DESIRE_GRID: Sequence[int] = tuple(range(BANDIT_DESIRE_BINS))
CARTPOLE_DESIRE_GRID: Sequence[int] = tuple(range(10, 201, 10))
CARTPOLE_EPISODES_PER_CELL = 10


def evaluate_bandit(policy: Policy) -> np.ndarray:
    """
    Action probabilities for every bandit command on the grid.

    Returns:
        Array (7, 3, arms): entry [d, j, a] is pi(a | d, MORETHAN_VALUES[j]).
        Rows are exact softmax outputs, no sampling.
    """
    if policy.env_kind is not EnvKind.BANDIT:
        raise ValueError("evaluate_bandit needs a bandit policy")
    desired, morethan = np.meshgrid(BANDIT_DESIRE_GRID, MORETHAN_VALUES, indexing="ij")
    encoded = encode_commands(
        EnvKind.BANDIT, desired.ravel(), np.ones(desired.size), morethan.ravel()
    )
    observations = np.zeros((desired.size, OBSERVATION_WIDTHS[EnvKind.BANDIT]))
    logits, _ = forward(policy.net, observations, encoded)
    probs = softmax(logits)
    return probs.reshape(len(BANDIT_DESIRE_GRID), len(MORETHAN_VALUES), policy.action_count)


def evaluate_cartpole(
    policy: Actor,
    desired: float,
    morethan: int,
    episodes_per_cell: int,
    rng: np.random.Generator,
) -> List[float]:
    """
    Observed returns when acting under the command (desired, 200, morethan).

    Actions are sampled and the command is updated after every step.

    Args:
        policy: CartPole policy (or any actor with two actions)
        desired: Initial desired return, >= 0
        morethan: -1, 0 or +1
        episodes_per_cell: Number of rollouts
        rng: Random source for resets and action sampling

    Returns:
        One observed return per episode
    """
    if desired < 0:
        raise ValueError(f"desired return must be non-negative, got {desired}")
    env = CartPoleEnv()
    command = Command(float(desired), STEP_CAPS[EnvKind.CARTPOLE], morethan)
    return [
        rollout(env, policy, command, rng).total_return for _ in range(episodes_per_cell)
    ]


def random_play_returns(episodes: int, rng: np.random.Generator) -> List[float]:
    """CartPole returns of a uniformly random policy, the baseline band for evaluation."""
    return evaluate_cartpole(UniformRandomPolicy(2), 0.0, 0, episodes, rng)
