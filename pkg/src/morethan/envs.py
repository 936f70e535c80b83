"""
Experimental environments behind a uniform episodic interface.

- BanditEnv: six arms, pulling arm i pays exactly i, every episode is one pull
- CartPoleEnv: classic cart-pole with Euler integration, 200-step cap

Both expose reset(rng) -> observation and step(action) -> StepResult, and
rollout() runs a command-conditioned actor through either of them.
"""

import logging
import math
from enum import IntEnum
from typing import NamedTuple, Optional, Protocol, Tuple

import numpy as np

from .agent import Actor, update_command
from .replay import Episode
from .types import (
    ACTION_COUNTS,
    OBSERVATION_WIDTHS,
    STEP_CAPS,
    Command,
    EnvironmentStateError,
    EnvKind,
    StepResult,
)

logger = logging.getLogger(__name__)

# CartPole physics
GRAVITY = 9.8
CART_MASS = 1.0
POLE_MASS = 0.1
TOTAL_MASS = CART_MASS + POLE_MASS
POLE_HALF_LENGTH = 0.5
POLE_MASS_LENGTH = POLE_MASS * POLE_HALF_LENGTH
FORCE_MAG = 10.0
TAU = 0.02

X_THRESHOLD = 2.4
THETA_THRESHOLD = 12 * 2 * math.pi / 360
RESET_BOUND = 0.05


class CartPoleAction(IntEnum):
    """Push direction."""

    LEFT = 0
    RIGHT = 1


class CartPoleState(NamedTuple):
    """Cart-pole state (meters, m/s, radians, rad/s)."""

    cart_position: float
    cart_velocity: float
    pole_angle: float
    pole_angular_velocity: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=np.float64)


def is_terminal(state: CartPoleState) -> bool:
    """Cart off the track or pole past 12 degrees."""
    return abs(state.cart_position) > X_THRESHOLD or abs(state.pole_angle) > THETA_THRESHOLD


def cartpole_reset(rng: np.random.Generator) -> CartPoleState:
    """Each component drawn independently from Uniform(-0.05, 0.05)."""
    return CartPoleState(*(float(v) for v in rng.uniform(-RESET_BOUND, RESET_BOUND, size=4)))


def cartpole_step(
    state: CartPoleState, action: int, force_mag: float = FORCE_MAG
) -> Tuple[CartPoleState, StepResult]:
    """
    Advance the cart-pole one Euler step of TAU seconds.

    Positions are updated with the old velocities, velocities with the
    accelerations evaluated at the old state.

    Args:
        state: Current, non-terminal state
        action: CartPoleAction.LEFT or CartPoleAction.RIGHT
        force_mag: Magnitude of the applied force in newtons

    Returns:
        Tuple of (next state, StepResult with reward 1.0)

    Raises:
        EnvironmentStateError: If state is already terminal
        ValueError: If action is not 0 or 1
    """
    if is_terminal(state):
        raise EnvironmentStateError("cannot step a terminal cart-pole state")
    if action not in (CartPoleAction.LEFT, CartPoleAction.RIGHT):
        raise ValueError(f"cart-pole action must be 0 or 1, got {action}")

    x, x_dot, theta, theta_dot = state
    force = force_mag if action == CartPoleAction.RIGHT else -force_mag
    cos_theta = math.cos(theta)
    sin_theta = math.sin(theta)

    temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sin_theta) / TOTAL_MASS
    theta_acc = (GRAVITY * sin_theta - cos_theta * temp) / (
        POLE_HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos_theta * cos_theta / TOTAL_MASS)
    )
    x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos_theta / TOTAL_MASS

    next_state = CartPoleState(
        cart_position=x + TAU * x_dot,
        cart_velocity=x_dot + TAU * x_acc,
        pole_angle=theta + TAU * theta_dot,
        pole_angular_velocity=theta_dot + TAU * theta_acc,
    )
    result = StepResult(
        observation=next_state.as_array(),
        reward=1.0,
        terminal=is_terminal(next_state),
    )
    return next_state, result


class Environment(Protocol):
    """Uniform episodic stepping interface."""

    kind: EnvKind
    action_count: int
    observation_width: int
    step_cap: int

    def reset(self, rng: np.random.Generator) -> np.ndarray: ...

    def step(self, action: int) -> StepResult: ...


class BanditEnv:
    """
    Deterministic multi-armed bandit.

    Arms are 1-indexed externally (pull) and 0-indexed as actions (step).
    """

    kind = EnvKind.BANDIT

    def __init__(self, arm_count: int = ACTION_COUNTS[EnvKind.BANDIT]):
        if arm_count < 1:
            raise ValueError(f"arm_count must be positive, got {arm_count}")
        self.arm_count = arm_count
        self.action_count = arm_count
        self.observation_width = OBSERVATION_WIDTHS[EnvKind.BANDIT]
        self.step_cap = STEP_CAPS[EnvKind.BANDIT]

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        return np.zeros(0)

    def pull(self, arm: int) -> StepResult:
        """
        Pull arm (1..arm_count); the reward is the arm number.

        Raises:
            ValueError: If arm is out of range
        """
        if not 1 <= arm <= self.arm_count:
            raise ValueError(f"arm must be in 1..{self.arm_count}, got {arm}")
        return StepResult(observation=np.zeros(0), reward=float(arm), terminal=True)

    def step(self, action: int) -> StepResult:
        return self.pull(int(action) + 1)


def bandit_step(arm: int) -> StepResult:
    """Pull a 1-indexed arm of the six-armed bandit."""
    return BanditEnv().pull(arm)


class CartPoleEnv:
    """Stateful wrapper around cartpole_reset / cartpole_step."""

    kind = EnvKind.CARTPOLE

    def __init__(self):
        self.action_count = ACTION_COUNTS[EnvKind.CARTPOLE]
        self.observation_width = OBSERVATION_WIDTHS[EnvKind.CARTPOLE]
        self.step_cap = STEP_CAPS[EnvKind.CARTPOLE]
        self.state: Optional[CartPoleState] = None

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self.state = cartpole_reset(rng)
        return self.state.as_array()

    def step(self, action: int) -> StepResult:
        if self.state is None:
            raise EnvironmentStateError("reset() must be called before step()")
        self.state, result = cartpole_step(self.state, int(action))
        return result


def make_env(kind: EnvKind) -> Environment:
    """Instantiate the environment for kind."""
    if kind is EnvKind.BANDIT:
        return BanditEnv()
    return CartPoleEnv()


def rollout(
    env: Environment,
    policy: Actor,
    initial_command: Command,
    rng: np.random.Generator,
    step_cap: Optional[int] = None,
) -> Episode:
    """
    Run one episode, updating the command after every step.

    Args:
        env: Environment to act in
        policy: Actor with the same action count as env
        initial_command: Command at the first step
        rng: Random source for reset and action sampling
        step_cap: Maximum episode length (default env.step_cap)

    Returns:
        The recorded Episode
    """
    if policy.action_count != env.action_count:
        raise ValueError(
            f"policy has {policy.action_count} actions, environment has {env.action_count}"
        )
    cap = step_cap if step_cap is not None else env.step_cap

    observation = env.reset(rng)
    cmd = initial_command
    steps = []
    for _ in range(cap):
        action = policy.act(observation, cmd, rng)
        result = env.step(action)
        steps.append((observation, action, result.reward))
        cmd = update_command(cmd, result.reward)
        observation = result.observation
        if result.terminal:
            break
    return Episode.from_steps(steps)
