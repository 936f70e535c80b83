"""
Type definitions shared across the morethan package.

This module contains the enums, small value types and the exception
hierarchy used by the network engine, the environments, the replay buffer,
the agent and the experiment harness.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

# Ordering of the morethan digit everywhere it is laid out as slots/columns.
MORETHAN_VALUES: Tuple[int, int, int] = (-1, 0, 1)


class MorethanError(Exception):
    """Base class for all errors raised by the morethan package."""


class ConfigError(MorethanError):
    """
    Invalid experiment configuration.

    Attributes:
        key: The configuration key at fault
    """

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class DimensionError(MorethanError, ValueError):
    """Vector, matrix or cache shapes disagree with the network layout."""


class EnvironmentStateError(MorethanError):
    """An environment was stepped from a state that does not allow it."""


class ReplayError(MorethanError):
    """Invalid replay buffer or relabeling request."""


class CheckpointError(MorethanError):
    """A checkpoint could not be read or does not fit the request."""


class EnvKind(Enum):
    """
    Experimental environments.

    - BANDIT: deterministic six-armed bandit, single-step episodes
    - CARTPOLE: classic cart-pole balancing, 200-step cap
    """

    BANDIT = "bandit"
    CARTPOLE = "cartpole"


class Activation(Enum):
    """Elementwise activation applied after a dense layer."""

    IDENTITY = "identity"
    RELU = "relu"
    TANH = "tanh"
    SIGMOID = "sigmoid"


class ArchTag(Enum):
    """
    Policy network layouts.

    - PLAIN_MLP: command encoding -> hidden -> logits (no observation input)
    - GATED: tanh(observation pathway) * sigmoid(command pathway) -> logits
    """

    PLAIN_MLP = "plain_mlp"
    GATED = "gated"


class OptimizerKind(Enum):
    """Supported first-order optimizers."""

    SGD = "sgd"
    ADAM = "adam"


@dataclass(frozen=True)
class Command:
    """
    A command issued to the worker.

    Attributes:
        desired: Desired return d (return units, may become negative while acting)
        horizon: Remaining step budget h, never below 1
        morethan: Relation between d and the observed return:
            -1 (less than), 0 (exactly), +1 (greater than)

    Example:
        # "obtain a return greater than 5 within one step"
        cmd = Command(desired=5.0, horizon=1, morethan=1)
    """

    desired: float
    horizon: int
    morethan: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"Command horizon must be >= 1, got {self.horizon}")
        if self.morethan not in MORETHAN_VALUES:
            raise ValueError(f"Command morethan must be -1, 0 or +1, got {self.morethan}")


@dataclass
class StepResult:
    """
    Outcome of one environment step.

    Attributes:
        observation: Observation after the step (empty for the bandit)
        reward: Reward collected by the step
        terminal: Whether the episode ended
    """

    observation: np.ndarray
    reward: float
    terminal: bool


# Per-environment layout constants.
ACTION_COUNTS = {EnvKind.BANDIT: 6, EnvKind.CARTPOLE: 2}
OBSERVATION_WIDTHS = {EnvKind.BANDIT: 0, EnvKind.CARTPOLE: 4}
STEP_CAPS = {EnvKind.BANDIT: 1, EnvKind.CARTPOLE: 200}
