"""Pytest configuration and fixtures for morethan tests."""

import tempfile

import numpy as np
import pytest

from morethan import (
    ArchTag,
    EnvKind,
    Episode,
    ExperimentConfig,
    OptimizerKind,
    ReplayBuffer,
    build_policy_net,
)


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield tmpdir


@pytest.fixture
def rng():
    """Provide a seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_bandit_config(temp_dir):
    """Provide a short bandit run (200 one-step episodes)."""
    return ExperimentConfig(
        env_kind=EnvKind.BANDIT,
        total_env_steps=200,
        buffer_capacity=100,
        episodes_per_iteration=16,
        batches_per_iteration=4,
        batch_size=16,
        permutations_per_batch=2,
        optimizer=OptimizerKind.SGD,
        step_size=0.01,
        seed=7,
        output_dir=temp_dir,
    )


@pytest.fixture
def tiny_cartpole_config(temp_dir):
    """Provide a short CartPole run with a small network."""
    return ExperimentConfig(
        env_kind=EnvKind.CARTPOLE,
        total_env_steps=300,
        buffer_capacity=None,
        episodes_per_iteration=5,
        batches_per_iteration=2,
        batch_size=32,
        permutations_per_batch=3,
        optimizer=OptimizerKind.ADAM,
        step_size=0.001,
        hidden_width=16,
        seed=3,
        output_dir=temp_dir,
        eval_episodes_per_cell=1,
    )


@pytest.fixture
def plain_net(rng):
    """Provide a bandit-shaped plain MLP."""
    return build_policy_net(ArchTag.PLAIN_MLP, 0, 10, 32, 6, rng)


@pytest.fixture
def gated_net(rng):
    """Provide a CartPole-shaped gated network."""
    return build_policy_net(ArchTag.GATED, 4, 5, 32, 2, rng)


@pytest.fixture
def short_episode():
    """Provide a three-step episode with rewards 1, 2, 3."""
    observations = np.arange(12, dtype=np.float64).reshape(3, 4)
    return Episode(observations, [0, 1, 0], [1.0, 2.0, 3.0])


@pytest.fixture
def bandit_buffer():
    """Provide a bandit buffer holding one episode per arm."""
    buffer = ReplayBuffer(capacity=100)
    for arm in range(1, 7):
        buffer.push(Episode(np.zeros((1, 0)), [arm - 1], [float(arm)]))
    return buffer
