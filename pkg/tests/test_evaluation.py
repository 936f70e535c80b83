"""Tests for morethan.evaluation module."""

import numpy as np
import pytest

from morethan.agent import UniformRandomPolicy, build_policy
from morethan.evaluation import (
    BANDIT_DESIRE_GRID,
    CARTPOLE_DESIRE_GRID,
    evaluate_bandit,
    evaluate_cartpole,
    random_play_returns,
)
from morethan.types import EnvKind


class TestEvaluateBandit:
    """Test evaluate_bandit function."""

    def test_grid_shape_and_rows(self, rng):
        """Test a (7, 3, 6) grid of distributions."""
        grid = evaluate_bandit(build_policy(EnvKind.BANDIT, 32, rng))
        assert grid.shape == (7, 3, 6)
        np.testing.assert_allclose(grid.sum(axis=2), np.ones((7, 3)))
        assert np.all(grid >= 0.0)

    def test_zero_weights_give_uniform_rows(self, rng):
        """Test an all-zero network evaluates to 1/6 everywhere."""
        policy = build_policy(EnvKind.BANDIT, 32, rng)
        for value in policy.net.parameters().values():
            value[...] = 0.0
        np.testing.assert_allclose(evaluate_bandit(policy), np.full((7, 3, 6), 1 / 6))

    def test_is_deterministic(self, rng):
        """Test evaluation involves no sampling."""
        policy = build_policy(EnvKind.BANDIT, 32, rng)
        np.testing.assert_array_equal(evaluate_bandit(policy), evaluate_bandit(policy))

    def test_rejects_cartpole_policy(self, rng):
        """Test a CartPole policy is rejected."""
        with pytest.raises(ValueError):
            evaluate_bandit(build_policy(EnvKind.CARTPOLE, 16, rng))

    def test_grid_constants(self):
        """Test the evaluation grids."""
        assert list(BANDIT_DESIRE_GRID) == list(range(7))
        assert list(CARTPOLE_DESIRE_GRID) == list(range(10, 201, 10))


class TestEvaluateCartPole:
    """Test evaluate_cartpole function."""

    def test_one_return_per_episode(self, rng):
        """Test returns lie in 1..200."""
        policy = build_policy(EnvKind.CARTPOLE, 16, rng)
        returns = evaluate_cartpole(policy, 100.0, 1, 4, rng)
        assert len(returns) == 4
        assert all(1.0 <= r <= 200.0 for r in returns)

    def test_negative_desire_rejected(self, rng):
        """Test d < 0 is rejected."""
        with pytest.raises(ValueError):
            evaluate_cartpole(UniformRandomPolicy(2), -1.0, 0, 1, rng)

    def test_seeded_evaluation_repeats(self):
        """Test equal seeds give equal returns."""
        policy = UniformRandomPolicy(2)
        a = evaluate_cartpole(policy, 50.0, 0, 5, np.random.default_rng(3))
        b = evaluate_cartpole(policy, 50.0, 0, 5, np.random.default_rng(3))
        assert a == b

    def test_random_play_mean(self, rng):
        """Test uniform random play averages between 15 and 35 steps."""
        returns = random_play_returns(2000, rng)
        assert 15.0 <= np.mean(returns) <= 35.0
        assert max(returns) < 200
