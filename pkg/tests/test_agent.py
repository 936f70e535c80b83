"""Tests for morethan.agent module."""

import numpy as np
import pytest

from morethan.agent import (
    COMMAND_WIDTHS,
    Policy,
    RandomActionMixture,
    UniformRandomPolicy,
    act,
    build_policy,
    clip_bandit_desire,
    decode_command,
    default_command,
    encode_command,
    encode_commands,
    exploration_actor,
    exploratory_command,
    update_command,
)
from morethan.replay import Episode, ReplayBuffer
from morethan.types import MORETHAN_VALUES, Command, DimensionError, EnvKind


class TestEncoding:
    """Test command encoding."""

    def test_bandit_example(self):
        """Test (3, 1, +1) encodes to one-hot d=3 and the +1 slot."""
        encoded = encode_command(EnvKind.BANDIT, Command(3.0, 1, 1))
        expected = np.zeros(10)
        expected[3] = 1.0
        expected[9] = 1.0
        np.testing.assert_array_equal(encoded, expected)

    def test_bandit_desire_is_rounded_and_clipped(self):
        """Test d outside 0..6 lands in the edge slots."""
        high = encode_command(EnvKind.BANDIT, Command(9.4, 1, 0))
        low = encode_command(EnvKind.BANDIT, Command(-2.0, 1, 0))
        assert high[6] == 1.0
        assert low[0] == 1.0
        assert clip_bandit_desire(2.6) == 3

    def test_cartpole_scaling(self):
        """Test CartPole rows are [0.02 d, 0.01 h] then one-hot m."""
        encoded = encode_command(EnvKind.CARTPOLE, Command(100.0, 200, -1))
        np.testing.assert_allclose(encoded, [2.0, 2.0, 1.0, 0.0, 0.0])

    def test_m_slot_order(self):
        """Test the m slots are ordered -1, 0, +1 in both encodings."""
        for kind in EnvKind:
            for j, m in enumerate(MORETHAN_VALUES):
                encoded = encode_command(kind, Command(1.0, 1, m))
                slots = encoded[-3:]
                assert slots[j] == 1.0 and slots.sum() == 1.0

    def test_widths(self):
        """Test encoding widths."""
        assert COMMAND_WIDTHS[EnvKind.BANDIT] == 10
        assert COMMAND_WIDTHS[EnvKind.CARTPOLE] == 5

    def test_batch_matches_single(self):
        """Test encode_commands agrees with encode_command row by row."""
        desired = np.array([0.0, 35.0, 180.0])
        horizons = np.array([200, 120, 3])
        morethan = np.array([1, 0, -1])
        batch = encode_commands(EnvKind.CARTPOLE, desired, horizons, morethan)
        for i in range(3):
            row = encode_command(
                EnvKind.CARTPOLE, Command(desired[i], int(horizons[i]), int(morethan[i]))
            )
            np.testing.assert_array_equal(batch[i], row)

    @pytest.mark.parametrize("d", range(7))
    @pytest.mark.parametrize("m", MORETHAN_VALUES)
    def test_bandit_decode_inverts_encode(self, d, m):
        """Test decode_command on the 7 x 3 bandit grid."""
        cmd = Command(float(d), 1, m)
        assert decode_command(EnvKind.BANDIT, encode_command(EnvKind.BANDIT, cmd)) == cmd

    def test_cartpole_decode(self):
        """Test decode_command recovers CartPole commands."""
        cmd = Command(150.0, 137, 1)
        decoded = decode_command(EnvKind.CARTPOLE, encode_command(EnvKind.CARTPOLE, cmd))
        assert decoded.desired == pytest.approx(150.0)
        assert decoded.horizon == 137
        assert decoded.morethan == 1

    def test_decode_wrong_width(self):
        """Test decoding a wrongly sized vector fails."""
        with pytest.raises(DimensionError):
            decode_command(EnvKind.BANDIT, np.zeros(5))


class TestPolicy:
    """Test acting."""

    def test_probabilities_sum_to_one(self, rng):
        """Test pi(s, .) is a distribution."""
        policy = build_policy(EnvKind.CARTPOLE, 16, rng)
        probs = policy.probabilities(np.zeros(4), Command(50.0, 200, 1))
        assert probs.shape == (2,)
        assert probs.sum() == pytest.approx(1.0)

    def test_width_check(self, rng):
        """Test a network of the wrong command width is rejected."""
        policy = build_policy(EnvKind.BANDIT, 8, rng)
        with pytest.raises(DimensionError):
            Policy(policy.net, EnvKind.CARTPOLE)

    def test_sampling_follows_probabilities(self, rng):
        """Test sampled actions follow a concentrated policy."""
        policy = build_policy(EnvKind.BANDIT, 8, rng)
        policy.net.out_layer.bias[:] = [0.0, 0.0, 20.0, 0.0, 0.0, 0.0]
        policy.net.out_layer.weights[...] = 0.0
        actions = [policy.act(None, Command(2.0, 1, 0), rng) for _ in range(50)]
        assert actions == [2] * 50

    def test_sampling_matches_distribution(self, rng):
        """Test 10,000 draws from (0.3, 0.7) pass a chi-square test at the 0.1% level."""
        policy = build_policy(EnvKind.CARTPOLE, 8, rng)
        policy.net.out_layer.weights[...] = 0.0
        policy.net.out_layer.bias[:] = np.log([0.3, 0.7])
        probs = policy.probabilities(np.zeros(4), Command(50.0, 200, 0))
        np.testing.assert_allclose(probs, [0.3, 0.7])

        draws = 10_000
        counts = np.bincount(
            [policy.act(np.zeros(4), Command(50.0, 200, 0), rng) for _ in range(draws)],
            minlength=2,
        )
        expected = draws * np.array([0.3, 0.7])
        chi_square = float(np.sum((counts - expected) ** 2 / expected))
        assert chi_square < 10.83

    def test_greedy_debug_flag(self, rng):
        """Test greedy=True returns the argmax."""
        policy = build_policy(EnvKind.BANDIT, 8, rng)
        policy.net.out_layer.bias[:] = [0.0, 0.0, 0.0, 0.0, 3.0, 0.0]
        policy.net.out_layer.weights[...] = 0.0
        assert act(policy, None, Command(1.0, 1, 0), rng, greedy=True) == 4

    def test_uniform_random_policy(self, rng):
        """Test the random policy covers every action."""
        policy = UniformRandomPolicy(6)
        actions = {policy.act(None, Command(0.0, 1, 1), rng) for _ in range(300)}
        assert actions == set(range(6))


class TestCommandUpdates:
    """Test command bookkeeping."""

    def test_update_command(self):
        """Test d drops by the reward and h by one."""
        cmd = update_command(Command(10.0, 5, 1), 1.0)
        assert cmd == Command(9.0, 4, 1)

    def test_horizon_floor(self):
        """Test h never drops below 1."""
        assert update_command(Command(1.0, 1, -1), 1.0).horizon == 1

    def test_default_commands(self):
        """Test the empty-buffer commands."""
        assert default_command(EnvKind.BANDIT) == Command(0.0, 1, 1)
        assert default_command(EnvKind.CARTPOLE) == Command(1.0, 200, 1)


class TestExploratoryCommand:
    """Test exploratory_command function."""

    def test_small_buffer_uses_default(self, bandit_buffer, rng):
        """Test fewer than best_k episodes gives the default command."""
        cmd = exploratory_command(bandit_buffer, rng, best_k=25, env_kind=EnvKind.BANDIT)
        assert cmd == default_command(EnvKind.BANDIT)

    def test_identical_best_returns(self, rng):
        """Test S = 0 gives d = M exactly."""
        buffer = ReplayBuffer()
        for _ in range(30):
            buffer.push(Episode(np.zeros((10, 4)), np.zeros(10), np.ones(10)))
        cmd = exploratory_command(buffer, rng, best_k=25, env_kind=EnvKind.CARTPOLE)
        assert cmd == Command(10.0, 10, 1)

    def test_desire_within_mean_plus_std(self, rng):
        """Test d ~ Uniform(M, M + S) over the best episodes."""
        buffer = ReplayBuffer()
        for length in range(1, 41):
            buffer.push(Episode(np.zeros((length, 4)), np.zeros(length), np.ones(length)))
        best = np.arange(16, 41, dtype=np.float64)
        mean, spread = best.mean(), best.std()
        for _ in range(50):
            cmd = exploratory_command(buffer, rng, best_k=25, env_kind=EnvKind.CARTPOLE)
            assert mean <= cmd.desired <= mean + spread
            assert cmd.horizon == 28
            assert cmd.morethan == 1

    def test_bandit_rounds_and_fixes_horizon(self, rng):
        """Test bandit desires are integers in 0..6 with h = 1."""
        buffer = ReplayBuffer(capacity=100)
        for i in range(30):
            buffer.push(Episode(np.zeros((1, 0)), [i % 6], [float(i % 6 + 1)]))
        for _ in range(20):
            cmd = exploratory_command(buffer, rng, best_k=25, env_kind=EnvKind.BANDIT)
            assert cmd.desired == int(cmd.desired)
            assert 0 <= cmd.desired <= 6
            assert cmd.horizon == 1


class TestRandomActionMixture:
    """Test exploration with uniformly random actions."""

    def test_zero_probability_is_the_policy(self, rng):
        """Test exploration_actor returns the policy itself for probability 0."""
        policy = build_policy(EnvKind.BANDIT, 8, rng)
        assert exploration_actor(policy, 0.0) is policy
        assert isinstance(exploration_actor(policy, 0.5), RandomActionMixture)

    def test_full_probability_ignores_policy(self, rng):
        """Test probability 1 covers every arm even under a concentrated policy."""
        policy = build_policy(EnvKind.BANDIT, 8, rng)
        policy.net.out_layer.weights[...] = 0.0
        policy.net.out_layer.bias[:] = [0.0, 0.0, 0.0, 0.0, 0.0, 50.0]
        actor = RandomActionMixture(policy, 1.0)
        actions = [actor.act(None, Command(6.0, 1, 1), rng) for _ in range(600)]
        assert set(actions) == set(range(6))
        assert actor.action_count == 6

    def test_mixture_share(self, rng):
        """Test a concentrated policy mixed at 0.5 picks its arm about 7/12 of the time."""
        policy = build_policy(EnvKind.BANDIT, 8, rng)
        policy.net.out_layer.weights[...] = 0.0
        policy.net.out_layer.bias[:] = [0.0, 0.0, 0.0, 0.0, 0.0, 50.0]
        actor = RandomActionMixture(policy, 0.5)
        actions = np.array([actor.act(None, Command(6.0, 1, 1), rng) for _ in range(6000)])
        assert np.mean(actions == 5) == pytest.approx(7 / 12, abs=0.03)

    @pytest.mark.parametrize("probability", [-0.1, 1.5])
    def test_probability_range(self, rng, probability):
        """Test probabilities outside [0, 1] are rejected."""
        with pytest.raises(ValueError):
            RandomActionMixture(UniformRandomPolicy(6), probability)
