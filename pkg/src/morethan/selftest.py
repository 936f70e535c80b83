"""
Property suites shared by the test suite and the ``selftest`` subcommand.

- gradient_check: analytic gradients against central finite differences
- orthogonality_check: semi-orthogonality of orthogonal_init
- relabel_oracle: make_training_batch against a brute-force pairing
- mirror_symmetry: CartPole dynamics under x -> -x with swapped actions
- random_play_band: random-policy CartPole returns against a Monte-Carlo band

Each suite returns a SelfTestResult; ``worst`` is the largest observed
error and the suite passes when it stays within ``tolerance``.
"""

import logging
import time
from dataclasses import dataclass
from typing import List

import numpy as np

from .envs import THETA_THRESHOLD, X_THRESHOLD, CartPoleState, cartpole_step
from .evaluation import random_play_returns
from .nn_core import (
    GatedPolicyNet,
    backward,
    build_policy_net,
    cross_entropy,
    forward,
    orthogonal_init,
    softmax,
)
from .replay import Segment, SegmentBatch, make_training_batch
from .types import Activation, ArchTag

logger = logging.getLogger(__name__)

FINITE_DIFFERENCE_STEP = 1e-5
GRADIENT_TOLERANCE = 1e-4
RELATIVE_ERROR_FLOOR = 1e-5
RELU_KINK_MARGIN = 1e-3
ORTHOGONALITY_TOLERANCE = 1e-5
MIRROR_TOLERANCE = 1e-12
ORACLE_EPISODES = 10_000
RANDOM_PLAY_EPISODES = 1_000


@dataclass
class SelfTestResult:
    """Outcome of one property suite."""

    name: str
    cases: int
    worst: float
    tolerance: float
    seconds: float

    @property
    def passed(self) -> bool:
        return bool(self.worst <= self.tolerance)


def _batch_loss(net: GatedPolicyNet, obs: np.ndarray, cmd: np.ndarray, targets) -> float:
    logits, _ = forward(net, obs, cmd)
    return cross_entropy(softmax(logits), targets)


def _random_net(arch: ArchTag, rng: np.random.Generator):
    observation_width = 0 if arch is ArchTag.PLAIN_MLP else int(rng.integers(1, 6))
    net = build_policy_net(
        arch,
        observation_width=observation_width,
        command_width=int(rng.integers(1, 9)),
        hidden_width=int(rng.integers(2, 12)),
        action_count=int(rng.integers(2, 7)),
        rng=rng,
    )
    for layer in net.layers().values():
        layer.bias[...] = rng.normal(scale=0.1, size=layer.bias.shape)
    batch = int(rng.integers(1, 6))
    obs = rng.normal(size=(batch, observation_width))
    cmd = rng.normal(size=(batch, net.command_width))
    targets = rng.integers(0, net.action_count, size=batch)
    return net, obs, cmd, targets


def _near_relu_kink(net: GatedPolicyNet, obs: np.ndarray, cmd: np.ndarray) -> bool:
    if net.obs_layer.activation is not Activation.RELU:
        return False
    _, cache = forward(net, obs, cmd)
    return bool(np.any(np.abs(cache.obs_pre) < RELU_KINK_MARGIN))


def max_gradient_error(
    net: GatedPolicyNet, obs: np.ndarray, cmd: np.ndarray, targets: np.ndarray
) -> float:
    """Largest relative error between backward() and central differences."""
    _, cache = forward(net, obs, cmd)
    analytic = backward(net, cache, targets)
    h = FINITE_DIFFERENCE_STEP
    worst = 0.0
    for label, param in net.parameters().items():
        for idx in np.ndindex(param.shape):
            saved = param[idx]
            param[idx] = saved + h
            plus = _batch_loss(net, obs, cmd, targets)
            param[idx] = saved - h
            minus = _batch_loss(net, obs, cmd, targets)
            param[idx] = saved
            numeric = (plus - minus) / (2 * h)
            a = analytic[label][idx]
            denom = max(abs(a), abs(numeric), RELATIVE_ERROR_FLOOR)
            worst = max(worst, abs(a - numeric) / denom)
    return worst


def gradient_check(cases: int = 50, seed: int = 0) -> SelfTestResult:
    """Random nets of both architectures, alternating; ReLU nets near a kink are redrawn."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(cases):
        arch = ArchTag.PLAIN_MLP if i % 2 == 0 else ArchTag.GATED
        net, obs, cmd, targets = _random_net(arch, rng)
        while _near_relu_kink(net, obs, cmd):
            net, obs, cmd, targets = _random_net(arch, rng)
        worst = max(worst, max_gradient_error(net, obs, cmd, targets))
    return SelfTestResult(
        "gradient_check", cases, worst, GRADIENT_TOLERANCE, time.perf_counter() - start
    )


def orthogonality_residual(weights: np.ndarray) -> float:
    """max |W^T W - I| for tall/square W, max |W W^T - I| for wide W."""
    rows, cols = weights.shape
    gram = weights.T @ weights if rows >= cols else weights @ weights.T
    return float(np.max(np.abs(gram - np.eye(min(rows, cols)))))


def orthogonality_check(cases: int = 100, seed: int = 0) -> SelfTestResult:
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        rows, cols = (int(v) for v in rng.integers(1, 65, size=2))
        worst = max(worst, orthogonality_residual(orthogonal_init(rows, cols, rng)))
    return SelfTestResult(
        "orthogonality_check", cases, worst, ORTHOGONALITY_TOLERANCE, time.perf_counter() - start
    )


def _brute_force_pairing(segments: List[Segment], permutation: np.ndarray) -> List[tuple]:
    samples = []
    for i, j in enumerate(permutation):
        anchor, achiever = segments[i], segments[j]
        if achiever.return_to_go > anchor.return_to_go:
            m = 1
        elif achiever.return_to_go < anchor.return_to_go:
            m = -1
        else:
            m = 0
        samples.append(
            (
                tuple(achiever.observation),
                anchor.return_to_go,
                achiever.horizon,
                m,
                achiever.action,
            )
        )
    return samples


def relabel_oracle(cases: int = 1000, seed: int = 0) -> SelfTestResult:
    """
    Compare make_training_batch with a loop-based pairing.

    Returns are small integers so ties (m = 0) are common. ``worst`` counts
    mismatching instances.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(cases):
        n = int(rng.integers(1, 33))
        width = int(rng.integers(0, 5))
        segments = [
            Segment(
                observation=rng.normal(size=width),
                action=int(rng.integers(0, 6)),
                horizon=int(rng.integers(1, 201)),
                return_to_go=float(rng.integers(0, 7)),
            )
            for _ in range(n)
        ]
        permutation = rng.permutation(n)
        batch = make_training_batch(SegmentBatch.from_segments(segments), permutation)
        produced = [
            (tuple(s.observation), s.desired, s.horizon, s.morethan, s.target_action)
            for s in batch
        ]
        expected = _brute_force_pairing(segments, permutation)
        achieved = np.array([segments[j].return_to_go for j in permutation])
        sign_ok = np.array_equal(batch.morethan, np.sign(achieved - batch.desired))
        if produced != expected or not sign_ok:
            mismatches += 1
    return SelfTestResult(
        "relabel_oracle", cases, float(mismatches), 0.0, time.perf_counter() - start
    )


def mirror_symmetry(cases: int = 1000, seed: int = 0) -> SelfTestResult:
    """step(-s, 1 - a) must equal -step(s, a), terminal flag included."""
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    limits = np.array([X_THRESHOLD, 2.0, THETA_THRESHOLD, 2.0])
    worst = 0.0
    for _ in range(cases):
        state = CartPoleState(*(float(v) for v in rng.uniform(-limits, limits)))
        action = int(rng.integers(0, 2))
        mirrored = CartPoleState(*(-v for v in state))
        next_state, result = cartpole_step(state, action)
        next_mirror, result_mirror = cartpole_step(mirrored, 1 - action)
        gap = float(np.max(np.abs(next_state.as_array() + next_mirror.as_array())))
        if result.terminal != result_mirror.terminal:
            gap = float("inf")
        worst = max(worst, gap)
    return SelfTestResult(
        "mirror_symmetry", cases, worst, MIRROR_TOLERANCE, time.perf_counter() - start
    )


def random_play_band(
    episodes: int = RANDOM_PLAY_EPISODES,
    oracle_episodes: int = ORACLE_EPISODES,
    seed: int = 0,
) -> SelfTestResult:
    """
    Random-policy CartPole mean return against a Monte-Carlo oracle.

    The oracle mean and spread come from oracle_episodes rollouts on an
    independent stream; the band is the oracle mean +/- 4 standard errors
    of an episodes-sized sample. ``worst`` is the distance in standard errors.
    """
    start = time.perf_counter()
    oracle = np.array(random_play_returns(oracle_episodes, np.random.default_rng([seed, 1])))
    sample = np.array(random_play_returns(episodes, np.random.default_rng([seed, 2])))
    standard_error = float(np.std(oracle)) / np.sqrt(episodes)
    distance = abs(float(np.mean(sample)) - float(np.mean(oracle))) / standard_error
    logger.debug("Random play: oracle mean %.3f, sample mean %.3f", oracle.mean(), sample.mean())
    return SelfTestResult(
        "random_play_band", episodes, distance, 4.0, time.perf_counter() - start
    )


def run_selftests(seed: int = 0, include_random_play: bool = True) -> List[SelfTestResult]:
    """Run every property suite with its default case count; random play may be skipped."""
    results = [
        gradient_check(seed=seed),
        orthogonality_check(seed=seed),
        relabel_oracle(seed=seed),
        mirror_symmetry(seed=seed),
    ]
    if include_random_play:
        results.append(random_play_band(seed=seed))
    for r in results:
        logger.info("%s: worst %.3g (limit %.3g)", r.name, r.worst, r.tolerance)
    return results
