"""
Minimal dense-network engine for command-conditioned policies.

This module provides the two policy layouts used by the experiments (a plain
command-only MLP and a command-gated network), orthogonal initialization,
softmax / cross-entropy, hand-written backpropagation and the SGD and Adam
optimizers. Matrices are two-dimensional float64 numpy arrays in row-major
order; every forward/backward function accepts a leading batch axis.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .types import Activation, ArchTag, DimensionError, OptimizerKind

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-12

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

Params = Dict[str, np.ndarray]


def orthogonal_init(
    rows: int, cols: int, rng: np.random.Generator, gain: float = 1.0
) -> np.ndarray:
    """
    Draw a (semi-)orthogonal matrix.

    A Gaussian matrix is QR-decomposed and the sign of each column of Q is
    fixed by the sign of the matching diagonal entry of R, which makes the
    draw uniform over orthogonal matrices.

    Args:
        rows: Number of rows (>= 1)
        cols: Number of columns (>= 1)
        rng: Seeded random source
        gain: Scale applied to the result

    Returns:
        Matrix W with W @ W.T == I when rows <= cols, else W.T @ W == I
    """
    if rows < 1 or cols < 1:
        raise DimensionError(f"orthogonal_init needs positive dimensions, got {rows}x{cols}")

    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    if rows < cols:
        q = q.T
    return gain * np.ascontiguousarray(q, dtype=np.float64)


def apply_activation(activation: Activation, z: np.ndarray) -> np.ndarray:
    """Apply an elementwise activation."""
    if activation is Activation.IDENTITY:
        return z
    if activation is Activation.RELU:
        return np.maximum(z, 0.0)
    if activation is Activation.TANH:
        return np.tanh(z)
    if activation is Activation.SIGMOID:
        # Split by sign so large |z| never overflows exp.
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    raise ValueError(f"Unknown activation: {activation}")


def activation_derivative(activation: Activation, z: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Derivative of an activation with respect to its input.

    Args:
        activation: The activation
        z: Pre-activation values
        y: Activation outputs (apply_activation(activation, z))
    """
    if activation is Activation.IDENTITY:
        return np.ones_like(z)
    if activation is Activation.RELU:
        return (z > 0).astype(np.float64)
    if activation is Activation.TANH:
        return 1.0 - y * y
    if activation is Activation.SIGMOID:
        return y * (1.0 - y)
    raise ValueError(f"Unknown activation: {activation}")


@dataclass
class DenseLayer:
    """
    Fully connected layer.

    Attributes:
        weights: Matrix of shape (out, in)
        bias: Vector of length out
        activation: Activation applied to weights @ x + bias
    """

    weights: np.ndarray
    bias: np.ndarray
    activation: Activation = Activation.IDENTITY

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2:
            raise DimensionError(f"weights must be 2-D, got shape {self.weights.shape}")
        if self.bias.shape != (self.weights.shape[0],):
            raise DimensionError(
                f"bias length {self.bias.shape} does not match {self.weights.shape[0]} rows"
            )

    @property
    def in_width(self) -> int:
        return self.weights.shape[1]

    @property
    def out_width(self) -> int:
        return self.weights.shape[0]

    def pre_activation(self, x: np.ndarray) -> np.ndarray:
        """Compute x @ W.T + b for a batch x of shape (batch, in)."""
        return x @ self.weights.T + self.bias


@dataclass
class GatedPolicyNet:
    """
    Command-conditioned policy network.

    PLAIN_MLP: logits = out(act(obs_layer(cmd)))  (the observation is empty)
    GATED:     logits = out(tanh(obs_layer(obs)) * sigmoid(gate_layer(cmd)))

    Attributes:
        obs_layer: Observation pathway (plain MLP: the command pathway)
        out_layer: Identity layer producing action logits
        arch_tag: Network layout
        gate_layer: Sigmoid command pathway, GATED only
        version: Bumped by every parameter update; caches from older versions are stale
    """

    obs_layer: DenseLayer
    out_layer: DenseLayer
    arch_tag: ArchTag
    gate_layer: Optional[DenseLayer] = None
    version: int = 0

    def __post_init__(self):
        if self.arch_tag is ArchTag.GATED:
            if self.gate_layer is None:
                raise DimensionError("gated network requires a gate layer")
            if self.gate_layer.out_width != self.obs_layer.out_width:
                raise DimensionError(
                    f"gate width {self.gate_layer.out_width} != "
                    f"observation hidden width {self.obs_layer.out_width}"
                )
            if self.gate_layer.activation is not Activation.SIGMOID:
                raise DimensionError("gate layer must use sigmoid activation")
        elif self.gate_layer is not None:
            raise DimensionError("plain MLP takes no gate layer")
        if self.out_layer.in_width != self.obs_layer.out_width:
            raise DimensionError(
                f"output layer expects {self.out_layer.in_width} inputs, "
                f"hidden width is {self.obs_layer.out_width}"
            )

    @property
    def observation_width(self) -> int:
        if self.arch_tag is ArchTag.PLAIN_MLP:
            return 0
        return self.obs_layer.in_width

    @property
    def command_width(self) -> int:
        if self.arch_tag is ArchTag.PLAIN_MLP:
            return self.obs_layer.in_width
        return self.gate_layer.in_width

    @property
    def hidden_width(self) -> int:
        return self.obs_layer.out_width

    @property
    def action_count(self) -> int:
        return self.out_layer.out_width

    def layers(self) -> Dict[str, DenseLayer]:
        """Named layers in a fixed order."""
        named = {"obs": self.obs_layer}
        if self.gate_layer is not None:
            named["gate"] = self.gate_layer
        named["out"] = self.out_layer
        return named

    def parameters(self) -> Params:
        """
        Labeled parameter arrays.

        The arrays are the layers' own storage, so in-place updates through
        this mapping change the network.
        """
        params: Params = {}
        for name, layer in self.layers().items():
            params[f"{name}.weights"] = layer.weights
            params[f"{name}.bias"] = layer.bias
        return params

    def copy(self) -> "GatedPolicyNet":
        """Deep copy of the network."""

        def clone(layer: Optional[DenseLayer]) -> Optional[DenseLayer]:
            if layer is None:
                return None
            return DenseLayer(layer.weights.copy(), layer.bias.copy(), layer.activation)

        return GatedPolicyNet(
            obs_layer=clone(self.obs_layer),
            out_layer=clone(self.out_layer),
            arch_tag=self.arch_tag,
            gate_layer=clone(self.gate_layer),
            version=self.version,
        )


def build_policy_net(
    arch_tag: ArchTag,
    observation_width: int,
    command_width: int,
    hidden_width: int,
    action_count: int,
    rng: np.random.Generator,
    obs_activation: Optional[Activation] = None,
) -> GatedPolicyNet:
    """
    Build an orthogonally initialized policy network with zero biases.

    Args:
        arch_tag: PLAIN_MLP or GATED
        observation_width: Observation length (ignored for PLAIN_MLP)
        command_width: Command encoding length
        hidden_width: Hidden units
        action_count: Number of discrete actions
        rng: Seeded random source
        obs_activation: Hidden activation (default relu for PLAIN_MLP, tanh for GATED)

    Returns:
        A fresh GatedPolicyNet
    """
    if arch_tag is ArchTag.PLAIN_MLP:
        activation = obs_activation or Activation.RELU
        obs_layer = DenseLayer(
            orthogonal_init(hidden_width, command_width, rng), np.zeros(hidden_width), activation
        )
        gate_layer = None
    else:
        activation = obs_activation or Activation.TANH
        obs_layer = DenseLayer(
            orthogonal_init(hidden_width, observation_width, rng),
            np.zeros(hidden_width),
            activation,
        )
        gate_layer = DenseLayer(
            orthogonal_init(hidden_width, command_width, rng),
            np.zeros(hidden_width),
            Activation.SIGMOID,
        )
    out_layer = DenseLayer(
        orthogonal_init(action_count, hidden_width, rng), np.zeros(action_count)
    )
    return GatedPolicyNet(obs_layer, out_layer, arch_tag, gate_layer)


@dataclass
class ForwardCache:
    """Intermediate activations kept by forward() for backward()."""

    net_id: int
    version: int
    obs: np.ndarray
    cmd_enc: np.ndarray
    obs_pre: np.ndarray
    obs_hidden: np.ndarray
    gate_pre: Optional[np.ndarray]
    gate: Optional[np.ndarray]
    hidden: np.ndarray
    logits: np.ndarray


def _as_batch(x: Optional[np.ndarray], batch: int) -> np.ndarray:
    if x is None:
        return np.zeros((batch, 0))
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    return x


def forward(
    net: GatedPolicyNet, obs: Optional[np.ndarray], cmd_enc: np.ndarray
) -> Tuple[np.ndarray, ForwardCache]:
    """
    Compute action logits.

    Args:
        net: Policy network
        obs: Observation vector or (batch, width) matrix; empty/None for PLAIN_MLP
        cmd_enc: Command encoding vector or (batch, width) matrix

    Returns:
        Tuple of (logits, cache). Logits are 1-D when cmd_enc is 1-D.

    Raises:
        DimensionError: If input widths do not match the network
    """
    single = np.ndim(cmd_enc) == 1
    cmd = _as_batch(cmd_enc, 1)
    batch = cmd.shape[0]
    obs_b = _as_batch(obs, batch)
    if obs_b.shape[0] != batch and obs_b.shape[1] > 0:
        raise DimensionError(f"batch sizes differ: obs {obs_b.shape[0]}, command {batch}")
    if obs_b.shape[0] != batch:
        obs_b = np.zeros((batch, obs_b.shape[1]))
    if cmd.shape[1] != net.command_width:
        raise DimensionError(
            f"command encoding width {cmd.shape[1]} != network input {net.command_width}"
        )
    if obs_b.shape[1] != net.observation_width:
        raise DimensionError(
            f"observation width {obs_b.shape[1]} != network input {net.observation_width}"
        )

    if net.arch_tag is ArchTag.PLAIN_MLP:
        obs_pre = net.obs_layer.pre_activation(cmd)
        obs_hidden = apply_activation(net.obs_layer.activation, obs_pre)
        gate_pre = gate = None
        hidden = obs_hidden
    else:
        obs_pre = net.obs_layer.pre_activation(obs_b)
        obs_hidden = apply_activation(net.obs_layer.activation, obs_pre)
        gate_pre = net.gate_layer.pre_activation(cmd)
        gate = apply_activation(Activation.SIGMOID, gate_pre)
        hidden = obs_hidden * gate
    logits = net.out_layer.pre_activation(hidden)

    cache = ForwardCache(
        net_id=id(net),
        version=net.version,
        obs=obs_b,
        cmd_enc=cmd,
        obs_pre=obs_pre,
        obs_hidden=obs_hidden,
        gate_pre=gate_pre,
        gate=gate,
        hidden=hidden,
        logits=logits,
    )
    return (logits[0] if single else logits), cache


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / np.sum(exp, axis=-1, keepdims=True)


def cross_entropy(probs: np.ndarray, target: Union[int, np.ndarray]) -> float:
    """
    Cross-entropy of a categorical prediction.

    For a single probability vector returns -ln(probs[target]); for a batch
    (2-D probs, 1-D targets) returns the mean over the batch. Probabilities
    are clamped to at least 1e-12 before the log.

    Raises:
        IndexError: If a target is out of range
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim == 1:
        target = int(target)
        if not 0 <= target < probs.shape[0]:
            raise IndexError(f"target {target} out of range for {probs.shape[0]} actions")
        return float(-np.log(max(probs[target], PROB_FLOOR)))

    targets = np.asarray(target, dtype=np.int64)
    if targets.shape != (probs.shape[0],):
        raise DimensionError(f"{targets.shape[0]} targets for a batch of {probs.shape[0]}")
    if np.any(targets < 0) or np.any(targets >= probs.shape[1]):
        raise IndexError(f"targets out of range for {probs.shape[1]} actions")
    picked = probs[np.arange(probs.shape[0]), targets]
    return float(np.mean(-np.log(np.maximum(picked, PROB_FLOOR))))


def backward(
    net: GatedPolicyNet, cache: ForwardCache, target: Union[int, np.ndarray]
) -> Params:
    """
    Gradients of the mean cross-entropy loss with respect to every parameter.

    Args:
        net: The network that produced the cache
        cache: Cache returned by the matching forward() call
        target: Target action index, or one index per batch row

    Returns:
        Mapping label -> gradient with the shapes of net.parameters()

    Raises:
        DimensionError: If the cache is stale or belongs to another network
    """
    if cache.net_id != id(net) or cache.version != net.version:
        raise DimensionError("stale forward cache: network changed since forward()")
    if cache.logits.shape[1] != net.action_count:
        raise DimensionError("forward cache does not match the network layout")

    batch = cache.logits.shape[0]
    targets = np.atleast_1d(np.asarray(target, dtype=np.int64))
    if targets.shape != (batch,):
        raise DimensionError(f"{targets.shape[0]} targets for a batch of {batch}")

    grad_logits = softmax(cache.logits)
    grad_logits[np.arange(batch), targets] -= 1.0
    grad_logits /= batch

    grads: Params = {
        "out.weights": grad_logits.T @ cache.hidden,
        "out.bias": grad_logits.sum(axis=0),
    }
    grad_hidden = grad_logits @ net.out_layer.weights

    if net.arch_tag is ArchTag.PLAIN_MLP:
        grad_pre = grad_hidden * activation_derivative(
            net.obs_layer.activation, cache.obs_pre, cache.obs_hidden
        )
        grads["obs.weights"] = grad_pre.T @ cache.cmd_enc
        grads["obs.bias"] = grad_pre.sum(axis=0)
    else:
        grad_obs_pre = (
            grad_hidden
            * cache.gate
            * activation_derivative(net.obs_layer.activation, cache.obs_pre, cache.obs_hidden)
        )
        grad_gate_pre = grad_hidden * cache.obs_hidden * cache.gate * (1.0 - cache.gate)
        grads["obs.weights"] = grad_obs_pre.T @ cache.obs
        grads["obs.bias"] = grad_obs_pre.sum(axis=0)
        grads["gate.weights"] = grad_gate_pre.T @ cache.cmd_enc
        grads["gate.bias"] = grad_gate_pre.sum(axis=0)

    return {label: grads[label] for label in net.parameters()}


@dataclass
class OptimizerState:
    """
    State of a first-order optimizer.

    Attributes:
        kind: SGD or ADAM
        step_size: Learning rate
        adam_beta1: First-moment decay
        adam_beta2: Second-moment decay
        adam_epsilon: Denominator floor
        first_moment: Per-parameter running means (Adam)
        second_moment: Per-parameter running uncentered variances (Adam)
        step_count: Number of updates applied
    """

    kind: OptimizerKind
    step_size: float
    adam_beta1: float = ADAM_BETA1
    adam_beta2: float = ADAM_BETA2
    adam_epsilon: float = ADAM_EPSILON
    first_moment: Params = field(default_factory=dict)
    second_moment: Params = field(default_factory=dict)
    step_count: int = 0


def make_optimizer(kind: OptimizerKind, step_size: float, params: Params) -> OptimizerState:
    """Create a fresh optimizer state mirroring the parameter shapes."""
    if step_size <= 0:
        raise ValueError(f"step_size must be positive, got {step_size}")
    state = OptimizerState(kind=kind, step_size=step_size)
    if kind is OptimizerKind.ADAM:
        state.first_moment = {k: np.zeros_like(v) for k, v in params.items()}
        state.second_moment = {k: np.zeros_like(v) for k, v in params.items()}
    return state


def optimizer_step(params: Params, grads: Params, state: OptimizerState) -> None:
    """
    Apply one in-place update to params.

    Raises:
        DimensionError: If gradient or moment shapes disagree with the parameters
    """
    if params.keys() != grads.keys():
        raise DimensionError(
            f"gradient labels {sorted(grads)} do not match parameters {sorted(params)}"
        )
    for label, value in params.items():
        if grads[label].shape != value.shape:
            raise DimensionError(
                f"{label}: gradient shape {grads[label].shape} != parameter shape {value.shape}"
            )
        if state.kind is OptimizerKind.ADAM:
            m = state.first_moment.get(label)
            v = state.second_moment.get(label)
            if m is None or m.shape != value.shape or v is None or v.shape != value.shape:
                raise DimensionError(f"{label}: optimizer moments do not mirror the parameter")

    state.step_count += 1
    if state.kind is OptimizerKind.SGD:
        for label, value in params.items():
            value -= state.step_size * grads[label]
        return

    b1, b2 = state.adam_beta1, state.adam_beta2
    correction1 = 1.0 - b1**state.step_count
    correction2 = 1.0 - b2**state.step_count
    for label, value in params.items():
        m = state.first_moment[label]
        v = state.second_moment[label]
        g = grads[label]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        value -= state.step_size * m_hat / (np.sqrt(v_hat) + state.adam_epsilon)


def train_step(
    net: GatedPolicyNet,
    obs: Optional[np.ndarray],
    cmd_enc: np.ndarray,
    targets: np.ndarray,
    state: OptimizerState,
) -> float:
    """
    One gradient step on the mean cross-entropy of a batch.

    Returns:
        The batch loss before the update
    """
    _, cache = forward(net, obs, cmd_enc)
    loss = cross_entropy(softmax(cache.logits), np.atleast_1d(targets))
    grads = backward(net, cache, targets)
    optimizer_step(net.parameters(), grads, state)
    net.version += 1
    return loss
