"""
Training checkpoints.

A checkpoint captures everything needed to continue a run bit-identically:
configuration, network parameters, optimizer state, the random stream and
(optionally) the replay buffer. The on-disk format is UTF-8 text with one
``label = <json>`` line per field, beginning with ``format_version``. Arrays
are stored as ``{"shape": [...], "data": [...]}`` with shortest round-trip
decimal floats, so save/load is lossless.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from .agent import Policy
from .config import ExperimentConfig
from .nn_core import DenseLayer, GatedPolicyNet, OptimizerState
from .replay import Episode, ReplayBuffer
from .types import Activation, ArchTag, CheckpointError, EnvKind, OptimizerKind

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    """
    Snapshot of a training run.

    Attributes:
        config: Run configuration
        net: Policy network (parameters and layout)
        optimizer: Optimizer state, moments included
        rng_state: numpy bit-generator state of the run's random stream
        iteration: Completed training iterations
        env_steps: Environment steps collected so far
        episodes: Episodes collected so far
        buffer: Replay buffer, if saved
        format_version: File format version
    """

    config: ExperimentConfig
    net: GatedPolicyNet
    optimizer: OptimizerState
    rng_state: Dict[str, Any]
    iteration: int = 0
    env_steps: int = 0
    episodes: int = 0
    buffer: Optional[ReplayBuffer] = None
    format_version: int = FORMAT_VERSION

    @property
    def env_kind(self) -> EnvKind:
        return self.config.env_kind

    def require_env(self, kind: EnvKind) -> "Checkpoint":
        """
        Raises:
            CheckpointError: If the checkpoint was trained on another environment
        """
        if self.env_kind is not kind:
            raise CheckpointError(
                f"checkpoint was trained on {self.env_kind.value}, expected {kind.value}"
            )
        return self

    def policy(self) -> Policy:
        """Policy backed by a copy of the checkpointed network."""
        return Policy(self.net.copy(), self.env_kind)

    def make_rng(self) -> np.random.Generator:
        """Random stream positioned where the checkpoint was taken."""
        rng = np.random.default_rng()
        rng.bit_generator.state = self.rng_state
        return rng


def _array_to_json(array: np.ndarray) -> Dict[str, Any]:
    array = np.asarray(array)
    return {"shape": list(array.shape), "data": array.ravel().tolist()}


def _array_from_json(data: Dict[str, Any], dtype=np.float64) -> np.ndarray:
    return np.array(data["data"], dtype=dtype).reshape(data["shape"])


def save_checkpoint(
    checkpoint: Checkpoint, path: Union[str, Path], include_buffer: bool = True
) -> Path:
    """
    Write a checkpoint file.

    Args:
        checkpoint: Snapshot to write
        path: Destination file; parent directories are created
        include_buffer: Whether to store the replay buffer (needed for resuming)

    Returns:
        Path of the written file
    """
    net = checkpoint.net
    opt = checkpoint.optimizer
    fields: Dict[str, Any] = {
        "format_version": checkpoint.format_version,
        "config": checkpoint.config.to_dict(),
        "progress": {
            "iteration": checkpoint.iteration,
            "env_steps": checkpoint.env_steps,
            "episodes": checkpoint.episodes,
        },
        "network": {
            "arch_tag": net.arch_tag.value,
            "activations": {name: layer.activation.value for name, layer in net.layers().items()},
            "version": net.version,
        },
    }
    for label, value in net.parameters().items():
        fields[f"param.{label}"] = _array_to_json(value)

    fields["optimizer"] = {
        "kind": opt.kind.value,
        "step_size": opt.step_size,
        "adam_beta1": opt.adam_beta1,
        "adam_beta2": opt.adam_beta2,
        "adam_epsilon": opt.adam_epsilon,
        "step_count": opt.step_count,
    }
    for label, value in opt.first_moment.items():
        fields[f"optimizer.first.{label}"] = _array_to_json(value)
    for label, value in opt.second_moment.items():
        fields[f"optimizer.second.{label}"] = _array_to_json(value)

    fields["rng_state"] = checkpoint.rng_state

    buffer = checkpoint.buffer if include_buffer else None
    if buffer is not None:
        fields["buffer"] = {
            "capacity": buffer.capacity,
            "episodes": len(buffer),
        }
        for i, episode in enumerate(buffer):
            fields[f"buffer.episode.{i}"] = {
                "observations": _array_to_json(episode.observations),
                "actions": _array_to_json(episode.actions),
                "rewards": _array_to_json(episode.rewards),
            }

    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        for label, value in fields.items():
            f.write(f"{label} = {json.dumps(value)}\n")
    logger.info("Wrote checkpoint %s (iteration %d)", out, checkpoint.iteration)
    return out


def _read_fields(path: Union[str, Path]) -> Dict[str, Any]:
    fields: Dict[str, Any] = {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                if not line.strip():
                    continue
                label, sep, payload = line.partition(" = ")
                if not sep:
                    raise CheckpointError(f"{path}:{lineno}: expected 'label = value'")
                fields[label] = json.loads(payload)
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise CheckpointError(f"corrupt checkpoint {path}: {e}") from e
    return fields


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """
    Read a checkpoint file.

    Raises:
        CheckpointError: If the file is missing, malformed or of another format version
    """
    fields = _read_fields(path)
    version = fields.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"{path}: unsupported format_version {version!r} (expected {FORMAT_VERSION})"
        )

    try:
        config = ExperimentConfig.from_dict(fields["config"])
        network = fields["network"]
        activations = network["activations"]

        def layer(name: str) -> Optional[DenseLayer]:
            if f"param.{name}.weights" not in fields:
                return None
            return DenseLayer(
                _array_from_json(fields[f"param.{name}.weights"]),
                _array_from_json(fields[f"param.{name}.bias"]),
                Activation(activations[name]),
            )

        net = GatedPolicyNet(
            obs_layer=layer("obs"),
            out_layer=layer("out"),
            arch_tag=ArchTag(network["arch_tag"]),
            gate_layer=layer("gate"),
            version=int(network["version"]),
        )

        opt = fields["optimizer"]
        optimizer = OptimizerState(
            kind=OptimizerKind(opt["kind"]),
            step_size=float(opt["step_size"]),
            adam_beta1=float(opt["adam_beta1"]),
            adam_beta2=float(opt["adam_beta2"]),
            adam_epsilon=float(opt["adam_epsilon"]),
            step_count=int(opt["step_count"]),
        )
        for label, value in fields.items():
            if label.startswith("optimizer.first."):
                optimizer.first_moment[label[len("optimizer.first.") :]] = _array_from_json(value)
            elif label.startswith("optimizer.second."):
                optimizer.second_moment[label[len("optimizer.second.") :]] = _array_from_json(
                    value
                )

        buffer = None
        if "buffer" in fields:
            buffer = ReplayBuffer(capacity=fields["buffer"]["capacity"])
            for i in range(int(fields["buffer"]["episodes"])):
                stored = fields[f"buffer.episode.{i}"]
                buffer.push(
                    Episode(
                        _array_from_json(stored["observations"]),
                        _array_from_json(stored["actions"], dtype=np.int64),
                        _array_from_json(stored["rewards"]),
                    )
                )

        progress = fields["progress"]
        return Checkpoint(
            config=config,
            net=net,
            optimizer=optimizer,
            rng_state=fields["rng_state"],
            iteration=int(progress["iteration"]),
            env_steps=int(progress["env_steps"]),
            episodes=int(progress["episodes"]),
            buffer=buffer,
            format_version=version,
        )
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"{path}: incomplete or invalid checkpoint ({e})") from e
