"""
Experiment configuration.

ExperimentConfig holds every knob of a training run. The two published
setups are available as presets; config files are flat ``key = value`` text
whose keys are ExperimentConfig field names.

Example config file:

    # longer bandit run with a smaller buffer
    env_kind = bandit
    total_env_steps = 50000
    buffer_capacity = 50
"""

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Union

from .types import Activation, ConfigError, EnvKind, OptimizerKind

UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Settings for one seeded training run.

    Attributes:
        env_kind: Environment to train in
        total_env_steps: Environment steps to collect (warm-up included)
        buffer_capacity: Replay capacity in episodes, None for unbounded
        episodes_per_iteration: Exploratory episodes collected per iteration
        batches_per_iteration: Segment batches trained on per iteration
        batch_size: Segments per batch
        permutations_per_batch: Gradient steps per batch, the identity pairing included
        optimizer: SGD or ADAM
        step_size: Optimizer step size
        hidden_width: Hidden units of the policy network
        best_k: Top episodes summarized by the exploratory command
        random_action_prob: Chance that an exploratory step takes a uniformly random action
        seed: Seed of the run's single random stream
        output_dir: Directory for metrics, checkpoints and figures
        obs_activation: Hidden activation override (None: relu for bandit, tanh for CartPole)
        log_every: Iterations between progress lines
        eval_episodes_per_cell: CartPole evaluation rollouts per (d, m) cell
    """

    env_kind: EnvKind
    total_env_steps: int
    buffer_capacity: Optional[int]
    episodes_per_iteration: int
    batches_per_iteration: int
    batch_size: int
    permutations_per_batch: int
    optimizer: OptimizerKind
    step_size: float
    hidden_width: int = 32
    best_k: int = 25
    random_action_prob: float = 0.0
    seed: int = 0
    output_dir: str = "runs"
    obs_activation: Optional[Activation] = None
    log_every: int = 10
    eval_episodes_per_cell: int = 10

    def validate(self) -> "ExperimentConfig":
        """
        Check value ranges.

        Raises:
            ConfigError: Naming the first invalid key
        """
        positive = (
            "total_env_steps",
            "episodes_per_iteration",
            "batches_per_iteration",
            "batch_size",
            "permutations_per_batch",
            "hidden_width",
            "best_k",
            "log_every",
            "eval_episodes_per_cell",
        )
        for key in positive:
            if getattr(self, key) < 1:
                raise ConfigError(key, f"must be a positive integer, got {getattr(self, key)}")
        if self.buffer_capacity is not None and self.buffer_capacity < 1:
            raise ConfigError(
                "buffer_capacity", f"must be positive or '{UNBOUNDED}', got {self.buffer_capacity}"
            )
        if not self.step_size > 0:
            raise ConfigError("step_size", f"must be positive, got {self.step_size}")
        if not 0.0 <= self.random_action_prob <= 1.0:
            raise ConfigError(
                "random_action_prob", f"must be in [0, 1], got {self.random_action_prob}"
            )
        if self.seed < 0:
            raise ConfigError("seed", f"must be non-negative, got {self.seed}")
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Plain JSON-ready mapping (enums by value, unbounded capacity as a string)."""
        data: Dict[str, Any] = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, (EnvKind, OptimizerKind, Activation)):
                value = value.value
            elif f.name == "buffer_capacity" and value is None:
                value = UNBOUNDED
            data[f.name] = value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """
        Inverse of to_dict; values may also be strings as read from a config file.

        Raises:
            ConfigError: For unknown keys or unparsable values
        """
        kwargs = {key: parse_value(key, value) for key, value in data.items()}
        missing = [
            f.name
            for f in dataclasses.fields(cls)
            if f.name not in kwargs and f.default is dataclasses.MISSING
        ]
        if missing:
            raise ConfigError(missing[0], "is required")
        return cls(**kwargs).validate()


PRESETS: Dict[str, ExperimentConfig] = {
    "bandit-paper": ExperimentConfig(
        env_kind=EnvKind.BANDIT,
        total_env_steps=25_000,
        buffer_capacity=100,
        episodes_per_iteration=16,
        batches_per_iteration=16,
        batch_size=16,
        permutations_per_batch=2,
        optimizer=OptimizerKind.SGD,
        step_size=0.01,
        # every arm has to stay represented in the 100-episode buffer
        random_action_prob=0.9,
    ),
    "cartpole-paper": ExperimentConfig(
        env_kind=EnvKind.CARTPOLE,
        total_env_steps=500_000,
        buffer_capacity=None,
        episodes_per_iteration=5,
        batches_per_iteration=800,
        batch_size=256,
        permutations_per_batch=7,
        optimizer=OptimizerKind.ADAM,
        step_size=0.0008,
    ),
}

# Preset used as the base when a config file names only an env_kind.
DEFAULT_PRESET_FOR = {
    EnvKind.BANDIT: "bandit-paper",
    EnvKind.CARTPOLE: "cartpole-paper",
}


def _parse_int(text: Any) -> int:
    if isinstance(text, bool):
        raise ValueError("booleans are not integers")
    if isinstance(text, int):
        return text
    return int(str(text).replace("_", ""))


def _parse_float(text: Any) -> float:
    return float(text)


def _parse_capacity(text: Any) -> Optional[int]:
    if text is None or str(text).strip().lower() in (UNBOUNDED, "none"):
        return None
    return _parse_int(text)


def _parse_activation(text: Any) -> Optional[Activation]:
    if text is None or str(text).strip().lower() in ("none", "default"):
        return None
    return Activation(str(text).strip().lower())


_PARSERS: Dict[str, Callable[[Any], Any]] = {
    "env_kind": lambda v: EnvKind(str(v).strip().lower()),
    "total_env_steps": _parse_int,
    "buffer_capacity": _parse_capacity,
    "episodes_per_iteration": _parse_int,
    "batches_per_iteration": _parse_int,
    "batch_size": _parse_int,
    "permutations_per_batch": _parse_int,
    "optimizer": lambda v: OptimizerKind(str(v).strip().lower()),
    "step_size": _parse_float,
    "hidden_width": _parse_int,
    "best_k": _parse_int,
    "random_action_prob": _parse_float,
    "seed": _parse_int,
    "output_dir": lambda v: str(v).strip(),
    "obs_activation": _parse_activation,
    "log_every": _parse_int,
    "eval_episodes_per_cell": _parse_int,
}


def parse_value(key: str, value: Any) -> Any:
    """
    Parse one configuration value by key.

    Raises:
        ConfigError: If the key is unknown or the value does not parse
    """
    parser = _PARSERS.get(key)
    if parser is None:
        raise ConfigError(key, "unknown configuration key")
    try:
        return parser(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(key, f"invalid value {value!r} ({e})") from e


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """
    Read raw ``key = value`` pairs.

    Blank lines and lines starting with '#' are ignored.

    Raises:
        ConfigError: For malformed lines, unknown keys or duplicate keys
    """
    raw: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"line {lineno}", f"expected 'key = value', got {stripped!r}")
            key, value = (part.strip() for part in stripped.split("=", 1))
            if key not in _PARSERS:
                raise ConfigError(key, "unknown configuration key")
            if key in raw:
                raise ConfigError(key, "duplicate configuration key")
            raw[key] = value
    return raw


def resolve_config(
    preset: Optional[str] = None,
    config_path: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
) -> ExperimentConfig:
    """
    Combine preset, config file and command-line overrides, in that order.

    Args:
        preset: Preset name, e.g. "bandit-paper"
        config_path: Optional flat config file
        seed: Optional seed override
        output_dir: Optional output directory override

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: If neither a preset nor a config file naming env_kind is
            given, or any value is invalid
    """
    if preset is not None and preset not in PRESETS:
        raise ConfigError("preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")

    overrides: Dict[str, Any] = {}
    if config_path is not None:
        raw = read_config_file(config_path)
        overrides = {key: parse_value(key, value) for key, value in raw.items()}

    if preset is not None:
        base = PRESETS[preset]
    elif "env_kind" in overrides:
        base = PRESETS[DEFAULT_PRESET_FOR[overrides["env_kind"]]]
    else:
        raise ConfigError("preset", "a preset or a config file naming env_kind is required")

    if seed is not None:
        overrides["seed"] = seed
    if output_dir is not None:
        overrides["output_dir"] = output_dir
    return dataclasses.replace(base, **overrides).validate()
