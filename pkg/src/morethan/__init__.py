"""
morethan

Online upside-down reinforcement learning with ternary "morethan" command
units. A command (d, h, m) asks the agent for a return less than (m = -1),
equal to (m = 0) or greater than (m = +1) the desired return d within h
steps. Policies are trained by supervised learning on hindsight-relabeled
segment pairs, on a six-armed bandit and on CartPole.

All numerics (networks, optimizers, environments) are plain numpy and
deterministic per seed.
"""

from .agent import (
    Policy,
    UniformRandomPolicy,
    act,
    build_policy,
    decode_command,
    encode_command,
    encode_commands,
    exploratory_command,
    update_command,
)
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .config import PRESETS, ExperimentConfig, resolve_config
from .envs import (
    BanditEnv,
    CartPoleEnv,
    CartPoleState,
    bandit_step,
    cartpole_reset,
    cartpole_step,
    rollout,
)
from .evaluation import evaluate_bandit, evaluate_cartpole
from .figures import emit_figure1, emit_figure2
from .harness import MetricsRecord, TrainingResult, run_training, train
from .nn_core import (
    DenseLayer,
    GatedPolicyNet,
    OptimizerState,
    backward,
    build_policy_net,
    cross_entropy,
    forward,
    make_optimizer,
    optimizer_step,
    orthogonal_init,
    softmax,
    train_step,
)
from .replay import (
    Episode,
    ReplayBuffer,
    Segment,
    TrainingSample,
    extract_segment,
    make_training_batch,
    relabel_pair,
    sample_segments,
)
from .types import (
    Activation,
    ArchTag,
    CheckpointError,
    Command,
    ConfigError,
    DimensionError,
    EnvironmentStateError,
    EnvKind,
    MorethanError,
    OptimizerKind,
    ReplayError,
    StepResult,
)

__version__ = "0.1.0"
__all__ = [
    # Enums
    "EnvKind",
    "Activation",
    "ArchTag",
    "OptimizerKind",
    # Data types
    "Command",
    "StepResult",
    "Episode",
    "Segment",
    "TrainingSample",
    # Errors
    "MorethanError",
    "ConfigError",
    "DimensionError",
    "EnvironmentStateError",
    "ReplayError",
    "CheckpointError",
    # Networks
    "DenseLayer",
    "GatedPolicyNet",
    "OptimizerState",
    "orthogonal_init",
    "build_policy_net",
    "forward",
    "softmax",
    "cross_entropy",
    "backward",
    "make_optimizer",
    "optimizer_step",
    "train_step",
    # Environments
    "BanditEnv",
    "CartPoleEnv",
    "CartPoleState",
    "bandit_step",
    "cartpole_reset",
    "cartpole_step",
    "rollout",
    # Replay
    "ReplayBuffer",
    "extract_segment",
    "sample_segments",
    "relabel_pair",
    "make_training_batch",
    # Agent
    "Policy",
    "UniformRandomPolicy",
    "build_policy",
    "encode_command",
    "encode_commands",
    "decode_command",
    "act",
    "update_command",
    "exploratory_command",
    "evaluate_bandit",
    "evaluate_cartpole",
    # Harness
    "ExperimentConfig",
    "PRESETS",
    "resolve_config",
    "MetricsRecord",
    "TrainingResult",
    "train",
    "run_training",
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "emit_figure1",
    "emit_figure2",
]
