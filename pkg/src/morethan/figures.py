"""
CSV emitters for the evaluation figures.

- figure1.csv: bandit action probabilities, header ``d,m,action,probability``
- figure2.csv: CartPole observed returns, header ``run,d,m,episode,observed_return``,
  plus ``<stem>_summary.csv`` with ``d,m,mean,std`` pooled across runs

CSV is the contract; any external plotter can render the figures.
"""

import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .checkpoint import Checkpoint
from .evaluation import (
    BANDIT_DESIRE_GRID,
    CARTPOLE_DESIRE_GRID,
    CARTPOLE_EPISODES_PER_CELL,
    evaluate_bandit,
    evaluate_cartpole,
)
from .types import MORETHAN_VALUES, EnvKind

logger = logging.getLogger(__name__)

FIGURE1_HEADER = ("d", "m", "action", "probability")
FIGURE2_HEADER = ("run", "d", "m", "episode", "observed_return")
SUMMARY_HEADER = ("d", "m", "mean", "std")


def summary_path_for(out_path: Union[str, Path]) -> Path:
    """figure2.csv -> figure2_summary.csv, next to it."""
    out = Path(out_path)
    return out.with_name(f"{out.stem}_summary.csv")


def emit_figure1(checkpoint: Checkpoint, out_path: Union[str, Path]) -> Path:
    """
    Write bandit action probabilities over the 7 x 3 command grid.

    Actions are written 1-indexed (action i pays i).

    Raises:
        CheckpointError: If the checkpoint is not a bandit checkpoint
    """
    checkpoint.require_env(EnvKind.BANDIT)
    probs = evaluate_bandit(checkpoint.policy())

    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(FIGURE1_HEADER)
        for i, d in enumerate(BANDIT_DESIRE_GRID):
            for j, m in enumerate(MORETHAN_VALUES):
                for a in range(probs.shape[2]):
                    writer.writerow((d, m, a + 1, float(probs[i, j, a])))
    logger.info("Wrote %s", out)
    return out


def emit_figure2(
    checkpoints: Sequence[Checkpoint],
    out_path: Union[str, Path],
    episodes_per_cell: int = CARTPOLE_EPISODES_PER_CELL,
    seed: int = 0,
    desires: Sequence[float] = CARTPOLE_DESIRE_GRID,
) -> Tuple[Path, Path]:
    """
    Write CartPole desired-vs-observed returns for one or more trained runs.

    Run r is evaluated with its own random stream default_rng([seed, r]),
    so adding runs never changes the rows of earlier ones.

    Args:
        checkpoints: One CartPole checkpoint per run
        out_path: Destination of the per-episode CSV
        episodes_per_cell: Rollouts per (d, m) cell and run
        seed: Evaluation seed
        desires: Desired returns to evaluate

    Returns:
        Tuple of (per-episode CSV path, summary CSV path)

    Raises:
        CheckpointError: If any checkpoint is not a CartPole checkpoint
        ValueError: If no checkpoints are given
    """
    if not checkpoints:
        raise ValueError("emit_figure2 needs at least one checkpoint")
    for ckpt in checkpoints:
        ckpt.require_env(EnvKind.CARTPOLE)

    pooled: Dict[Tuple[float, int], List[float]] = {
        (d, m): [] for d in desires for m in MORETHAN_VALUES
    }
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(FIGURE2_HEADER)
        for run, ckpt in enumerate(checkpoints):
            policy = ckpt.policy()
            rng = np.random.default_rng([seed, run])
            for d in desires:
                for m in MORETHAN_VALUES:
                    returns = evaluate_cartpole(policy, d, m, episodes_per_cell, rng)
                    pooled[(d, m)].extend(returns)
                    for episode, observed in enumerate(returns):
                        writer.writerow((run, d, m, episode, observed))
            logger.info("Evaluated run %d of %d", run + 1, len(checkpoints))

    summary = write_summary(pooled, summary_path_for(out))
    logger.info("Wrote %s and %s", out, summary)
    return out, summary


def write_summary(
    pooled: Dict[Tuple[float, int], List[float]], out_path: Union[str, Path]
) -> Path:
    """Mean and population standard deviation per (d, m) cell."""
    out = Path(out_path)
    with open(out, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for (d, m), values in pooled.items():
            writer.writerow((d, m, float(np.mean(values)), float(np.std(values))))
    return out


def evaluate_checkpoint(
    checkpoint: Checkpoint,
    out_path: Union[str, Path],
    episodes_per_cell: Optional[int] = None,
    seed: int = 0,
) -> List[Path]:
    """
    Emit the figure matching the checkpoint's environment.

    Returns:
        Written paths (one for bandit, CSV and summary for CartPole)
    """
    if checkpoint.env_kind is EnvKind.BANDIT:
        return [emit_figure1(checkpoint, out_path)]
    if episodes_per_cell is None:
        episodes_per_cell = checkpoint.config.eval_episodes_per_cell
    return list(emit_figure2([checkpoint], out_path, episodes_per_cell, seed))


def read_csv_rows(path: Union[str, Path]) -> List[Dict[str, str]]:
    """Rows of an emitted CSV as dicts keyed by header."""
    with open(path, "r", newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
