"""
Multi-seed sweeps.

This module runs independent seeded trainings of one configuration into
per-seed directories, sequentially or in a process pool, and collects the
outcome of each run.
"""

import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Tuple

from ..config import ExperimentConfig
from ..harness import CHECKPOINT_FILENAME, run_training

SWEEP_FILENAME = "sweep.json"


@dataclass
class SweepResult:
    """Results from a sweep."""

    successful: List[Tuple[int, Path]] = field(default_factory=list)
    failed: List[Tuple[int, str]] = field(default_factory=list)
    final_returns: Dict[int, float] = field(default_factory=dict)

    @property
    def success_count(self) -> int:
        return len(self.successful)

    @property
    def error_count(self) -> int:
        return len(self.failed)

    @property
    def total_runs(self) -> int:
        return self.success_count + self.error_count

    @property
    def checkpoints(self) -> List[Path]:
        """Checkpoint paths of the successful runs, in seed order."""
        return [path for _, path in sorted(self.successful)]

    def save_json(self, output_path: str):
        """
        Save results to JSON file.

        Args:
            output_path: Path to output JSON file
        """
        data = {
            "successful": [{"seed": seed, "checkpoint": str(p)} for seed, p in self.successful],
            "failed": [{"seed": seed, "error": error} for seed, error in self.failed],
            "final_returns": {str(seed): value for seed, value in self.final_returns.items()},
            "summary": {
                "total_runs": self.total_runs,
                "successful": self.success_count,
                "failed": self.error_count,
            },
        }

        output_file = Path(output_path)
        output_file.parent.mkdir(parents=True, exist_ok=True)

        with open(output_file, "w") as f:
            json.dump(data, f, indent=2)


def run_seed(config: ExperimentConfig) -> Tuple[int, Path, Optional[float]]:
    """
    Train one seed to completion (module level so worker processes can pickle it).

    Returns:
        Tuple of (seed, checkpoint path, last iteration's mean return or None)
    """
    result = run_training(config)
    final = result.metrics[-1].mean_recent_return if result.metrics else None
    return config.seed, Path(config.output_dir) / CHECKPOINT_FILENAME, final


class SweepRunner:
    """
    Run one configuration over several seeds.

    Runs share nothing: each writes DIR/seed_<S>/ with its own metrics and
    checkpoint, so results do not depend on jobs.
    """

    def __init__(self, base: ExperimentConfig, output_dir: str, jobs: int = 1):
        """
        Initialize sweep runner.

        Args:
            base: Configuration shared by all runs (its seed is replaced)
            output_dir: Sweep directory
            jobs: Worker processes; 1 runs seeds in this process
        """
        if jobs < 1:
            raise ValueError(f"jobs must be positive, got {jobs}")
        self.base = base
        self.output_dir = Path(output_dir)
        self.jobs = jobs

        self.output_dir.mkdir(parents=True, exist_ok=True)

    def config_for(self, seed: int) -> ExperimentConfig:
        return dataclasses.replace(
            self.base, seed=seed, output_dir=str(self.output_dir / f"seed_{seed}")
        ).validate()

    def run(
        self,
        seeds: Iterable[int],
        reporter: Optional[Callable[[int, int, int], None]] = None,
    ) -> SweepResult:
        """
        Train every seed and write DIR/sweep.json.

        Args:
            seeds: Seeds to run
            reporter: Optional callback (index, total, seed), called in seed order as
                each run starts (jobs = 1) or as its result is awaited (jobs > 1)

        Returns:
            SweepResult with per-seed outcomes
        """
        seeds = list(dict.fromkeys(seeds))
        configs = [self.config_for(seed) for seed in seeds]
        result = SweepResult()

        def record(seed: int, outcome=None, error: Optional[str] = None):
            if error is not None:
                result.failed.append((seed, error))
                return
            _, path, final = outcome
            result.successful.append((seed, path))
            if final is not None:
                result.final_returns[seed] = final

        if self.jobs == 1:
            for i, config in enumerate(configs, 1):
                if reporter:
                    reporter(i, len(configs), config.seed)
                try:
                    record(config.seed, run_seed(config))
                except Exception as e:
                    record(config.seed, error=str(e))
        else:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                futures = [pool.submit(run_seed, config) for config in configs]
                for i, (config, future) in enumerate(zip(configs, futures), 1):
                    if reporter:
                        reporter(i, len(configs), config.seed)
                    try:
                        record(config.seed, future.result())
                    except Exception as e:
                        record(config.seed, error=str(e))

        result.save_json(str(self.output_dir / SWEEP_FILENAME))
        return result
