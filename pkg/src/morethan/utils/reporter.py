"""
Progress and results reporting utilities.

This module provides the console side of the CLI: banners, per-iteration
training progress, sweep and self-test summaries. Library modules log; only
the reporter prints.
"""

import sys
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, List

from ..config import ExperimentConfig
from ..harness import MetricsRecord, TrainingResult

if TYPE_CHECKING:
    from ..selftest import SelfTestResult
    from .analysis import AnalysisReport
    from .sweep import SweepResult


class TrainingReporter:
    """
    Reports progress and results for training runs.

    Provides formatted console output with progress lines, status
    messages and summary statistics.
    """

    def __init__(self, verbose: bool = False, quiet: bool = False, log_every: int = 10):
        """
        Initialize reporter.

        Args:
            verbose: Print every iteration and extra details
            quiet: Suppress progress output (only show summary and errors)
            log_every: Iterations between progress lines when not verbose
        """
        self.verbose = verbose
        self.quiet = quiet
        self.log_every = max(1, log_every)

    def print_header(self, title: str, width: int = 80):
        if self.quiet:
            return

        print("=" * width)
        print(title)
        print("=" * width)

    def print_section(self, title: str, width: int = 80):
        if self.quiet:
            return

        print(f"\n{title}")
        print("-" * width)

    def report_config(self, config: ExperimentConfig):
        """
        Report the resolved configuration of a run.

        Args:
            config: Resolved experiment configuration
        """
        if self.quiet:
            return

        print(f"\nEnvironment: {config.env_kind.value}")
        print(f"  Seed: {config.seed}")
        print(f"  Env steps: {config.total_env_steps:,}")
        capacity = "unbounded" if config.buffer_capacity is None else config.buffer_capacity
        print(f"  Buffer capacity: {capacity}")
        print(
            f"  Per iteration: {config.episodes_per_iteration} episodes, "
            f"{config.batches_per_iteration} x {config.batch_size} segments, "
            f"{config.permutations_per_batch} permutations"
        )
        print(f"  Optimizer: {config.optimizer.value} ({config.step_size})")

        if self.verbose:
            for key, value in config.to_dict().items():
                print(f"    {key} = {value}")

    def report_iteration(self, record: MetricsRecord):
        """
        Report one training iteration (every log_every-th unless verbose).

        Args:
            record: Metrics of the finished iteration
        """
        if self.quiet:
            return
        if not self.verbose and record.iteration % self.log_every != 0:
            return

        below, equal, above = record.m_label_frequencies
        print(
            f"[{record.iteration:>5}] steps {record.env_steps_so_far:>8,}  "
            f"return {record.mean_recent_return:8.2f}  "
            f"loss {record.mean_batch_loss:.4f}  "
            f"m(-1/0/+1) {below:.2f}/{equal:.2f}/{above:.2f}"
        )

    def report_file_success(self, output_path: Path):
        if self.quiet:
            return

        size = output_path.stat().st_size if output_path.exists() else 0
        print(f"   ✓ Wrote {output_path}" + (f" ({size:,} bytes)" if size else ""))

    def print_summary(self, result: TrainingResult):
        """
        Print the end-of-training summary.

        Args:
            result: TrainingResult of the run
        """
        self.print_section("TRAINING SUMMARY", width=80)
        state = result.state
        status = "finished" if result.finished else "paused"
        print(f"\nRun {status} after {state.iteration} iterations")
        print(f"  Env steps: {state.env_steps:,}")
        print(f"  Episodes: {state.episodes:,}")
        if result.metrics:
            last = result.metrics[-1]
            print(f"  Last mean return: {last.mean_recent_return:.2f}")
            print(f"  Last mean loss: {last.mean_batch_loss:.4f}")

    def print_sweep_summary(self, result: "SweepResult"):
        self.print_section("SWEEP SUMMARY", width=80)

        print(f"\nRuns: {result.total_runs}")
        print(f"  ✓ Successful: {result.success_count}")
        print(f"  ✗ Failed: {result.error_count}")

        if result.final_returns:
            print("\nFinal mean returns:")
            for seed, value in sorted(result.final_returns.items()):
                print(f"  seed {seed}: {value:.2f}")

        if result.failed and not self.quiet:
            print(f"\n✗ Failed runs ({len(result.failed)}):")
            for seed, error in result.failed[:10]:
                error_short = error[:80] + "..." if len(error) > 80 else error
                print(f"  • seed {seed}: {error_short}")
            if len(result.failed) > 10:
                print(f"  ... and {len(result.failed) - 10} more")

    def print_selftest(self, results: Iterable["SelfTestResult"]):
        """Print one line per property suite."""
        for r in results:
            mark = "✓" if r.passed else "✗"
            stream = sys.stdout if r.passed else sys.stderr
            print(
                f"  {mark} {r.name}: {r.cases} cases, worst {r.worst:.3g} "
                f"(limit {r.tolerance:.3g}), {r.seconds:.2f}s",
                file=stream,
            )

    def print_report(self, reports: List["AnalysisReport"]):
        """Print analysis issues grouped by source."""
        for report in reports:
            self.print_section(f"{report.source}", width=80)
            if not report.issues:
                print("  ✓ All checks passed")
                continue
            for issue in report.issues:
                mark = "✗" if issue.severity == "error" else "⚠️ "
                print(f"  {mark} [{issue.category}] {issue.message}")

    def print_info(self, message: str):
        if not self.quiet:
            print(message)

    def print_error(self, message: str):
        print(f"✗ Error: {message}", file=sys.stderr)
