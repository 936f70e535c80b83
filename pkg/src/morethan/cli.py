"""
Command-line interface for morethan experiments.

This module provides CLI commands for training and evaluating
command-conditioned agents:
- train: Train one seeded run from a preset and/or config file
- eval: Evaluate a checkpoint (figure1 for bandit, figure2 for CartPole)
- figure1 / figure2: Emit the figure CSVs from checkpoints
- selftest: Run the gradient, orthogonality, relabeling and physics suites
- sweep: Train several seeds of one configuration
- report: Check emitted figures and metrics against expected outcomes
"""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .checkpoint import load_checkpoint
from .config import PRESETS, resolve_config
from .evaluation import CARTPOLE_EPISODES_PER_CELL
from .figures import emit_figure1, emit_figure2, evaluate_checkpoint
from .harness import CHECKPOINT_FILENAME, METRICS_FILENAME, run_training
from .selftest import run_selftests
from .types import MorethanError
from .utils.analysis import check_figure1, check_figure2, check_metrics, save_reports_json
from .utils.reporter import TrainingReporter
from .utils.sweep import SWEEP_FILENAME, SweepRunner


def configure_logging(verbose: bool = False):
    """Library modules log through the root logger; --verbose shows DEBUG records."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
    )


def train_run(
    preset: Optional[str] = None,
    config_path: Optional[str] = None,
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
    resume: Optional[str] = None,
    max_iterations: Optional[int] = None,
    verbose: bool = False,
    quiet: bool = False,
) -> int:
    """
    Train one run and write metrics.jsonl and checkpoint.txt.

    When resuming without a preset or config file, the checkpoint's own
    configuration is used (with --out still honored).

    Returns:
        0 on success, 1 on error
    """
    reporter = TrainingReporter(verbose=verbose, quiet=quiet)
    try:
        checkpoint = load_checkpoint(resume) if resume else None
        if checkpoint is not None and preset is None and config_path is None:
            config = checkpoint.config
            if output_dir is not None:
                config = dataclasses.replace(config, output_dir=output_dir)
        else:
            config = resolve_config(preset, config_path, seed=seed, output_dir=output_dir)
        reporter.log_every = config.log_every

        reporter.print_header("MORETHAN TRAINING" + (" (resumed)" if checkpoint else ""))
        reporter.report_config(config)
        reporter.print_section("PROGRESS")

        result = run_training(
            config,
            resume=checkpoint,
            max_iterations=max_iterations,
            on_record=reporter.report_iteration,
        )

        reporter.print_summary(result)
        out_dir = Path(config.output_dir)
        reporter.report_file_success(out_dir / METRICS_FILENAME)
        reporter.report_file_success(out_dir / CHECKPOINT_FILENAME)
        return 0
    except (MorethanError, OSError) as e:
        reporter.print_error(str(e))
        return 1


def eval_checkpoint(
    checkpoint_path: str,
    output_path: str,
    episodes_per_cell: Optional[int] = None,
    seed: int = 0,
) -> int:
    """
    Evaluate a checkpoint with the protocol of its environment.

    Returns:
        0 on success, 1 on error
    """
    try:
        checkpoint = load_checkpoint(checkpoint_path)
        for path in evaluate_checkpoint(checkpoint, output_path, episodes_per_cell, seed):
            print(f"✓ Wrote {path}")
        return 0
    except (MorethanError, OSError, ValueError) as e:
        print(f"✗ Error: {e}", file=sys.stderr)
        return 1


def figure1(checkpoint_path: str, output_path: str) -> int:
    """
    Emit bandit action probabilities.

    Returns:
        0 on success, 1 on error
    """
    try:
        path = emit_figure1(load_checkpoint(checkpoint_path), output_path)
        print(f"✓ Wrote {path}")
        return 0
    except (MorethanError, OSError) as e:
        print(f"✗ Error: {e}", file=sys.stderr)
        return 1


def figure2(
    checkpoint_paths: List[str],
    output_path: str,
    episodes_per_cell: int = CARTPOLE_EPISODES_PER_CELL,
    seed: int = 0,
) -> int:
    """
    Emit CartPole desired-vs-observed returns pooled over checkpoints.

    Returns:
        0 on success, 1 on error
    """
    try:
        checkpoints = [load_checkpoint(p) for p in checkpoint_paths]
        for path in emit_figure2(checkpoints, output_path, episodes_per_cell, seed):
            print(f"✓ Wrote {path}")
        return 0
    except (MorethanError, OSError, ValueError) as e:
        print(f"✗ Error: {e}", file=sys.stderr)
        return 1


def selftest(seed: int = 0, random_play: bool = True) -> int:
    """
    Run the property suites.

    Returns:
        0 if every suite passes, 1 otherwise
    """
    reporter = TrainingReporter()
    reporter.print_header("MORETHAN SELF-TEST")
    results = run_selftests(seed=seed, include_random_play=random_play)
    reporter.print_selftest(results)
    failed = [r.name for r in results if not r.passed]
    if failed:
        reporter.print_error(f"failed suites: {', '.join(failed)}")
        return 1
    print(f"\n✓ All {len(results)} suites passed")
    return 0


def sweep(
    seeds: List[int],
    output_dir: str,
    preset: Optional[str] = None,
    config_path: Optional[str] = None,
    jobs: int = 1,
    quiet: bool = False,
) -> int:
    """
    Train one configuration over several seeds into DIR/seed_<S>/.

    Returns:
        0 if every run succeeded, 1 otherwise
    """
    reporter = TrainingReporter(quiet=quiet)
    try:
        base = resolve_config(preset, config_path)
        runner = SweepRunner(base, output_dir, jobs=jobs)
    except (MorethanError, OSError, ValueError) as e:
        reporter.print_error(str(e))
        return 1

    reporter.print_header(f"MORETHAN SWEEP ({len(seeds)} seeds, {jobs} jobs)")
    reporter.report_config(base)

    def progress(i: int, total: int, seed: int):
        reporter.print_info(f"\n[{i}/{total}] seed {seed}")

    result = runner.run(seeds, reporter=progress)
    reporter.print_sweep_summary(result)
    reporter.report_file_success(Path(output_dir) / SWEEP_FILENAME)
    return 0 if result.error_count == 0 else 1


def report(
    figure1_paths: Optional[List[str]] = None,
    figure2_path: Optional[str] = None,
    metrics_paths: Optional[List[str]] = None,
    output_json: Optional[str] = None,
) -> int:
    """
    Check emitted results.

    Returns:
        0 if no error-level issue was found, 1 otherwise
    """
    reporter = TrainingReporter()
    try:
        reports = []
        if figure1_paths:
            reports.append(check_figure1(figure1_paths))
        if figure2_path:
            reports.append(check_figure2(figure2_path))
        for path in metrics_paths or []:
            reports.append(check_metrics(path))
    except (OSError, KeyError, ValueError) as e:
        reporter.print_error(f"cannot read results: {e}")
        return 1

    if not reports:
        reporter.print_error("nothing to check; pass --figure1, --figure2 or --metrics")
        return 1

    reporter.print_header("MORETHAN RESULTS REPORT")
    reporter.print_report(reports)
    if output_json:
        save_reports_json(reports, output_json)
        reporter.report_file_success(Path(output_json))

    errors = sum(r.error_count for r in reports)
    warnings = sum(r.warning_count for r in reports)
    print(f"\nSummary: {errors} errors, {warnings} warnings")
    return 0 if errors == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morethan",
        description="Upside-down RL with ternary morethan command units",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Train command
    train_parser = subparsers.add_parser(
        "train",
        help="Train one seeded run",
        description="Train from a preset and/or a flat key = value config file",
    )
    train_parser.add_argument("--preset", choices=sorted(PRESETS), help="Named preset")
    train_parser.add_argument("--config", help="Config file (key = value lines)")
    train_parser.add_argument("--seed", type=int, help="Seed override")
    train_parser.add_argument("--out", help="Output directory override")
    train_parser.add_argument("--resume", help="Checkpoint to continue from")
    train_parser.add_argument(
        "--max-iterations",
        type=int,
        help="Pause once this many iterations have completed (resume later)",
    )
    train_parser.add_argument("-v", "--verbose", action="store_true", help="Verbose output")
    train_parser.add_argument("-q", "--quiet", action="store_true", help="Only print the summary")

    # Eval command
    eval_parser = subparsers.add_parser("eval", help="Evaluate a checkpoint")
    eval_parser.add_argument("--checkpoint", required=True, help="Checkpoint file")
    eval_parser.add_argument("--out", required=True, help="Output CSV")
    eval_parser.add_argument(
        "--episodes-per-cell",
        type=int,
        help="CartPole rollouts per (d, m) cell (default: from the checkpoint's config)",
    )
    eval_parser.add_argument("--seed", type=int, default=0, help="Evaluation seed (default: 0)")

    # Figure commands
    fig1_parser = subparsers.add_parser("figure1", help="Bandit action probabilities CSV")
    fig1_parser.add_argument("--checkpoint", required=True, help="Bandit checkpoint")
    fig1_parser.add_argument("--out", default="figure1.csv", help="Output CSV")

    fig2_parser = subparsers.add_parser("figure2", help="CartPole desired vs. observed CSV")
    fig2_parser.add_argument(
        "--checkpoint", required=True, nargs="+", help="CartPole checkpoint(s), one per run"
    )
    fig2_parser.add_argument("--out", default="figure2.csv", help="Output CSV")
    fig2_parser.add_argument(
        "--episodes-per-cell",
        type=int,
        default=CARTPOLE_EPISODES_PER_CELL,
        help=f"Rollouts per (d, m) cell and run (default: {CARTPOLE_EPISODES_PER_CELL})",
    )
    fig2_parser.add_argument("--seed", type=int, default=0, help="Evaluation seed (default: 0)")

    # Selftest command
    selftest_parser = subparsers.add_parser("selftest", help="Run the property suites")
    selftest_parser.add_argument("--seed", type=int, default=0, help="Seed (default: 0)")
    selftest_parser.add_argument(
        "--skip-random-play",
        action="store_true",
        help="Skip the random-policy CartPole check against its Monte-Carlo band",
    )

    # Sweep command
    sweep_parser = subparsers.add_parser("sweep", help="Train several seeds")
    sweep_parser.add_argument("--preset", choices=sorted(PRESETS), help="Named preset")
    sweep_parser.add_argument("--config", help="Config file (key = value lines)")
    sweep_parser.add_argument("--seeds", type=int, nargs="+", required=True, help="Seeds")
    sweep_parser.add_argument("--out", required=True, help="Sweep directory")
    sweep_parser.add_argument("-j", "--jobs", type=int, default=1, help="Worker processes")
    sweep_parser.add_argument("-q", "--quiet", action="store_true", help="Only print the summary")

    # Report command
    report_parser = subparsers.add_parser("report", help="Check emitted figures and metrics")
    report_parser.add_argument("--figure1", nargs="+", help="figure1 CSV(s), one per seed")
    report_parser.add_argument("--figure2", help="Pooled figure2 CSV")
    report_parser.add_argument("--metrics", nargs="+", help="metrics.jsonl file(s)")
    report_parser.add_argument("--json", help="Save the report as JSON")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(getattr(args, "verbose", False))

    if args.command == "train":
        if args.preset is None and args.config is None and args.resume is None:
            parser.error("train requires --preset, --config or --resume")
        return train_run(
            preset=args.preset,
            config_path=args.config,
            seed=args.seed,
            output_dir=args.out,
            resume=args.resume,
            max_iterations=args.max_iterations,
            verbose=args.verbose,
            quiet=args.quiet,
        )
    elif args.command == "eval":
        return eval_checkpoint(args.checkpoint, args.out, args.episodes_per_cell, args.seed)
    elif args.command == "figure1":
        return figure1(args.checkpoint, args.out)
    elif args.command == "figure2":
        return figure2(args.checkpoint, args.out, args.episodes_per_cell, args.seed)
    elif args.command == "selftest":
        return selftest(seed=args.seed, random_play=not args.skip_random_play)
    elif args.command == "sweep":
        if args.preset is None and args.config is None:
            parser.error("sweep requires --preset or --config")
        return sweep(
            seeds=args.seeds,
            output_dir=args.out,
            preset=args.preset,
            config_path=args.config,
            jobs=args.jobs,
            quiet=args.quiet,
        )
    elif args.command == "report":
        return report(args.figure1, args.figure2, args.metrics, args.json)
    else:
        parser.print_help()
        return 1


if __name__ == "__main__":
    sys.exit(main())
