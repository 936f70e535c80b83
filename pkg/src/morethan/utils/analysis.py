"""
Analysis utilities for emitted results.

This module checks figure CSVs and metrics files against the qualitative
outcomes a successful reproduction shows: concentrated bandit action
probabilities, CartPole returns that track the desired return, and a
growing share of m = -1 training labels.
"""

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from ..figures import read_csv_rows
from ..harness import read_metrics

# Bandit concentration thresholds
EXACT_MIN_PROBABILITY = 0.5
DIRECTIONAL_MIN_MASS = 0.8
ARGMAX_MIN_SHARE = 0.8

# CartPole bands: (m, desired values, lower factor, upper factor)
CARTPOLE_BANDS = (
    (0, (50, 100, 150), 0.7, 1.3),
    (1, (50, 100), 0.95, None),
    (-1, (100, 150), None, 0.5),
)

DIAGNOSTIC_WINDOW = 0.1


@dataclass
class AnalysisIssue:
    """Represents a single analysis issue."""

    severity: str  # 'error', 'warning'
    category: str  # 'figure1', 'figure2', 'metrics'
    message: str
    details: Dict = field(default_factory=dict)


@dataclass
class AnalysisReport:
    """Issues found for one source (a file or a group of files)."""

    source: str
    issues: List[AnalysisIssue] = field(default_factory=list)
    info: Dict = field(default_factory=dict)

    @property
    def has_errors(self) -> bool:
        """Check if there are any error-level issues."""
        return any(issue.severity == "error" for issue in self.issues)

    @property
    def error_count(self) -> int:
        return sum(1 for issue in self.issues if issue.severity == "error")

    @property
    def warning_count(self) -> int:
        return sum(1 for issue in self.issues if issue.severity == "warning")

    def error(self, category: str, message: str, **details):
        self.issues.append(AnalysisIssue("error", category, message, details))

    def warning(self, category: str, message: str, **details):
        self.issues.append(AnalysisIssue("warning", category, message, details))


def save_reports_json(reports: Sequence[AnalysisReport], output_path: str):
    """Save analysis reports to a JSON file."""
    data = {
        "summary": {
            "sources": len(reports),
            "total_errors": sum(r.error_count for r in reports),
            "total_warnings": sum(r.warning_count for r in reports),
        },
        "reports": {
            report.source: {
                "issues": [
                    {
                        "severity": issue.severity,
                        "category": issue.category,
                        "message": issue.message,
                        "details": issue.details,
                    }
                    for issue in report.issues
                ],
                "info": report.info,
            }
            for report in reports
        },
    }

    output_file = Path(output_path)
    output_file.parent.mkdir(parents=True, exist_ok=True)

    with open(output_file, "w") as f:
        json.dump(data, f, indent=2)


def _load_figure1(path: Union[str, Path]) -> np.ndarray:
    """probability[d, m + 1, action - 1] from a figure1 CSV."""
    rows = read_csv_rows(path)
    d_max = max(int(r["d"]) for r in rows)
    actions = max(int(r["action"]) for r in rows)
    probs = np.zeros((d_max + 1, 3, actions))
    for r in rows:
        probs[int(r["d"]), int(r["m"]) + 1, int(r["action"]) - 1] = float(r["probability"])
    return probs


def _bandit_failures(probs: np.ndarray) -> List[Tuple[str, int, float]]:
    """(condition, d, value) for every violated concentration condition."""
    failures = []
    actions = probs.shape[2]
    for d in range(1, actions + 1):
        p = probs[d, 1]
        if p[d - 1] < EXACT_MIN_PROBABILITY or int(np.argmax(p)) != d - 1:
            failures.append(("m=0 exact", d, float(p[d - 1])))
    for d in range(1, actions):
        mass = float(probs[d, 2, d:].sum())
        if mass < DIRECTIONAL_MIN_MASS:
            failures.append(("m=+1 above", d, mass))
    for d in range(2, actions + 1):
        mass = float(probs[d, 0, : d - 1].sum())
        if mass < DIRECTIONAL_MIN_MASS:
            failures.append(("m=-1 below", d, mass))
    return failures


def check_figure1(paths: Sequence[Union[str, Path]]) -> AnalysisReport:
    """
    Check bandit action probabilities, averaged over seeds.

    With m = 0 and d in 1..6 action d must be the argmax with probability
    >= 0.5; with m = +1 (d in 1..5) the mass above d, and with m = -1
    (d in 2..6) the mass below d, must be >= 0.8. At least 80% of the
    individual seeds must have the m = 0 argmax right everywhere.
    """
    report = AnalysisReport(source=", ".join(str(p) for p in paths))
    if not paths:
        report.error("figure1", "no figure1 files given")
        return report

    per_seed = [_load_figure1(p) for p in paths]
    mean_probs = np.mean(per_seed, axis=0)
    for condition, d, value in _bandit_failures(mean_probs):
        report.error("figure1", f"{condition} fails at d={d} (value {value:.3f})", d=d)

    argmax_ok = [
        all(int(np.argmax(p[d, 1])) == d - 1 for d in range(1, p.shape[2] + 1)) for p in per_seed
    ]
    share = sum(argmax_ok) / len(argmax_ok)
    report.info["argmax_share"] = share
    if share < ARGMAX_MIN_SHARE:
        report.error(
            "figure1",
            f"only {sum(argmax_ok)}/{len(argmax_ok)} seeds have the m=0 argmax at d",
            share=share,
        )
    return report


def check_figure2(path: Union[str, Path]) -> AnalysisReport:
    """
    Check pooled CartPole desired-vs-observed medians.

    m = 0: median within [0.7 d, 1.3 d] for d in 50, 100, 150.
    m = +1: median >= 0.95 d for d in 50, 100.
    m = -1: median <= 0.5 d for d in 100, 150.
    """
    report = AnalysisReport(source=str(path))
    observed: Dict[Tuple[float, int], List[float]] = defaultdict(list)
    for r in read_csv_rows(path):
        observed[(float(r["d"]), int(r["m"]))].append(float(r["observed_return"]))

    for m, desires, low, high in CARTPOLE_BANDS:
        for d in desires:
            values = observed.get((float(d), m))
            if not values:
                report.warning("figure2", f"no episodes for d={d}, m={m}")
                continue
            median = float(np.median(values))
            report.info[f"median_d{d}_m{m}"] = median
            if (low is not None and median < low * d) or (high is not None and median > high * d):
                report.error(
                    "figure2",
                    f"d={d}, m={m}: median observed return {median:.1f} outside the expected band",
                    d=d,
                    m=m,
                    median=median,
                )
    return report


def check_metrics(path: Union[str, Path]) -> AnalysisReport:
    """
    Check a metrics.jsonl stream.

    Steps must never decrease, label frequencies must sum to 1, and the
    m = -1 share averaged over the last 10% of iterations must exceed the
    share over the first 10%.
    """
    report = AnalysisReport(source=str(path))
    records = read_metrics(path)
    if not records:
        report.error("metrics", "no metrics records")
        return report

    steps = [r.env_steps_so_far for r in records]
    if any(b < a for a, b in zip(steps, steps[1:])):
        report.error("metrics", "env_steps_so_far decreases")
    for r in records:
        if abs(sum(r.m_label_frequencies) - 1.0) > 1e-9:
            report.error("metrics", f"iteration {r.iteration}: label frequencies do not sum to 1")

    window = max(1, int(len(records) * DIAGNOSTIC_WINDOW))
    early = float(np.mean([r.m_label_frequencies[0] for r in records[:window]]))
    late = float(np.mean([r.m_label_frequencies[0] for r in records[-window:]]))
    report.info.update(early_below_share=early, late_below_share=late)
    if len(records) < 2:
        report.warning("metrics", "too few iterations to compare label frequencies")
    elif late <= early:
        report.error(
            "metrics",
            f"m=-1 label share did not grow ({early:.3f} early, {late:.3f} late)",
            early=early,
            late=late,
        )
    return report
