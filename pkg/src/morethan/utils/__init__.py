"""
Utility modules for morethan tools.

This package provides shared functionality for console reporting, multi-seed
sweeps and result analysis.
"""

from .analysis import (
    AnalysisIssue,
    AnalysisReport,
    check_figure1,
    check_figure2,
    check_metrics,
)
from .reporter import TrainingReporter
from .sweep import SweepResult, SweepRunner

__all__ = [
    "TrainingReporter",
    "SweepRunner",
    "SweepResult",
    "AnalysisIssue",
    "AnalysisReport",
    "check_figure1",
    "check_figure2",
    "check_metrics",
]
