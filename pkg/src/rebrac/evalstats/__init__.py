"""Evaluation statistics over swept runs: expected online performance,
performance profiles, probability of improvement, score tables."""

from .eop import (
    ORACLE_MAX_N,
    EopCurve,
    eop,
    eop_curve,
    eop_oracle,
    eop_oracle_std,
    eop_std,
)
from .profiles import (
    performance_profile,
    probability_of_improvement,
    probability_of_improvement_tables,
)
from .table import ScoreTable, format_percent_change, percent_change

__all__ = [
    "EopCurve",
    "ORACLE_MAX_N",
    "ScoreTable",
    "eop",
    "eop_curve",
    "eop_oracle",
    "eop_oracle_std",
    "eop_std",
    "format_percent_change",
    "percent_change",
    "performance_profile",
    "probability_of_improvement",
    "probability_of_improvement_tables",
]
