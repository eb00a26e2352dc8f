from app.core.errors import (
    IntervalError,
    ConfigError,
    DataError,
)
from app.core.types import (
    EPSILON,
    CalibrationSet,
    ConfidenceLevel,
    Interval,
    IntervalSet,
    IntervalTable,
    ScoreFunction,
    TableWarning,
)
from app.core.scores import score, compute_scores, invert_score, invert_scores, invert_raw
from app.core.quantiles import (
    conformal_quantile,
    conformal_rank,
    conformal_p_value,
    empirical_quantile,
    weighted_quantile,
    weighted_quantiles,
)
from app.core.intervals import contiguize, merge_intervals, intersect_bin

__all__ = [
    "IntervalError",
    "ConfigError",
    "DataError",
    "EPSILON",
    "CalibrationSet",
    "ConfidenceLevel",
    "Interval",
    "IntervalSet",
    "IntervalTable",
    "ScoreFunction",
    "TableWarning",
    "score",
    "compute_scores",
    "invert_score",
    "invert_scores",
    "invert_raw",
    "conformal_quantile",
    "conformal_rank",
    "conformal_p_value",
    "empirical_quantile",
    "weighted_quantile",
    "weighted_quantiles",
    "contiguize",
    "merge_intervals",
    "intersect_bin",
]
