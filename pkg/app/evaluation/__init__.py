from app.evaluation.coverage import (
    WidthSummary,
    interval_coverage,
    mean_width,
    width_summary,
    mae_coverage,
    coverage_by_key,
    coverage_report,
)

__all__ = [
    "WidthSummary",
    "interval_coverage",
    "mean_width",
    "width_summary",
    "mae_coverage",
    "coverage_by_key",
    "coverage_report",
]
