"""
Evaluation: before/after measurement, cross-engine runs, image export, reports
"""

from .report import (
    MetricsReport,
    PairedReport,
    compare,
    round2,
    fmt2,
    report_table,
    before_after_table,
    nn_vs_sfe_table,
    cross_engine_table,
    CER_CONVENTION,
    NO_PREPROCESSOR,
)
from .evaluate import evaluate, cross_engine_eval, export_images, run_preprocessor, side_by_side

__all__ = [
    "MetricsReport",
    "PairedReport",
    "compare",
    "round2",
    "fmt2",
    "report_table",
    "before_after_table",
    "nn_vs_sfe_table",
    "cross_engine_table",
    "CER_CONVENTION",
    "NO_PREPROCESSOR",
    "evaluate",
    "cross_engine_eval",
    "export_images",
    "run_preprocessor",
    "side_by_side",
]
