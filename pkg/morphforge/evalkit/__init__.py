# morphforge/evalkit/__init__.py

from .metrics import (
    POOLED,
    VARIANT_ORDER,
    DetPoint,
    MorphMatchRecord,
    OperatingPoint,
    ScoreSet,
    apcer,
    bpcer,
    bpcer_at_apcer,
    det_curve,
    mar,
    mar_table,
    threshold_at_far,
)
from .report import (
    ReportPaths,
    det_svg,
    emit_report,
    read_score_csv,
    read_similarity_csv,
    write_mar_csv,
    write_score_csv,
)

__all__ = [
    "POOLED",
    "VARIANT_ORDER",
    "DetPoint",
    "MorphMatchRecord",
    "OperatingPoint",
    "ReportPaths",
    "ScoreSet",
    "apcer",
    "bpcer",
    "bpcer_at_apcer",
    "det_curve",
    "det_svg",
    "emit_report",
    "mar",
    "mar_table",
    "read_score_csv",
    "read_similarity_csv",
    "threshold_at_far",
    "write_mar_csv",
    "write_score_csv",
]
