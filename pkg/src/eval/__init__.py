"""
Offline evaluation: dataset manifests, metrics and seeded sweeps.
"""

from src.eval.dataset import (
    PENALTIES,
    EvalRecord,
    load_manifest,
    metric_name,
    record_metric,
    sample_records,
    truth_action,
    truth_pixel,
)
from src.eval.metrics import action_direction, bbox_metrics, cosine_metric, normalized_l2
from src.eval.sweep import (
    AblationResult,
    CellStats,
    OracleFactory,
    SweepResult,
    cell_stats,
    format_table,
    run_ablation,
    run_sweep,
    write_ablation_csv,
    write_category_csv,
    write_csv,
)

__all__ = [
    "PENALTIES",
    "AblationResult",
    "CellStats",
    "EvalRecord",
    "OracleFactory",
    "SweepResult",
    "action_direction",
    "bbox_metrics",
    "cell_stats",
    "cosine_metric",
    "format_table",
    "load_manifest",
    "metric_name",
    "normalized_l2",
    "record_metric",
    "run_ablation",
    "run_sweep",
    "sample_records",
    "truth_action",
    "truth_pixel",
    "write_ablation_csv",
    "write_category_csv",
    "write_csv",
]
