"""Evaluation harness: tasks, robustness, coverage, plan embeddings."""

from .coverage import (
    CoverageCurve,
    coverage_analysis,
    coverage_curve,
    final_counts_at_common_duration,
)
from .embed import (
    demo_windows,
    export_plan_embeddings,
    linear_probe_accuracy,
    write_embedding_table,
)
from .harness import (
    ROBUSTNESS_RADII,
    EvalReport,
    ExpertPolicy,
    RandomPolicy,
    RobustnessTable,
    TaskResult,
    evaluate,
    had_retry,
    retry_statistic,
    robustness_sweep,
    run_rollout,
    split_demos,
    wilson_interval,
)
from .report import (
    write_coverage_curves,
    write_eval_report,
    write_robustness_table,
)

__all__ = [
    "CoverageCurve",
    "EvalReport",
    "ExpertPolicy",
    "ROBUSTNESS_RADII",
    "RandomPolicy",
    "RobustnessTable",
    "TaskResult",
    "coverage_analysis",
    "coverage_curve",
    "demo_windows",
    "evaluate",
    "export_plan_embeddings",
    "final_counts_at_common_duration",
    "had_retry",
    "linear_probe_accuracy",
    "retry_statistic",
    "robustness_sweep",
    "run_rollout",
    "split_demos",
    "wilson_interval",
    "write_coverage_curves",
    "write_embedding_table",
    "write_eval_report",
    "write_robustness_table",
]
