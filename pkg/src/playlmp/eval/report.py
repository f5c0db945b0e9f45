"""Delimited-text and structured report emission.

File contents are deterministic given seeds: sorted keys, repr floats,
no timestamps.
"""

from __future__ import annotations

import json
from pathlib import Path

from .coverage import CoverageCurve
from .harness import EvalReport, RobustnessTable


def eval_report_rows(report: EvalReport) -> list[str]:
    rows = ["task,n,successes,rate,ci_low,ci_high"]
    for result in report.results + [report.aggregate]:
        lo, hi = result.ci
        rows.append(f"{result.task_id},{result.n},{result.successes},"
                    f"{result.rate!r},{lo!r},{hi!r}")
    return rows


def write_eval_report(report: EvalReport, path_base) -> tuple[Path, Path]:
    """Write <base>.csv and <base>.json; returns both paths."""
    base = Path(path_base)
    csv_path = base.with_suffix(".csv")
    csv_path.write_text("\n".join(eval_report_rows(report)) + "\n")
    payload = {
        "n_rollouts": report.n_rollouts,
        "radius": report.radius,
        "seed": report.seed,
        "manifest_hash": report.manifest_hash,
        "ci_method": report.ci_method,
        "aggregate": {"n": report.aggregate.n, "successes": report.aggregate.successes},
        "tasks": {r.task_id: {"n": r.n, "successes": r.successes} for r in report.results},
    }
    json_path = base.with_suffix(".json")
    json_path.write_text(json.dumps(payload, sort_keys=True, indent=1))
    return csv_path, json_path


def write_robustness_table(table: RobustnessTable, models: list, path_base):
    base = Path(path_base)
    rows = ["model,radius,success_rate"]
    for model in models:
        for radius in table.radii:
            rows.append(f"{model},{radius!r},{table.rates[(model, radius)]!r}")
    csv_path = base.with_suffix(".csv")
    csv_path.write_text("\n".join(rows) + "\n")
    payload = {
        "radii": list(table.radii),
        "rates": {m: [table.rates[(m, r)] for r in table.radii] for m in models},
        "slopes": {m: table.slope(m) for m in models},
    }
    json_path = base.with_suffix(".json")
    json_path.write_text(json.dumps(payload, sort_keys=True, indent=1))
    return csv_path, json_path


def write_coverage_curves(curves: dict, path_base):
    base = Path(path_base)
    rows = ["dataset,ticks,unique_bins"]
    for name in sorted(curves):
        for ticks, count in curves[name].points:
            rows.append(f"{name},{ticks},{count}")
    csv_path = base.with_suffix(".csv")
    csv_path.write_text("\n".join(rows) + "\n")
    payload = {name: {"points": curve.points, "final": curve.final_count}
               for name, curve in sorted(curves.items())}
    json_path = base.with_suffix(".json")
    json_path.write_text(json.dumps(payload, sort_keys=True, indent=1))
    return csv_path, json_path
