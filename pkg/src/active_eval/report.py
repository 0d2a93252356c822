"""Report serialization: CSV and JSON renderings of a sweep, plus the
per-curve point lists used for external figure generation.

The JSON form is the round-trip format; loading it back reproduces the
ExperimentReport losslessly. CSV is a one-way rendering with one row per
(method, budget) cell.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict

from .errors import DataError
from .harness import ExperimentReport, ReportRow, SkippedCell

CSV_COLUMNS = [
    "method",
    "stratification",
    "allocation",
    "strata",
    "h_eff",
    "delta",
    "budget",
    "trials",
    "seed",
    "mean_estimate",
    "pool_risk",
    "mse",
    "relative_mse",
    "sem",
]


def report_to_json_obj(report: ExperimentReport) -> dict:
    return {
        "pool_risk": report.pool_risk,
        "pool_size": report.pool_size,
        "trials": report.trials,
        "master_seed": report.master_seed,
        "shared_seeds": report.shared_seeds,
        "rows": [asdict(row) for row in report.rows],
        "skipped": [asdict(cell) for cell in report.skipped],
    }


def report_from_json_obj(obj: dict) -> ExperimentReport:
    try:
        return ExperimentReport(
            pool_risk=obj["pool_risk"],
            pool_size=obj["pool_size"],
            trials=obj["trials"],
            master_seed=obj["master_seed"],
            shared_seeds=obj["shared_seeds"],
            rows=[ReportRow(**row) for row in obj["rows"]],
            skipped=[SkippedCell(**cell) for cell in obj["skipped"]],
        )
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed report document: {exc}") from exc


def write_json(report: ExperimentReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report_to_json_obj(report), fh, indent=2)
        fh.write("\n")


def load_json(path) -> ExperimentReport:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON: {exc}") from exc
    return report_from_json_obj(obj)


def write_csv(report: ExperimentReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in report.rows:
            record = asdict(row)
            writer.writerow({key: _csv_value(record[key]) for key in CSV_COLUMNS})


def plot_data(report: ExperimentReport) -> dict:
    """Per-method curves for external plotting.

    Each method maps to a list of points ordered by budget with the cell's
    mse, relative mse and sem.
    """
    curves: dict = {}
    for row in sorted(report.rows, key=lambda r: (r.method, r.budget)):
        curves.setdefault(row.method, []).append(
            {
                "budget": row.budget,
                "mse": row.mse,
                "relative_mse": row.relative_mse,
                "sem": row.sem,
            }
        )
    return curves


def _csv_value(value):
    if value is None:
        return ""
    return value
