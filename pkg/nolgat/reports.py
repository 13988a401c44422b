"""Result files for experiments and evaluations."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence

import numpy as np
import pandas as pd

from .errors import DataError
from .pipeline.metrics import METRIC_NAMES, MetricsReport, compute_metrics

RUN_COLUMNS = [
    "pair_id",
    "model",
    "knn_k",
    "label_fraction",
    "repetition",
    "seed",
    "accuracy",
    "macro_f1",
    "interest_f1",
    "tp",
    "tn",
    "fp",
    "fn",
    "embedding_diversity",
    "final_loss",
]


def _timestamp() -> str:
    return datetime.now(timezone.utc).replace(tzinfo=None).isoformat() + "Z"


def dumps_results(payload: Mapping[str, Any]) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def write_results_json(payload: Mapping[str, Any], path: Path) -> Path:
    """Sorted-key JSON; ``generated_at`` is the only field that varies between identical runs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = dict(payload)
    document["generated_at"] = _timestamp()
    path.write_text(dumps_results(document) + "\n", encoding="utf-8")
    return path


def write_runs_csv(runs: Sequence[Mapping[str, Any]], path: Path) -> Path:
    rows = []
    for run in runs:
        row = {column: run.get(column) for column in RUN_COLUMNS if column not in ("tp", "tn", "fp", "fn")}
        row.update(run["confusion"])
        loss_curve = run.get("loss_curve") or []
        row["final_loss"] = loss_curve[-1] if loss_curve else None
        rows.append(row)
    frame = pd.DataFrame(rows, columns=RUN_COLUMNS)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def write_summary_csv(groups: Sequence[Mapping[str, Any]], path: Path) -> Path:
    """One row per knn_k x label_fraction x model with mean/std columns."""
    rows = []
    for group in groups:
        row: Dict[str, Any] = {
            "knn_k": group["knn_k"],
            "label_fraction": group["label_fraction"],
            "model": group["model"],
            "runs": group["runs"],
        }
        for metric in METRIC_NAMES:
            row[f"{metric}_mean"] = group["metrics"][metric]["mean"]
            row[f"{metric}_std"] = group["metrics"][metric]["std"]
        rows.append(row)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows).to_csv(path, index=False)
    return path


def write_orders_csv(records: Iterable[tuple], path: Path) -> Path:
    frame = pd.DataFrame(list(records), columns=["epoch", "layer", "node_id", "chosen_order"])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def _read_label_file(path: Path) -> pd.Series:
    """CSV with ``id,label`` columns, or a bare one-label-per-line file indexed by position."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"Label file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype={"id": str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"Could not parse {path}: {exc}") from exc
    if {"id", "label"} <= set(frame.columns):
        if frame["id"].duplicated().any():
            raise DataError(f"{path} repeats ids")
        return frame.set_index("id")["label"]
    frame = pd.read_csv(path, header=None, names=["label"])
    frame.index = frame.index.astype(str)
    return frame["label"]


def evaluate_label_files(predictions_path: Path, truth_path: Path) -> MetricsReport:
    predicted = _read_label_file(predictions_path)
    truth = _read_label_file(truth_path)
    missing = truth.index.difference(predicted.index)
    if len(missing):
        raise DataError(f"No prediction for id(s) {list(missing[:5])}")
    aligned = predicted.reindex(truth.index)
    try:
        p = aligned.to_numpy(dtype=np.int64)
        t = truth.to_numpy(dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise DataError(f"Labels must be integers: {exc}") from exc
    return compute_metrics(p, t, np.ones(t.shape, dtype=bool))


def report_payload(report: MetricsReport) -> Dict[str, Any]:
    return {
        "accuracy": report.accuracy,
        "macro_f1": report.macro_f1,
        "interest_f1": report.interest_f1,
        "macro_precision": report.macro_precision,
        "macro_recall": report.macro_recall,
        "confusion": report.confusion(),
    }


def result_paths(output_dir: Path) -> Dict[str, Path]:
    output_dir = Path(output_dir)
    return {
        "results": output_dir / "results.json",
        "runs": output_dir / "runs.csv",
        "summary": output_dir / "summary.csv",
    }


def load_results(path: Path) -> Dict[str, Any]:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def strip_timestamp(payload: Mapping[str, Any]) -> Dict[str, Any]:
    return {key: value for key, value in payload.items() if key != "generated_at"}


__all__ = [
    "RUN_COLUMNS",
    "dumps_results",
    "evaluate_label_files",
    "load_results",
    "report_payload",
    "result_paths",
    "strip_timestamp",
    "write_orders_csv",
    "write_results_json",
    "write_runs_csv",
    "write_summary_csv",
]
