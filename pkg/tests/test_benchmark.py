from __future__ import annotations

import json
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List

import pytest

from nolgat.benchmark import BASELINE_MARGIN, run_longrange_benchmark, run_trend_check, trend_checks

TINY = {"hidden": [4, 3], "heads": 2, "mlp_hidden": [4], "epochs": 2}


def group(model: str, fraction: float, macro_f1: float) -> Dict[str, Any]:
    return {"model": model, "knn_k": 6, "label_fraction": fraction, "metrics": {"macro_f1": {"mean": macro_f1}}}


def groups(nolgat: List[float], baseline: List[float]) -> List[Dict[str, Any]]:
    fractions = (0.1, 0.2, 0.3)
    return [group("nolgat", f, v) for f, v in zip(fractions, nolgat)] + [
        group("baseline", f, v) for f, v in zip(fractions, baseline)
    ]


def test_trend_check_passes_within_tolerances() -> None:
    report = trend_checks(groups([0.70, 0.74, 0.73], [0.69, 0.72, 0.735]))
    assert report["passed"]
    assert report["macro_f1"]["nolgat"] == {"0.1": 0.70, "0.2": 0.74, "0.3": 0.73}


def test_trend_check_flags_a_baseline_gap() -> None:
    report = trend_checks(groups([0.70, 0.74, 0.78], [0.70, 0.74 + 2 * BASELINE_MARGIN, 0.78]))
    assert report["at_least_baseline"] == {"0.1": True, "0.2": False, "0.3": True}
    assert not report["passed"]


def test_trend_check_flags_a_falling_trend() -> None:
    report = trend_checks(groups([0.80, 0.74, 0.75], [0.70, 0.70, 0.70]))
    assert not report["nondecreasing"]
    assert not report["passed"]


def test_longrange_benchmark_writes_its_report(tmp_path: Path) -> None:
    report_path = tmp_path / "reports" / "longrange.json"
    report = run_longrange_benchmark(report_path, seeds=(0, 1), n_nodes=40, distance=2, overrides=TINY)
    assert set(report["accuracy"]) == {"nolgat", "baseline"}
    assert all(len(values) == 2 for values in report["accuracy"].values())
    assert all(0.0 <= value <= 1.0 for value in report["mean_accuracy"].values())
    saved = json.loads(report_path.read_text())
    assert saved["distance"] == 2
    assert saved["timestamp"].endswith("Z")
    assert datetime.fromisoformat(saved["timestamp"][:-1]).year >= 2024


def test_trend_check_runs_end_to_end(tmp_path: Path) -> None:
    report = run_trend_check(
        tmp_path / "trend.json", n_docs=40, repetitions=1, overrides=dict(TINY, feature_dim=32)
    )
    assert set(report["macro_f1"]) == {"nolgat", "baseline"}
    assert set(report["at_least_baseline"]) == {"0.1", "0.2", "0.3"}
    assert isinstance(report["passed"], bool)
    assert (tmp_path / "trend" / "results.json").exists()


@pytest.mark.slow
def test_short_range_task_is_solved_by_both_models(tmp_path: Path) -> None:
    report = run_longrange_benchmark(tmp_path / "short.json", seeds=(0,), n_nodes=400, distance=1)
    assert report["mean_accuracy"]["nolgat"] >= 0.95
    assert report["mean_accuracy"]["baseline"] >= 0.95


@pytest.mark.slow
def test_long_range_task_separates_the_models(tmp_path: Path) -> None:
    report = run_longrange_benchmark(tmp_path / "longrange.json")
    assert report["mean_accuracy"]["baseline"] <= 0.60
    assert report["mean_accuracy"]["nolgat"] >= 0.90
    assert report["duration_seconds"] < 300


@pytest.mark.slow
def test_directional_trend_holds_on_the_synthetic_corpus(tmp_path: Path) -> None:
    report = run_trend_check(tmp_path / "trend.json")
    assert report["passed"], report
