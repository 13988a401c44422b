from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import accuracy_score, confusion_matrix, precision_score, recall_score

from nolgat.errors import DataError
from nolgat.pipeline import MetricsReport, compute_metrics, summarize


def test_accuracy_example() -> None:
    report = MetricsReport.from_counts(tp=2, tn=3, fp=1, fn=0)
    assert report.accuracy == pytest.approx(5 / 6)
    assert report.support == 6


def test_macro_f1_is_harmonic_mean_of_macro_averages() -> None:
    predicted = np.array([0, 0, 1, 0, 1, 1, 1])
    truth = np.array([0, 0, 0, 1, 1, 1, 1])
    report = compute_metrics(predicted, truth, np.ones(7, dtype=bool))
    assert report.confusion() == {"tp": 3, "tn": 2, "fp": 1, "fn": 1}
    assert report.macro_precision == pytest.approx(17 / 24)
    assert report.macro_recall == pytest.approx(17 / 24)
    assert report.macro_f1 == pytest.approx(17 / 24)
    assert report.interest_f1 == pytest.approx(3 / 4)


def test_perfect_predictions_score_one() -> None:
    truth = np.array([0, 1, 1, 0, 1])
    report = compute_metrics(truth, truth, np.ones(5, dtype=bool))
    assert report.accuracy == 1.0
    assert report.macro_f1 == 1.0
    assert report.interest_f1 == 1.0


def test_zero_denominators_read_as_zero() -> None:
    report = MetricsReport.from_counts(tp=0, tn=4, fp=0, fn=0)
    assert report.interest_precision == 0.0
    assert report.interest_recall == 0.0
    assert report.interest_f1 == 0.0
    assert report.macro_precision == 0.5


def test_mask_restricts_the_evaluation() -> None:
    predicted = np.array([1, 1, 0, 0])
    truth = np.array([1, 0, 0, 1])
    report = compute_metrics(predicted, truth, np.array([True, False, True, False]))
    assert report.support == 2
    assert report.accuracy == 1.0


def test_empty_evaluation_set_is_rejected() -> None:
    with pytest.raises(DataError):
        compute_metrics(np.array([0, 1]), np.array([0, 1]), np.zeros(2, dtype=bool))
    with pytest.raises(DataError):
        MetricsReport.from_counts(0, 0, 0, 0)


def test_non_binary_labels_are_rejected() -> None:
    with pytest.raises(DataError):
        compute_metrics(np.array([0, 2]), np.array([0, 1]), np.ones(2, dtype=bool))


@settings(max_examples=1000, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)), min_size=1, max_size=40))
def test_metrics_agree_with_brute_force(pairs: list[tuple[int, int]]) -> None:
    predicted = np.array([p for p, _ in pairs])
    truth = np.array([t for _, t in pairs])
    report = compute_metrics(predicted, truth, np.ones(len(pairs), dtype=bool))

    tn, fp, fn, tp = confusion_matrix(truth, predicted, labels=[0, 1]).ravel()
    assert report.confusion() == {"tp": tp, "tn": tn, "fp": fp, "fn": fn}
    assert report.accuracy == pytest.approx(accuracy_score(truth, predicted))
    precision = precision_score(truth, predicted, labels=[0, 1], average="macro", zero_division=0)
    recall = recall_score(truth, predicted, labels=[0, 1], average="macro", zero_division=0)
    assert report.macro_precision == pytest.approx(precision)
    assert report.macro_recall == pytest.approx(recall)
    expected_f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    assert report.macro_f1 == pytest.approx(expected_f1)


def test_summary_mean_and_population_std() -> None:
    summary = summarize([MetricsReport.from_counts(1, 1, 0, 0), MetricsReport.from_counts(0, 1, 1, 0)])
    assert summary.values("accuracy") == [1.0, 0.5]
    assert summary.mean("accuracy") == pytest.approx(0.75)
    assert summary.std("accuracy") == pytest.approx(0.25)
    assert set(summary.to_dict()) == {"accuracy", "macro_f1", "interest_f1"}


def test_empty_summary_is_zero() -> None:
    summary = summarize([])
    assert summary.mean("macro_f1") == 0.0
    assert summary.std("macro_f1") == 0.0
