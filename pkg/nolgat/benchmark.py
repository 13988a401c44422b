"""Benchmarks: the long-range path graph and the synthetic-corpus trend check."""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np

from . import constants
from .config import ExperimentConfig
from .graph.hops import build_hop_index
from .logger import _utc_now, write_system_log
from .pipeline.experiment import MODELS, run_experiment
from .pipeline.featurize import write_text_corpus
from .pipeline.splits import make_split
from .pipeline.synth import synth_corpus, synth_longrange
from .pipeline.train import train

LONGRANGE_SETTINGS: Dict[str, Any] = {
    "layers": 2,
    "hidden": [16, 8],
    "heads": 2,
    "mlp_hidden": [8],
    "epochs": 200,
    "relaxation_mode": "dense-relaxed",
    "eval_argmax": True,
}
TREND_SETTINGS: Dict[str, Any] = {
    "featurizer": "hashed-tf",
    "knn_k": [6],
    "label_fraction": [0.1, 0.2, 0.3],
    "hidden": [32, 16],
    "heads": 2,
    "epochs": 100,
    "compare_baseline": True,
}
BASELINE_MARGIN = 0.01
TREND_TOLERANCE = 0.02


def _write_report(report: Dict[str, Any], report_path: Path) -> None:
    report["timestamp"] = _utc_now()
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True), encoding="utf-8")


def run_longrange_benchmark(
    report_path: Path,
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    n_nodes: int = 2000,
    distance: int = 3,
    label_fraction: float = 0.3,
    overrides: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Train NOL-GAT and the baseline on path graphs whose label sits ``distance`` hops away."""
    constants.refresh_paths()
    settings = dict(LONGRANGE_SETTINGS, label_fraction=label_fraction)
    settings.update(overrides or {})
    config = ExperimentConfig.from_mapping(settings)
    start = time.perf_counter()
    accuracy: Dict[str, list] = {model: [] for model in MODELS}
    for seed in seeds:
        dataset, graph = synth_longrange(n_nodes, distance, seed)
        hop_index = build_hop_index(graph, config.max_order_cap)
        split = make_split(dataset.labels, label_fraction, seed, dataset.target_mask)
        labeled = dataset.with_labeled(split.labeled_mask)
        for model in MODELS:
            result = train(config, labeled, graph, hop_index, seed=seed, baseline=model == "baseline")
            accuracy[model].append(result.report.accuracy)
    duration = time.perf_counter() - start

    report = {
        "benchmark": "longrange",
        "n_nodes": n_nodes,
        "distance": distance,
        "label_fraction": label_fraction,
        "seeds": list(seeds),
        "config_echo": config.echo(),
        "accuracy": accuracy,
        "mean_accuracy": {model: float(np.mean(values)) for model, values in accuracy.items()},
        "duration_seconds": duration,
    }
    _write_report(report, report_path)
    write_system_log(
        f"Long-range benchmark completed: distance={distance}, duration={duration:.2f}s",
        extra={"report": str(report_path), "mean_accuracy": report["mean_accuracy"]},
    )
    return report


def trend_checks(groups: Sequence[Dict[str, Any]]) -> Dict[str, Any]:
    """NOL-GAT within ``BASELINE_MARGIN`` of the baseline at every fraction, and nondecreasing in the fraction."""
    macro_f1 = {(group["model"], group["label_fraction"]): group["metrics"]["macro_f1"]["mean"] for group in groups}
    fractions = sorted({group["label_fraction"] for group in groups})
    at_least_baseline = {
        f"{fraction:g}": macro_f1[("nolgat", fraction)] >= macro_f1[("baseline", fraction)] - BASELINE_MARGIN
        for fraction in fractions
    }
    nondecreasing = all(
        macro_f1[("nolgat", upper)] >= macro_f1[("nolgat", lower)] - TREND_TOLERANCE
        for lower, upper in zip(fractions, fractions[1:])
    )
    return {
        "macro_f1": {model: {f"{fraction:g}": macro_f1[(model, fraction)] for fraction in fractions} for model in MODELS},
        "at_least_baseline": at_least_baseline,
        "nondecreasing": nondecreasing,
        "passed": all(at_least_baseline.values()) and nondecreasing,
    }


def run_trend_check(
    report_path: Path,
    n_docs: int = 500,
    repetitions: int = 10,
    corpus_seed: int = 0,
    overrides: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Paired NOL-GAT vs baseline runs on the synthetic corpus across label fractions."""
    constants.refresh_paths()
    workdir = Path(report_path).parent / "trend"
    documents, labels = synth_corpus(n_docs, corpus_seed)
    text_path = workdir / "corpus.txt"
    labels_path = workdir / "labels.txt"
    write_text_corpus(documents, labels, text_path, labels_path)
    settings = dict(
        TREND_SETTINGS,
        text_path=str(text_path),
        labels_path=str(labels_path),
        repetitions=repetitions,
        output_dir=str(workdir),
    )
    settings.update(overrides or {})
    config = ExperimentConfig.from_mapping(settings)
    start = time.perf_counter()
    result = run_experiment(config)
    duration = time.perf_counter() - start

    report = {"benchmark": "trend", "n_docs": n_docs, "repetitions": repetitions, "duration_seconds": duration}
    report.update(trend_checks(result.payload["groups"]))
    _write_report(report, report_path)
    write_system_log(
        f"Trend check completed: passed={report['passed']}, duration={duration:.2f}s",
        extra={"report": str(report_path)},
    )
    return report


def main(argv: Optional[list[str]] = None) -> None:
    parser = argparse.ArgumentParser(description="Run NOL-GAT benchmarks")
    parser.add_argument("benchmark", choices=("longrange", "trend", "all"), help="Which benchmark to run")
    parser.add_argument("--report-dir", type=Path, default=Path("reports"), help="Directory for JSON reports")
    parser.add_argument("--seeds", type=int, default=5, help="Seeds for the long-range benchmark")
    parser.add_argument("--nodes", type=int, default=2000, help="Nodes in the long-range benchmark")
    parser.add_argument("--distance", type=int, default=3, help="Head-to-tail distance in the long-range benchmark")
    parser.add_argument("--docs", type=int, default=500, help="Documents in the trend-check corpus")
    parser.add_argument("--repetitions", type=int, default=10, help="Paired seeds per label fraction in the trend check")
    args = parser.parse_args(argv)

    if args.benchmark in ("longrange", "all"):
        run_longrange_benchmark(
            args.report_dir / "longrange.json",
            seeds=tuple(range(args.seeds)),
            n_nodes=args.nodes,
            distance=args.distance,
        )
    if args.benchmark in ("trend", "all"):
        run_trend_check(args.report_dir / "trend.json", n_docs=args.docs, repetitions=args.repetitions)


__all__ = [
    "BASELINE_MARGIN",
    "LONGRANGE_SETTINGS",
    "TREND_SETTINGS",
    "TREND_TOLERANCE",
    "main",
    "run_longrange_benchmark",
    "run_trend_check",
    "trend_checks",
]


if __name__ == "__main__":
    main()
