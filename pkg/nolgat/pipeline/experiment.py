"""End-to-end experiment: featurise, build graphs, split, train, aggregate, write results."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, TypeVar

import numpy as np

from .. import reports
from ..config import ExperimentConfig
from ..errors import NolGatError, StageError
from ..graph.dataset import Dataset
from ..graph.hops import HopIndex, build_hop_index
from ..graph.knn import SparseGraph, build_knn_graph
from ..logger import write_system_log
from ..model import order_histogram
from ..runtime.pool import RepetitionPool
from .featurize import load_dataset
from .metrics import METRIC_NAMES, MetricsReport, summarize
from .splits import make_split
from .train import train

T = TypeVar("T")

MODELS = ("nolgat", "baseline")


@dataclass(frozen=True)
class RunJob:
    knn_k: int
    label_fraction: float
    repetition: int
    seed: int
    model: str
    dataset: Dataset
    graph: SparseGraph
    hop_index: HopIndex

    @property
    def pair_id(self) -> str:
        return f"k{self.knn_k}-f{self.label_fraction:g}-r{self.repetition}"

    @property
    def run_id(self) -> str:
        return f"{self.pair_id}-{self.model}"


def _stage(name: str, config: ExperimentConfig, fn: Callable[[], T]) -> T:
    try:
        return fn()
    except StageError:
        raise
    except NolGatError as exc:
        write_system_log(f"Stage '{name}' failed: {exc}", level="ERROR")
        raise StageError(name, exc, config.echo()) from exc


def _run_job(config: ExperimentConfig, job: RunJob, output_dir: Path) -> Dict[str, Any]:
    result = train(
        config,
        job.dataset,
        job.graph,
        job.hop_index,
        seed=job.seed,
        baseline=job.model == "baseline",
        run_id=job.run_id,
        export_orders=config.export_orders,
    )
    if config.export_orders and job.model == "nolgat":
        reports.write_orders_csv(result.order_records, output_dir / f"orders_{job.run_id}.csv")
    report = result.report
    write_system_log(
        f"Run {job.run_id} finished",
        extra={"accuracy": report.accuracy, "macro_f1": report.macro_f1},
    )
    return {
        "pair_id": job.pair_id,
        "model": job.model,
        "knn_k": job.knn_k,
        "label_fraction": job.label_fraction,
        "repetition": job.repetition,
        "seed": job.seed,
        "accuracy": report.accuracy,
        "macro_f1": report.macro_f1,
        "interest_f1": report.interest_f1,
        "confusion": report.confusion(),
        "loss_curve": result.loss_curve,
        "embedding_diversity": result.embedding_diversity,
        "order_histogram": _histograms(result.chosen_orders, job.hop_index.num_orders, job.model),
    }


def _histograms(chosen: np.ndarray, num_orders: int, model: str) -> List[List[int]]:
    if model == "baseline":
        return []
    return [order_histogram(row, num_orders).tolist() for row in chosen]


def _reports_from(runs: List[Dict[str, Any]]) -> List[MetricsReport]:
    return [MetricsReport.from_counts(**run["confusion"]) for run in runs]


def aggregate_runs(runs: List[Dict[str, Any]]) -> Dict[str, Any]:
    """Mean/std per metric per model, plus one group per knn_k x label_fraction x model."""
    aggregate: Dict[str, Any] = {}
    for model in MODELS:
        selected = [run for run in runs if run["model"] == model]
        if selected:
            aggregate[model] = summarize(_reports_from(selected)).to_dict()
    groups = []
    keys = sorted({(run["knn_k"], run["label_fraction"], run["model"]) for run in runs})
    for knn_k, fraction, model in keys:
        selected = [
            run for run in runs if (run["knn_k"], run["label_fraction"], run["model"]) == (knn_k, fraction, model)
        ]
        groups.append(
            {
                "knn_k": knn_k,
                "label_fraction": fraction,
                "model": model,
                "runs": len(selected),
                "metrics": summarize(_reports_from(selected)).to_dict(),
            }
        )
    return {"aggregate": aggregate, "groups": groups}


@dataclass
class ExperimentResult:
    payload: Dict[str, Any]
    paths: Dict[str, Path]


def run_experiment(config: ExperimentConfig, output_dir: Optional[Path] = None) -> ExperimentResult:
    output_dir = Path(output_dir or config.output_dir)
    dataset = _stage(
        "featurize",
        config,
        lambda: load_dataset(
            config.featurizer,
            config.feature_dim,
            dataset_path=config.dataset_path,
            text_path=config.text_path,
            labels_path=config.labels_path,
        ),
    )
    write_system_log(f"Dataset ready: {dataset.n} nodes, {dataset.features.dim} features")

    models = MODELS if config.compare_baseline else MODELS[:1]
    jobs: List[RunJob] = []
    for knn_k in config.knn_k:
        graph = _stage("build_knn_graph", config, lambda: build_knn_graph(dataset.features, knn_k))
        hop_index = _stage("build_hop_index", config, lambda: build_hop_index(graph, config.max_order_cap))
        write_system_log(
            f"Graph k={knn_k}: {graph.num_edges} edges, effective diameter {hop_index.effective_diameter}",
            extra={"max_order": hop_index.max_order},
        )
        for fraction in config.label_fractions:
            for repetition in range(config.repetitions):
                seed = config.seed + repetition
                split = _stage(
                    "make_split",
                    config,
                    lambda: make_split(dataset.labels, fraction, seed, dataset.target_mask),
                )
                labeled = dataset.with_labeled(split.labeled_mask)
                for model in models:
                    jobs.append(RunJob(knn_k, fraction, repetition, seed, model, labeled, graph, hop_index))

    pool: RepetitionPool[RunJob, Dict[str, Any]] = RepetitionPool(
        lambda job: _stage("train", config, lambda: _run_job(config, job, output_dir)),
        workers=config.workers,
    )
    runs = pool.map(jobs)

    payload: Dict[str, Any] = {"config_echo": config.echo(), "runs": runs, "metrics": list(METRIC_NAMES)}
    payload.update(aggregate_runs(runs))
    paths = reports.result_paths(output_dir)
    reports.write_results_json(payload, paths["results"])
    reports.write_runs_csv(runs, paths["runs"])
    reports.write_summary_csv(payload["groups"], paths["summary"])
    write_system_log(f"Experiment finished: {len(runs)} runs", extra={"results": str(paths["results"])})
    return ExperimentResult(payload=payload, paths=paths)


__all__ = ["ExperimentResult", "MODELS", "RunJob", "aggregate_runs", "run_experiment"]
