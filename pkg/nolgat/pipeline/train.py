"""Full-graph semi-supervised training of NOL-GAT and its baseline."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Optional

import numpy as np

from ..diffcore import adam_step
from ..errors import DataError, NumericalError
from ..graph.dataset import Dataset
from ..graph.hops import HopIndex
from ..graph.knn import SparseGraph
from ..layers import predict_labels
from ..logger import write_run_log
from ..model import ModelState, embedding_diversity, init_model, model_forward, order_histogram
from ..sampler import annealed_temperature
from .loss import masked_bce_loss
from .metrics import MetricsReport, compute_metrics

if TYPE_CHECKING:  # pragma: no cover - typing support only
    from ..config import ExperimentConfig


@dataclass
class TrainResult:
    state: ModelState
    report: MetricsReport
    loss_curve: List[float]
    probabilities: np.ndarray
    chosen_orders: np.ndarray
    embedding_diversity: float
    # (epoch, layer, node_id, chosen_order) rows, filled when orders are exported
    order_records: List[tuple] = field(default_factory=list)


def _check_inputs(dataset: Dataset, graph: Optional[SparseGraph], hop_index: HopIndex) -> None:
    if graph is not None and graph.n != dataset.n:
        raise DataError(f"Graph has {graph.n} nodes but the dataset has {dataset.n}")
    if hop_index.n != dataset.n:
        raise DataError(f"Hop index covers {hop_index.n} nodes but the dataset has {dataset.n}")
    if not dataset.labeled_mask.any():
        raise DataError("Dataset has no labeled nodes; build a split first")


def train(
    config: ExperimentConfig,
    dataset: Dataset,
    graph: Optional[SparseGraph],
    hop_index: HopIndex,
    *,
    seed: Optional[int] = None,
    baseline: bool = False,
    run_id: Optional[str] = None,
    export_orders: bool = False,
) -> TrainResult:
    """Run ``config.epochs`` of forward, masked loss, backward and Adam.

    The final model is scored on the unlabeled target nodes.
    """
    _check_inputs(dataset, graph, hop_index)
    seed = config.seed if seed is None else seed
    model_config = config.model_config(baseline=baseline)
    state = init_model(model_config, dataset.features.dim, hop_index, seed)
    optimizer = config.adam_state()
    features = dataset.features.rows
    labels = dataset.labels
    labeled = dataset.labeled_mask
    epochs = config.epochs

    loss_curve: List[float] = []
    order_records: List[tuple] = []
    for epoch in range(epochs):
        temperature = annealed_temperature(epoch, epochs, config.temperature, config.anneal_min, config.anneal)
        result = model_forward(state, features, hop_index, seed, epoch, temperature=temperature, training=True)
        loss = masked_bce_loss(result.probabilities, labels, labeled)
        value = loss.item()
        if not np.isfinite(value):
            if run_id:
                write_run_log(run_id, "aborted", extra={"epoch": epoch + 1, "loss": repr(value)})
            raise NumericalError(f"Non-finite loss {value} at epoch {epoch + 1}")
        loss.backward()
        try:
            adam_step(state.store, optimizer)
        except NumericalError as exc:
            raise NumericalError(f"epoch {epoch + 1}: {exc}") from exc
        loss_curve.append(value)
        if export_orders and not baseline:
            for layer, orders in enumerate(result.chosen_orders):
                order_records.extend((epoch, layer, int(node), int(order)) for node, order in enumerate(orders))
        if run_id:
            write_run_log(
                run_id,
                "epoch",
                extra={
                    "epoch": epoch + 1,
                    "loss": value,
                    "temperature": temperature,
                    "order_histogram": [
                        order_histogram(orders, state.num_orders).tolist() for orders in result.chosen_orders
                    ],
                },
            )

    final_temperature = annealed_temperature(
        max(0, epochs - 1), epochs, config.temperature, config.anneal_min, config.anneal
    )
    final = model_forward(state, features, hop_index, seed, epochs, temperature=final_temperature)
    probabilities = final.probabilities.data.copy()
    report = compute_metrics(predict_labels(probabilities), labels, dataset.eval_mask)
    diversity = embedding_diversity(final.embeddings.data)
    if run_id:
        write_run_log(
            run_id,
            "finished",
            extra={"epochs": epochs, "accuracy": report.accuracy, "macro_f1": report.macro_f1},
        )
    return TrainResult(
        state=state,
        report=report,
        loss_curve=loss_curve,
        probabilities=probabilities,
        chosen_orders=final.chosen_orders,
        embedding_diversity=diversity,
        order_records=order_records,
    )


__all__ = ["TrainResult", "train"]
