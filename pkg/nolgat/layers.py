"""GATv2 attention over caller-supplied neighborhoods, and the MLP classification head."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .constants import LEAKY_SLOPE
from .diffcore import DiffNode, ParamStore, as_node, ops
from .errors import ConfigError, ShapeError
from .graph.hops import NeighborLists


@dataclass
class GATv2LayerParams:
    """``W`` maps in_dim to heads*head_dim; ``a`` holds one 2*head_dim vector per head."""

    name: str
    in_dim: int
    head_dim: int
    heads: int
    concat_heads: bool
    W: DiffNode
    a: DiffNode
    bias: DiffNode

    @property
    def output_width(self) -> int:
        return self.heads * self.head_dim if self.concat_heads else self.head_dim


def create_gatv2_params(
    store: ParamStore,
    name: str,
    in_dim: int,
    out_width: int,
    heads: int,
    concat_heads: bool,
) -> GATv2LayerParams:
    """``out_width`` is the total width; concatenated heads split it evenly."""
    if heads < 1 or in_dim < 1 or out_width < 1:
        raise ConfigError(f"{name}: in_dim, out_width and heads must be positive")
    if concat_heads:
        if out_width % heads:
            raise ConfigError(f"{name}: width {out_width} is not divisible by {heads} heads")
        head_dim = out_width // heads
    else:
        head_dim = out_width
    return GATv2LayerParams(
        name=name,
        in_dim=in_dim,
        head_dim=head_dim,
        heads=heads,
        concat_heads=concat_heads,
        W=store.create(f"{name}.W", (in_dim, heads * head_dim)),
        a=store.create(f"{name}.a", (heads, 2 * head_dim)),
        bias=store.create(f"{name}.bias", (heads * head_dim,), init="zeros"),
    )


def attention_edges(neighborhoods: NeighborLists) -> Tuple[np.ndarray, np.ndarray]:
    """(targets, sources) grouped by target, each target's self-loop first."""
    n = neighborhoods.n
    targets = np.concatenate((np.arange(n, dtype=np.int64), neighborhoods.targets()))
    sources = np.concatenate((np.arange(n, dtype=np.int64), neighborhoods.indices))
    order = np.argsort(targets, kind="stable")
    return targets[order], sources[order]


def _check_input(params: GATv2LayerParams, h: DiffNode) -> None:
    if h.data.ndim != 2 or h.shape[1] != params.in_dim:
        raise ShapeError("gatv2", [h.shape, params.W.shape], f"{params.name} expects width {params.in_dim}")


def _edge_logits(params: GATv2LayerParams, z: DiffNode, targets: np.ndarray, sources: np.ndarray) -> DiffNode:
    m = targets.size
    k, d = params.heads, params.head_dim
    z_target = ops.reshape(ops.gather_rows(z, targets), (m, k, d))
    z_source = ops.reshape(ops.gather_rows(z, sources), (m, k, d))
    hidden = ops.leaky_relu(ops.concat([z_target, z_source]), LEAKY_SLOPE)
    return ops.total(ops.multiply(hidden, params.a), axis=-1)


def gatv2_scores(
    params: GATv2LayerParams,
    h: DiffNode,
    edges: Tuple[np.ndarray, np.ndarray],
) -> DiffNode:
    """Per-edge per-head logits aᵀ LeakyReLU(W h_v ‖ W h_u), shape (edges, heads)."""
    h = as_node(h)
    _check_input(params, h)
    targets = np.asarray(edges[0], dtype=np.int64)
    sources = np.asarray(edges[1], dtype=np.int64)
    if targets.shape != sources.shape or targets.ndim != 1:
        raise ShapeError("gatv2", [targets.shape, sources.shape], "edge endpoint arrays differ")
    z = ops.matmul(h, params.W)
    return _edge_logits(params, z, targets, sources)


def _attend(
    params: GATv2LayerParams, h: DiffNode, neighborhoods: NeighborLists
) -> Tuple[np.ndarray, np.ndarray, DiffNode, DiffNode]:
    _check_input(params, h)
    if neighborhoods.n != h.shape[0]:
        raise ShapeError("gatv2", [h.shape, (neighborhoods.n,)], "one neighborhood per node")
    targets, sources = attention_edges(neighborhoods)
    z = ops.matmul(h, params.W)
    alpha = ops.segment_softmax(_edge_logits(params, z, targets, sources), targets, h.shape[0])
    return targets, sources, z, alpha


def gatv2_attention(
    params: GATv2LayerParams, h: DiffNode, neighborhoods: NeighborLists
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(targets, sources, alpha) with alpha of shape (edges, heads)."""
    targets, sources, _, alpha = _attend(params, as_node(h), neighborhoods)
    return targets, sources, alpha.data


def gatv2_forward(params: GATv2LayerParams, h: DiffNode, neighborhoods: NeighborLists) -> DiffNode:
    """ELU(Σ_u α_vu W h_u + b) per head; heads concatenated or averaged."""
    h = as_node(h)
    n = h.shape[0]
    k, d = params.heads, params.head_dim
    targets, sources, z, alpha = _attend(params, h, neighborhoods)
    messages = ops.multiply(
        ops.reshape(alpha, (targets.size, k, 1)),
        ops.reshape(ops.gather_rows(z, sources), (targets.size, k, d)),
    )
    aggregated = ops.add(ops.segment_sum(messages, targets, n), ops.reshape(params.bias, (k, d)))
    out = ops.elu(aggregated)
    if params.concat_heads:
        return ops.reshape(out, (n, k * d))
    return ops.mean(out, axis=1)


@dataclass
class MLPParams:
    widths: List[int]
    weights: List[DiffNode]
    biases: List[DiffNode]


def create_mlp_params(store: ParamStore, name: str, in_dim: int, hidden: Sequence[int]) -> MLPParams:
    widths = [int(in_dim), *(int(width) for width in hidden), 1]
    if min(widths) < 1:
        raise ConfigError(f"{name}: layer widths must be positive, got {widths}")
    weights = []
    biases = []
    for idx, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        weights.append(store.create(f"{name}.{idx}.W", (fan_in, fan_out)))
        biases.append(store.create(f"{name}.{idx}.bias", (fan_out,), init="zeros"))
    return MLPParams(widths=widths, weights=weights, biases=biases)


def mlp_forward(params: MLPParams, h: DiffNode) -> DiffNode:
    """ELU hidden layers and a logistic output; returns one probability per row."""
    h = as_node(h)
    if h.data.ndim != 2 or h.shape[1] != params.widths[0]:
        raise ShapeError("mlp", [h.shape, (params.widths[0],)], "input width mismatch")
    x = h
    last = len(params.weights) - 1
    for idx, (weight, bias) in enumerate(zip(params.weights, params.biases)):
        x = ops.add(ops.matmul(x, weight), bias)
        if idx < last:
            x = ops.elu(x)
    return ops.sigmoid(ops.reshape(x, (h.shape[0],)))


def predict_labels(probabilities: np.ndarray) -> np.ndarray:
    """Label 1 iff p >= 0.5."""
    return (np.asarray(probabilities) >= 0.5).astype(np.int64)


__all__ = [
    "GATv2LayerParams",
    "MLPParams",
    "attention_edges",
    "create_gatv2_params",
    "create_mlp_params",
    "gatv2_attention",
    "gatv2_forward",
    "gatv2_scores",
    "mlp_forward",
    "predict_labels",
]
