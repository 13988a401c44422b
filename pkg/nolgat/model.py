"""NOL-GAT: per-node, per-layer hop-order selection feeding a GATv2 embedding stack."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
from sklearn.preprocessing import normalize

from . import constants
from .diffcore import DiffNode, ParamStore, as_node, ops
from .errors import ConfigError, ShapeError
from .graph.hops import HopIndex, NeighborLists, lists_for_choice, lists_for_order, support_mask
from .layers import (
    GATv2LayerParams,
    MLPParams,
    create_gatv2_params,
    create_mlp_params,
    gatv2_forward,
    mlp_forward,
)
from .sampler import DROPOUT_STREAM, NoiseKey, STSample, SupportMask, sample_orders


@dataclass(frozen=True)
class NolGatConfig:
    layers: int = 2
    phi_hop: int = 1
    hidden: Tuple[int, ...] = tuple(constants.DEFAULT_HIDDEN)
    heads: Union[int, Tuple[int, ...]] = constants.DEFAULT_HEADS
    temperature: float = 1.0
    relaxation_mode: str = "straight-through"
    baseline_mode: bool = False
    mlp_hidden: Tuple[int, ...] = tuple(constants.DEFAULT_MLP_HIDDEN)
    eval_argmax: bool = False
    dropout: float = 0.0

    def __post_init__(self) -> None:
        hidden = tuple(int(width) for width in self.hidden)
        heads = (self.heads,) * self.layers if isinstance(self.heads, int) else tuple(int(k) for k in self.heads)
        object.__setattr__(self, "hidden", hidden)
        object.__setattr__(self, "heads", heads)
        object.__setattr__(self, "mlp_hidden", tuple(int(width) for width in self.mlp_hidden))
        if self.layers < 1:
            raise ConfigError("layers must be >= 1")
        if len(hidden) != self.layers:
            raise ConfigError(f"hidden lists {len(hidden)} widths for {self.layers} layers")
        if len(heads) != self.layers:
            raise ConfigError(f"heads lists {len(heads)} values for {self.layers} layers")
        if self.relaxation_mode not in constants.RELAXATION_MODES:
            raise ConfigError(
                f"relaxation_mode '{self.relaxation_mode}' is not one of {constants.RELAXATION_MODES}"
            )
        if not self.temperature > 0:
            raise ConfigError("temperature must be positive")
        if self.phi_hop < 0:
            raise ConfigError("phi_hop must be >= 0")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must lie in [0, 1)")


@dataclass
class ModelState:
    """Parameters of every layer plus the head; the order network is empty in baseline mode."""

    config: NolGatConfig
    store: ParamStore
    in_dim: int
    num_orders: int
    psi: List[GATv2LayerParams]
    phi: List[GATv2LayerParams] = field(default_factory=list)
    mlp: Optional[MLPParams] = None


@dataclass
class ForwardResult:
    probabilities: DiffNode
    chosen_orders: np.ndarray
    embeddings: DiffNode
    samples: List[STSample] = field(default_factory=list)


def init_model(config: NolGatConfig, in_dim: int, hop_index: HopIndex, seed: int) -> ModelState:
    if not config.baseline_mode and config.phi_hop > hop_index.max_order:
        raise ConfigError(f"phi_hop={config.phi_hop} exceeds the largest available order {hop_index.max_order}")
    store = ParamStore(seed)
    num_orders = hop_index.num_orders
    psi: List[GATv2LayerParams] = []
    phi: List[GATv2LayerParams] = []
    width = int(in_dim)
    for layer in range(config.layers):
        heads = config.heads[layer]
        last = layer == config.layers - 1
        psi.append(create_gatv2_params(store, f"psi.{layer}", width, config.hidden[layer], heads, not last))
        if not config.baseline_mode:
            phi.append(create_gatv2_params(store, f"phi.{layer}", width, num_orders, heads, False))
        width = psi[-1].output_width
    mlp = create_mlp_params(store, "mlp", width, config.mlp_hidden)
    return ModelState(config=config, store=store, in_dim=int(in_dim), num_orders=num_orders, psi=psi, phi=phi, mlp=mlp)


def _one_hop(hop_index: HopIndex) -> NeighborLists:
    return hop_index.orders[1] if hop_index.max_order >= 1 else NeighborLists.empty(hop_index.n)


def hop_distribution(state: ModelState, layer: int, h_prev: DiffNode, hop_index: HopIndex) -> DiffNode:
    """Order logits over orders 0..max_order, aggregated over the fixed phi_hop neighborhood."""
    if state.config.baseline_mode:
        raise ConfigError("baseline models have no hop network")
    if hop_index.num_orders != state.num_orders:
        raise ShapeError("hop-distribution", [(hop_index.num_orders,), (state.num_orders,)], "order count changed")
    return gatv2_forward(state.phi[layer], h_prev, lists_for_order(hop_index, state.config.phi_hop))


def _dropout(h: DiffNode, rate: float, key: NoiseKey) -> DiffNode:
    if rate <= 0.0:
        return h
    dropout_key = NoiseKey(key.seed, key.epoch, key.layer, stream=DROPOUT_STREAM)
    return ops.multiply(h, ops.dropout_mask(h.shape, rate, dropout_key.generator()))


def _column_weight(st: DiffNode, order: int) -> DiffNode:
    selector = np.zeros(st.shape[-1])
    selector[order] = 1.0
    return ops.reshape(ops.total(ops.multiply(st, selector), axis=-1), (st.shape[0], 1))


def layer_forward(
    state: ModelState,
    layer: int,
    h_prev: DiffNode,
    hop_index: HopIndex,
    key: NoiseKey,
    *,
    temperature: Optional[float] = None,
    argmax: bool = False,
    training: bool = False,
    mask: Optional[np.ndarray] = None,
    surrogate: bool = False,
) -> Tuple[DiffNode, np.ndarray, Optional[STSample]]:
    """One NOL-GAT layer: returns (h_next, chosen orders, the sample or None in baseline mode).

    With ``surrogate`` the order weights are the relaxed sample itself instead of the
    straight-through one-hot, so under frozen noise the output is a smooth function of the
    hop network and finite differences see the same gradient backward computes.
    """
    config = state.config
    h_prev = as_node(h_prev)
    if training:
        h_prev = _dropout(h_prev, config.dropout, key)
    n = h_prev.shape[0]
    if config.baseline_mode:
        return gatv2_forward(state.psi[layer], h_prev, _one_hop(hop_index)), np.ones(n, dtype=np.int64), None

    temperature = config.temperature if temperature is None else temperature
    support = SupportMask(support_mask(hop_index) if mask is None else mask)
    logits = hop_distribution(state, layer, h_prev, hop_index)
    log_probs = ops.log_softmax(ops.add(logits, support.logit_bias()))
    noise = np.zeros((n, state.num_orders)) if argmax else key.gumbel_block(n, state.num_orders)
    sample = sample_orders(log_probs, noise, temperature, support)
    st = sample.relaxed if surrogate else sample.straight_through()

    if config.relaxation_mode == "dense-relaxed":
        h_next: Optional[DiffNode] = None
        for order in range(state.num_orders):
            aggregated = gatv2_forward(state.psi[layer], h_prev, hop_index.orders[order])
            term = ops.multiply(aggregated, _column_weight(st, order))
            h_next = term if h_next is None else ops.add(h_next, term)
        return h_next, sample.chosen, sample

    aggregated = gatv2_forward(state.psi[layer], h_prev, lists_for_choice(hop_index, sample.chosen))
    # exactly 1 in the forward pass (relaxed[chosen] under surrogate); the gradient reaches relaxed[chosen]
    scale = ops.total(ops.multiply(st, sample.hard), axis=-1)
    return ops.multiply(aggregated, ops.reshape(scale, (n, 1))), sample.chosen, sample


def model_forward(
    state: ModelState,
    features: Union[np.ndarray, DiffNode],
    hop_index: HopIndex,
    seed: int,
    epoch: int,
    *,
    temperature: Optional[float] = None,
    argmax: Optional[bool] = None,
    training: bool = False,
    surrogate: bool = False,
) -> ForwardResult:
    """L layers then the MLP head; chosen orders come back as an (L, n) array."""
    h = as_node(features)
    if h.data.ndim != 2 or h.shape[1] != state.in_dim:
        raise ShapeError("model", [h.shape, (state.in_dim,)], "feature width does not match layer 1")
    argmax = state.config.eval_argmax and not training if argmax is None else argmax
    mask = None if state.config.baseline_mode else support_mask(hop_index)
    chosen: List[np.ndarray] = []
    samples: List[STSample] = []
    for layer in range(state.config.layers):
        h, orders, sample = layer_forward(
            state,
            layer,
            h,
            hop_index,
            NoiseKey(seed, epoch, layer),
            temperature=temperature,
            argmax=argmax,
            training=training,
            mask=mask,
            surrogate=surrogate,
        )
        chosen.append(np.asarray(orders, dtype=np.int64))
        if sample is not None:
            samples.append(sample)
    probabilities = mlp_forward(state.mlp, h)
    return ForwardResult(
        probabilities=probabilities,
        chosen_orders=np.stack(chosen),
        embeddings=h,
        samples=samples,
    )


def order_histogram(chosen: np.ndarray, num_orders: int, nodes: Optional[np.ndarray] = None) -> np.ndarray:
    chosen = np.asarray(chosen, dtype=np.int64)
    if nodes is not None:
        chosen = chosen[nodes]
    return np.bincount(chosen, minlength=num_orders)[:num_orders]


def embedding_diversity(h: np.ndarray) -> float:
    """Mean pairwise cosine distance between rows; 0 when every row points the same way."""
    h = np.asarray(h, dtype=np.float64)
    n = h.shape[0]
    if n < 2:
        return 0.0
    unit = normalize(h)
    norms = np.einsum("ij,ij->i", unit, unit)
    total = unit.sum(axis=0)
    mean_similarity = (float(total @ total) - float(norms.sum())) / (n * (n - 1))
    return 1.0 - mean_similarity


def parameter_groups(state: ModelState) -> dict:
    """Parameter names by sub-network: 'phi', 'psi' and 'mlp'."""
    groups: dict = {"phi": [], "psi": [], "mlp": []}
    for name in state.store.names():
        groups[name.split(".", 1)[0]].append(name)
    return groups


__all__ = [
    "ForwardResult",
    "ModelState",
    "NolGatConfig",
    "embedding_diversity",
    "hop_distribution",
    "init_model",
    "layer_forward",
    "model_forward",
    "order_histogram",
    "parameter_groups",
]
