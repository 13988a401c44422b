"""Gradient verification suites for diffcore operations and the full model."""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import constants
from .diffcore import DiffNode, ParamStore, grad_check, op_kinds, ops
from .errors import DataError
from .graph.hops import build_hop_index
from .graph.knn import SparseGraph
from .logger import _utc_now
from .model import NolGatConfig, init_model, model_forward, parameter_groups
from .pipeline.loss import masked_bce_loss

GRAD_TOLERANCE = 1e-5

Case = Tuple[ParamStore, Callable[[ParamStore], DiffNode]]


@dataclass
class VerificationResult:
    name: str
    passed: bool
    details: str
    max_error: float = 0.0


class VerificationManager:
    """Record verification outcomes as JSON lines."""

    def __init__(self) -> None:
        constants.refresh_paths()
        self.log_path = constants.VERIFICATION_LOG_FILE
        self.log_path.parent.mkdir(parents=True, exist_ok=True)

    def record(self, suite: str, result: VerificationResult) -> None:
        payload = {
            "timestamp": _utc_now(),
            "suite": suite,
            "check": result.name,
            "passed": result.passed,
            "max_error": result.max_error,
            "details": result.details,
        }
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(payload) + "\n")


def _store(rng: np.random.Generator, shapes: Dict[str, Sequence[int]], low: float = -2.0, high: float = 2.0) -> ParamStore:
    store = ParamStore(0)
    for name, shape in shapes.items():
        store.create(name, shape)
    store.load({name: rng.uniform(low, high, size=tuple(shape)) for name, shape in shapes.items()})
    return store


def _weighted(out: DiffNode, weights: np.ndarray) -> DiffNode:
    return ops.total(ops.multiply(out, weights))


def _relaxed_straight_through(x: DiffNode) -> DiffNode:
    relaxed = ops.row_softmax(x)
    return ops.straight_through(relaxed, relaxed.data)


def op_cases(seed: int = 0) -> Dict[str, Case]:
    """One randomly drawn case per operation kind; the loss weights every output entry."""
    rng = np.random.default_rng(seed)
    segments = np.array([0, 0, 1, 1, 1, 2])
    gaps = np.array([0, 0, 2, 2, 2, 3])
    gather = np.array([0, 2, 2, 3, 0])

    def case(
        shapes: Dict[str, Sequence[int]],
        build: Callable[[ParamStore], DiffNode],
        low: float = -2.0,
        high: float = 2.0,
    ) -> Case:
        store = _store(rng, shapes, low, high)
        probe = build(store)
        weights = rng.uniform(-2.0, 2.0, size=probe.shape)
        return store, lambda params: _weighted(build(params), weights)

    return {
        "matmul": case({"a": (3, 4), "b": (4, 2)}, lambda p: ops.matmul(p["a"], p["b"])),
        "add": case({"a": (3, 4), "b": (4,)}, lambda p: ops.add(p["a"], p["b"])),
        "multiply": case({"a": (3, 4), "b": (3, 4)}, lambda p: ops.multiply(p["a"], p["b"])),
        "concat": case({"a": (3, 2), "b": (3, 3)}, lambda p: ops.concat([p["a"], p["b"]])),
        "leaky-relu": case({"x": (3, 4)}, lambda p: ops.leaky_relu(p["x"], 0.2)),
        "elu": case({"x": (3, 4)}, lambda p: ops.elu(p["x"])),
        "exp": case({"x": (3, 4)}, lambda p: ops.exp(p["x"])),
        "log": case({"x": (3, 4)}, lambda p: ops.log(p["x"]), low=0.5, high=2.0),
        "sigmoid": case({"x": (3, 4)}, lambda p: ops.sigmoid(p["x"])),
        "row-softmax": case({"x": (3, 4)}, lambda p: ops.row_softmax(p["x"])),
        "log-softmax": case({"x": (3, 4)}, lambda p: ops.log_softmax(p["x"])),
        "segment-softmax": case({"x": (6, 2)}, lambda p: ops.segment_softmax(p["x"], segments, 3)),
        "segment-sum": case({"x": (6, 2)}, lambda p: ops.segment_sum(p["x"], gaps, 4)),
        "gather-rows": case({"x": (4, 3)}, lambda p: ops.gather_rows(p["x"], gather)),
        "scalar-multiply": case({"x": (3, 4)}, lambda p: ops.scale(p["x"], 1.7)),
        "mean": case({"x": (3, 4)}, lambda p: ops.mean(p["x"], axis=0)),
        "sum": case({"x": (3, 4)}, lambda p: ops.total(p["x"], axis=1)),
        "reshape": case({"x": (3, 4)}, lambda p: ops.reshape(p["x"], (4, 3))),
        "clip": case({"x": (3, 4)}, lambda p: ops.clip(p["x"], -1.0, 1.0)),
        # hard is pinned to the relaxed value at the evaluation point, so the forward tracks x
        "straight-through": case({"x": (3, 4)}, lambda p: _relaxed_straight_through(p["x"])),
    }


def random_graph(n: int, p: float, rng: np.random.Generator) -> SparseGraph:
    upper = np.triu(rng.random((n, n)) < p, k=1)
    return SparseGraph.from_edges(n, np.argwhere(upper).tolist())


def model_case(seed: int = 0, relaxation_mode: str = "dense-relaxed", n: int = 20, dim: int = 8) -> Tuple[Case, List[str]]:
    """A small two-layer model with frozen sampler noise, and the parameters to check.

    Dense-relaxed runs the surrogate forward and checks every parameter. Straight-through runs
    the real forward, where a hop network only receives the surrogate gradient; the check then
    covers the parameters downstream of every hop network: the last embedding layer and the head.
    """
    rng = np.random.default_rng(seed)
    graph = random_graph(n, 0.2, rng)
    hop_index = build_hop_index(graph, constants.DEFAULT_MAX_ORDER_CAP)
    features = rng.uniform(-1.0, 1.0, size=(n, dim))
    labels = rng.integers(0, 2, size=n)
    labeled = np.zeros(n, dtype=bool)
    labeled[rng.choice(n, size=n // 2, replace=False)] = True
    config = NolGatConfig(
        layers=2,
        hidden=(4, 3),
        heads=2,
        mlp_hidden=(4,),
        relaxation_mode=relaxation_mode,
    )
    state = init_model(config, dim, hop_index, seed)
    surrogate = relaxation_mode == "dense-relaxed"

    def loss_fn(store: ParamStore) -> DiffNode:
        result = model_forward(state, features, hop_index, seed, 0, surrogate=surrogate)
        return masked_bce_loss(result.probabilities, labels, labeled)

    if surrogate:
        checked = state.store.names()
    else:
        groups = parameter_groups(state)
        last = f"psi.{config.layers - 1}."
        checked = [name for name in groups["psi"] if name.startswith(last)] + groups["mlp"]
    return (state.store, loss_fn), checked


def run_gradient_suite(
    seed: int = 0,
    eps: float = 1e-6,
    manager: Optional[VerificationManager] = None,
    include_model: bool = True,
) -> List[VerificationResult]:
    manager = manager or VerificationManager()
    results: List[VerificationResult] = []
    cases = op_cases(seed)
    for kind in op_kinds():
        store, loss_fn = cases[kind]
        error = grad_check(loss_fn, store, eps)
        result = VerificationResult(
            name=f"op:{kind}",
            passed=error < GRAD_TOLERANCE,
            details=f"max relative error {error:.3e} (tolerance {GRAD_TOLERANCE:g})",
            max_error=error,
        )
        manager.record("diffcore", result)
        results.append(result)

    if include_model:
        for mode in ("dense-relaxed", "straight-through"):
            (store, loss_fn), names = model_case(seed, mode)
            error = grad_check(loss_fn, store, eps, names=names)
            result = VerificationResult(
                name=f"model:{mode}",
                passed=error < GRAD_TOLERANCE,
                details=f"max relative error {error:.3e} over {len(names)} parameters",
                max_error=error,
            )
            manager.record("model", result)
            results.append(result)
    return results


def export_verification_report(output_path: Optional[Path] = None) -> Path:
    constants.refresh_paths()
    source = constants.VERIFICATION_LOG_FILE
    if not source.exists():
        raise DataError("No verification log found; run the gradient suite first")
    entries = [json.loads(line) for line in source.read_text(encoding="utf-8").splitlines() if line]
    if output_path is None:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        output_path = constants.LOG_DIR / f"verification_{stamp}.json"
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(json.dumps(entries, indent=2), encoding="utf-8")
    return output_path


__all__ = [
    "GRAD_TOLERANCE",
    "VerificationManager",
    "VerificationResult",
    "export_verification_report",
    "model_case",
    "op_cases",
    "random_graph",
    "run_gradient_suite",
]
