from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from nolgat import constants
from nolgat.graph.hops import build_hop_index
from nolgat.graph.knn import SparseGraph


@pytest.fixture(autouse=True)
def nolgat_home(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    home = tmp_path / "home"
    monkeypatch.setenv("NOLGAT_HOME", str(home))
    constants.refresh_paths()
    yield home
    constants.refresh_paths()


def path_graph(n: int) -> SparseGraph:
    return SparseGraph.from_edges(n, [(idx, idx + 1) for idx in range(n - 1)])


def random_graph(n: int, p: float, seed: int) -> SparseGraph:
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    return SparseGraph.from_edges(n, np.argwhere(upper).tolist())


@pytest.fixture
def path7():
    graph = path_graph(7)
    return graph, build_hop_index(graph, 8)


def elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def dense_gatv2(W, a, bias, heads, head_dim, concat, h, adjacency):
    """Plain GATv2 over a full n x n attention matrix, -inf off the neighborhood (self-loop included)."""
    n = h.shape[0]
    z = (h @ W).reshape(n, heads, head_dim)
    allowed = adjacency | np.eye(n, dtype=bool)
    outs = []
    for k in range(heads):
        logits = np.full((n, n), -np.inf)
        for v in range(n):
            for u in range(n):
                if allowed[v, u]:
                    pre = np.concatenate((z[v, k], z[u, k]))
                    logits[v, u] = a[k] @ np.where(pre > 0, pre, 0.2 * pre)
        logits -= logits.max(axis=1, keepdims=True)
        weights = np.exp(logits)
        weights /= weights.sum(axis=1, keepdims=True)
        outs.append(elu(weights @ z[:, k] + bias.reshape(heads, head_dim)[k]))
    stacked = np.stack(outs, axis=1)
    return stacked.reshape(n, heads * head_dim) if concat else stacked.mean(axis=1)
