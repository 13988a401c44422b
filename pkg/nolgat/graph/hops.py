"""Exact-distance hop neighborhoods and the order set."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.sparse.csgraph import shortest_path

from ..errors import ConfigError, DataError
from .knn import SparseGraph

# distance rows materialised at once is roughly this many entries
DISTANCE_BLOCK_ENTRIES = 4_000_000


@dataclass(frozen=True)
class NeighborLists:
    """Per-node source lists in compressed row form; each row sorted."""

    offsets: np.ndarray
    indices: np.ndarray

    @classmethod
    def empty(cls, n: int) -> NeighborLists:
        return cls(np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))

    @classmethod
    def from_lists(cls, lists: Sequence[Sequence[int]]) -> NeighborLists:
        counts = np.array([len(row) for row in lists], dtype=np.int64)
        offsets = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        rows = [np.sort(np.asarray(row, dtype=np.int64)) for row in lists]
        indices = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        return cls(offsets, indices.astype(np.int64))

    @property
    def n(self) -> int:
        return int(self.offsets.size - 1)

    def row(self, v: int) -> np.ndarray:
        return self.indices[self.offsets[v] : self.offsets[v + 1]]

    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def targets(self) -> np.ndarray:
        return np.repeat(np.arange(self.n, dtype=np.int64), self.counts())


@dataclass(frozen=True)
class HopIndex:
    """``orders[r]`` holds the exact-distance-r lists; ``orders[0]`` is empty."""

    n: int
    max_order: int
    orders: Tuple[NeighborLists, ...]
    eccentricity: np.ndarray
    effective_diameter: int

    @property
    def num_orders(self) -> int:
        return self.max_order + 1


def build_hop_index(graph: SparseGraph, max_order_cap: int) -> HopIndex:
    if max_order_cap < 1:
        raise ConfigError(f"max_order_cap must be >= 1 (got {max_order_cap})")
    n = graph.n
    adjacency = graph.to_scipy()
    block = max(1, DISTANCE_BLOCK_ENTRIES // max(1, n))

    counts: List[List[np.ndarray]] = [[] for _ in range(max_order_cap + 1)]
    columns: List[List[np.ndarray]] = [[] for _ in range(max_order_cap + 1)]
    eccentricity = np.zeros(n, dtype=np.int64)
    for start in range(0, n, block):
        sources = np.arange(start, min(n, start + block))
        dist = shortest_path(adjacency, directed=False, unweighted=True, indices=sources)
        finite = np.where(np.isfinite(dist), dist, 0.0)
        eccentricity[sources] = finite.max(axis=1).astype(np.int64)
        for r in range(1, max_order_cap + 1):
            rows, cols = np.nonzero(dist == r)
            counts[r].append(np.bincount(rows, minlength=sources.size))
            columns[r].append(cols.astype(np.int64))

    diameter = int(eccentricity.max()) if n else 0
    max_order = min(diameter, max_order_cap)
    orders = [NeighborLists.empty(n)]
    for r in range(1, max_order + 1):
        per_node = np.concatenate(counts[r]) if counts[r] else np.zeros(0, dtype=np.int64)
        offsets = np.concatenate(([0], np.cumsum(per_node))).astype(np.int64)
        indices = np.concatenate(columns[r]) if columns[r] else np.zeros(0, dtype=np.int64)
        orders.append(NeighborLists(offsets, indices))
    return HopIndex(
        n=n,
        max_order=max_order,
        orders=tuple(orders),
        eccentricity=eccentricity,
        effective_diameter=diameter,
    )


def khop_neighbors(index: HopIndex, v: int, r: int) -> np.ndarray:
    """Nodes at shortest-path distance exactly ``r`` from ``v``, sorted; r = 0 gives nothing."""
    if not 0 <= r <= index.max_order:
        raise DataError(f"Hop order {r} outside 0..{index.max_order}")
    if not 0 <= v < index.n:
        raise DataError(f"Node {v} outside 0..{index.n - 1}")
    return index.orders[r].row(v).copy()


def support_mask(index: HopIndex) -> np.ndarray:
    """(n, max_order + 1) boolean; column r is true where the order-r list is nonempty."""
    mask = np.zeros((index.n, index.num_orders), dtype=bool)
    mask[:, 0] = True
    for r in range(1, index.num_orders):
        mask[:, r] = index.orders[r].counts() > 0
    return mask


def lists_for_order(index: HopIndex, r: int) -> NeighborLists:
    if not 0 <= r <= index.max_order:
        raise DataError(f"Hop order {r} outside 0..{index.max_order}")
    return index.orders[r]


def lists_for_choice(index: HopIndex, chosen: np.ndarray) -> NeighborLists:
    """Row v taken from the order-``chosen[v]`` lists."""
    chosen = np.asarray(chosen, dtype=np.int64)
    if chosen.shape != (index.n,):
        raise DataError(f"Expected one chosen order per node, got shape {chosen.shape}")
    if chosen.size and (chosen.min() < 0 or chosen.max() > index.max_order):
        raise DataError(f"Chosen orders outside 0..{index.max_order}")
    targets = []
    sources = []
    for r in range(1, index.num_orders):
        lists = index.orders[r]
        row_targets = lists.targets()
        keep = chosen[row_targets] == r
        targets.append(row_targets[keep])
        sources.append(lists.indices[keep])
    if not targets:
        return NeighborLists.empty(index.n)
    all_targets = np.concatenate(targets)
    all_sources = np.concatenate(sources)
    order = np.argsort(all_targets, kind="stable")
    per_node = np.bincount(all_targets, minlength=index.n)
    offsets = np.concatenate(([0], np.cumsum(per_node))).astype(np.int64)
    return NeighborLists(offsets, all_sources[order])


__all__ = [
    "HopIndex",
    "NeighborLists",
    "build_hop_index",
    "khop_neighbors",
    "lists_for_choice",
    "lists_for_order",
    "support_mask",
]
