"""Synthetic benchmarks: long-range path graphs and a two-class document corpus."""

from __future__ import annotations

from typing import List, Tuple

import numpy as np

from ..errors import DataError
from ..graph.dataset import Dataset
from ..graph.knn import FeatureMatrix, SparseGraph

SIGNAL_COLUMN = 0


def _balanced_bits(count: int, rng: np.random.Generator) -> np.ndarray:
    bits = (np.arange(count) % 2).astype(np.int64)
    return rng.permutation(bits)


def synth_longrange(n_nodes: int, distance: int, seed: int, feature_dim: int = 8) -> Tuple[Dataset, SparseGraph]:
    """Disjoint paths of ``distance + 1`` nodes; each head's label sits on its tail.

    The tail carries +1 (label 1) or -1 (label 0) in the signal column; every other
    entry is uniform noise in [-1, 1]. Only heads are targets. Nodes left over after
    the last full path form one extra path with no target.
    """
    if distance < 1:
        raise DataError(f"distance must be >= 1 (got {distance})")
    if n_nodes < 4 * distance:
        raise DataError(f"n_nodes must be >= 4 * distance (got {n_nodes} for distance {distance})")
    if feature_dim < 1:
        raise DataError("feature_dim must be >= 1")
    rng = np.random.default_rng(seed)
    length = distance + 1
    paths = n_nodes // length
    bits = _balanced_bits(paths, rng)
    rows = rng.uniform(-1.0, 1.0, size=(n_nodes, feature_dim))

    labels = np.zeros(n_nodes, dtype=np.int64)
    target = np.zeros(n_nodes, dtype=bool)
    heads = np.arange(paths) * length
    tails = heads + distance
    rows[tails, SIGNAL_COLUMN] = np.where(bits == 1, 1.0, -1.0)
    labels[: paths * length] = np.repeat(bits, length)
    target[heads] = True

    edges: List[Tuple[int, int]] = []
    for start in heads:
        edges.extend((int(start + offset), int(start + offset + 1)) for offset in range(distance))
    leftover = np.arange(paths * length, n_nodes)
    edges.extend((int(u), int(v)) for u, v in zip(leftover[:-1], leftover[1:]))

    dataset = Dataset(
        features=FeatureMatrix(rows),
        labels=labels,
        labeled_mask=np.zeros(n_nodes, dtype=bool),
        ids=np.array([str(node) for node in range(n_nodes)]),
        target_mask=target,
    )
    return dataset, SparseGraph.from_edges(n_nodes, edges)


def synth_corpus(
    n_docs: int,
    seed: int,
    shared_vocab: int = 200,
    class_vocab: int = 40,
    class_rate: float = 0.25,
    length_range: Tuple[int, int] = (20, 40),
) -> Tuple[List[str], np.ndarray]:
    """Two balanced classes of documents drawing mostly from a shared vocabulary.

    A ``class_rate`` share of each document's tokens comes from its class's own words.
    """
    if n_docs < 2:
        raise DataError("n_docs must be >= 2")
    rng = np.random.default_rng(seed)
    labels = _balanced_bits(n_docs, rng)
    shared = [f"s{idx}" for idx in range(shared_vocab)]
    own = {cls: [f"c{cls}w{idx}" for idx in range(class_vocab)] for cls in (0, 1)}
    documents = []
    for label in labels:
        length = int(rng.integers(length_range[0], length_range[1] + 1))
        from_class = rng.random(length) < class_rate
        words = [
            own[int(label)][rng.integers(class_vocab)] if pick else shared[rng.integers(shared_vocab)]
            for pick in from_class
        ]
        documents.append(" ".join(words))
    return documents, labels


__all__ = ["SIGNAL_COLUMN", "synth_corpus", "synth_longrange"]
