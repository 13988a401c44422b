"""Feature matrices, CSR adjacency and the cosine KNN graph."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Tuple

import numpy as np
from scipy import sparse
from sklearn.metrics.pairwise import cosine_similarity

from ..errors import DataError

# rows of the similarity matrix materialised at once
SIMILARITY_BLOCK = 1024


@dataclass(frozen=True)
class FeatureMatrix:
    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise DataError(f"Feature matrix must be 2-D, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            node = int(np.argwhere(~np.isfinite(rows))[0][0])
            raise DataError(f"Feature row {node} contains non-finite values")
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return int(self.rows.shape[0])

    @property
    def dim(self) -> int:
        return int(self.rows.shape[1])

    def require_nonzero_rows(self) -> None:
        norms = np.linalg.norm(self.rows, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise DataError(f"Feature row {int(zero[0])} has zero norm; cosine similarity is undefined")


@dataclass(frozen=True)
class SparseGraph:
    """Undirected unweighted adjacency in compressed row form."""

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    undirected: bool = True

    def __post_init__(self) -> None:
        offsets = np.asarray(self.row_offsets, dtype=np.int64)
        cols = np.asarray(self.col_indices, dtype=np.int64)
        if offsets.shape != (self.n + 1,) or offsets[0] != 0 or offsets[-1] != cols.size:
            raise DataError("row_offsets do not describe col_indices")
        object.__setattr__(self, "row_offsets", offsets)
        object.__setattr__(self, "col_indices", cols)

    @classmethod
    def from_scipy(cls, matrix: sparse.spmatrix) -> SparseGraph:
        coo = sparse.coo_matrix(matrix)
        keep = (coo.row != coo.col) & (coo.data != 0)
        rows = np.concatenate((coo.row[keep], coo.col[keep]))
        cols = np.concatenate((coo.col[keep], coo.row[keep]))
        csr = sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=coo.shape)
        csr.sum_duplicates()
        csr.sort_indices()
        return cls(n=csr.shape[0], row_offsets=csr.indptr, col_indices=csr.indices)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Tuple[int, int]]) -> SparseGraph:
        pairs = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
            raise DataError(f"Edge endpoint outside 0..{n - 1}")
        data = np.ones(pairs.shape[0])
        return cls.from_scipy(sparse.coo_matrix((data, (pairs[:, 0], pairs[:, 1])), shape=(n, n)))

    def to_scipy(self) -> sparse.csr_matrix:
        data = np.ones(self.col_indices.size)
        return sparse.csr_matrix((data, self.col_indices, self.row_offsets), shape=(self.n, self.n))

    def neighbors(self, v: int) -> np.ndarray:
        return self.col_indices[self.row_offsets[v] : self.row_offsets[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    @property
    def num_edges(self) -> int:
        return int(self.col_indices.size // 2)

    def edges(self) -> np.ndarray:
        """Undirected edges as an (m, 2) array with u < v, sorted."""
        sources = np.repeat(np.arange(self.n), self.degrees())
        keep = sources < self.col_indices
        return np.column_stack((sources[keep], self.col_indices[keep]))

    def is_symmetric(self) -> bool:
        adjacency = self.to_scipy()
        return (adjacency != adjacency.T).nnz == 0


def _top_k_mask(similarity: np.ndarray, k: int) -> np.ndarray:
    """Boolean mask of each row's k largest entries; equal values resolve to the smaller column."""
    kth = -np.partition(-similarity, k - 1, axis=1)[:, k - 1]
    greater = similarity > kth[:, None]
    equal = similarity == kth[:, None]
    need = k - greater.sum(axis=1)
    return greater | (equal & (np.cumsum(equal, axis=1) <= need[:, None]))


def build_knn_graph(features: FeatureMatrix, k: int) -> SparseGraph:
    """Union-symmetrised cosine KNN graph; self-similarity is excluded."""
    n = features.n
    if not 1 <= k < n:
        raise DataError(f"knn_k must satisfy 1 <= k < n (k={k}, n={n})")
    features.require_nonzero_rows()

    sources = []
    targets = []
    for start in range(0, n, SIMILARITY_BLOCK):
        stop = min(n, start + SIMILARITY_BLOCK)
        similarity = cosine_similarity(features.rows[start:stop], features.rows)
        block = np.arange(start, stop)
        similarity[block - start, block] = -np.inf
        rows, cols = np.nonzero(_top_k_mask(similarity, k))
        sources.append(rows + start)
        targets.append(cols)
    src = np.concatenate(sources)
    dst = np.concatenate(targets)
    directed = sparse.coo_matrix((np.ones(src.size), (src, dst)), shape=(n, n))
    return SparseGraph.from_scipy(directed)


def export_edge_list(graph: SparseGraph, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for u, v in graph.edges():
            fh.write(f"{u}\t{v}\n")
    return path


def load_edge_list(path: Path, n: int) -> SparseGraph:
    edges = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'u<TAB>v'")
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: endpoints must be integers") from exc
    return SparseGraph.from_edges(n, edges)


__all__ = [
    "FeatureMatrix",
    "SIMILARITY_BLOCK",
    "SparseGraph",
    "build_knn_graph",
    "export_edge_list",
    "load_edge_list",
]
