"""Document featurisation and dataset ingestion."""

from __future__ import annotations

import hashlib
import re
from dataclasses import replace
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.preprocessing import normalize

from ..errors import ConfigError, DataError
from ..graph.dataset import Dataset, load_dataset_csv
from ..graph.knn import FeatureMatrix

_TOKEN_PATTERN = re.compile(r"[0-9a-z]+")


def tokenize(text: str) -> List[str]:
    return _TOKEN_PATTERN.findall(text.lower())


def token_bucket(token: str, dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


def _default_ids(count: int) -> List[str]:
    return [str(idx) for idx in range(count)]


def hashed_tf(documents: Sequence[str], dim: int, ids: Optional[Sequence[str]] = None) -> FeatureMatrix:
    """Token counts hashed into ``dim`` buckets, then L2-normalised per row."""
    if dim < 1:
        raise ConfigError(f"feature_dim must be >= 1 (got {dim})")
    ids = list(ids) if ids is not None else _default_ids(len(documents))
    counts = np.zeros((len(documents), dim), dtype=np.float64)
    for row, (doc_id, text) in enumerate(zip(ids, documents)):
        tokens = tokenize(text)
        if not tokens:
            raise DataError(f"Document {doc_id} is empty after tokenisation")
        for token in tokens:
            counts[row, token_bucket(token, dim)] += 1.0
    return FeatureMatrix(normalize(counts))


def precomputed(vectors: Sequence[Sequence[float]], ids: Optional[Sequence[str]] = None) -> FeatureMatrix:
    ids = list(ids) if ids is not None else _default_ids(len(vectors))
    rows = [np.asarray(vector, dtype=np.float64) for vector in vectors]
    if not rows:
        raise DataError("No feature vectors supplied")
    width = rows[0].shape
    for doc_id, row in zip(ids, rows):
        if row.ndim != 1 or row.shape != width:
            raise DataError(f"Vector for document {doc_id} has width {row.shape}, expected {width}")
    return FeatureMatrix(np.vstack(rows))


def featurize(
    corpus: Sequence,
    featurizer: str,
    dim: int,
    ids: Optional[Sequence[str]] = None,
) -> FeatureMatrix:
    if featurizer == "hashed-tf":
        return hashed_tf(corpus, dim, ids)
    if featurizer == "precomputed":
        return precomputed(corpus, ids)
    raise ConfigError(f"Unknown featurizer '{featurizer}'")


def _read_lines(path: Path) -> List[str]:
    if not path.exists():
        raise DataError(f"File not found: {path}")
    return path.read_text(encoding="utf-8").splitlines()


def load_text_corpus(text_path: Path, labels_path: Path) -> Tuple[List[str], np.ndarray, List[str]]:
    """One document per line with a parallel file of 0/1 labels."""
    documents = _read_lines(Path(text_path))
    raw_labels = [line.strip() for line in _read_lines(Path(labels_path))]
    if len(documents) != len(raw_labels):
        raise DataError(f"{len(documents)} documents but {len(raw_labels)} labels")
    ids = _default_ids(len(documents))
    labels = []
    for doc_id, value in zip(ids, raw_labels):
        if value not in ("0", "1"):
            raise DataError(f"Label for document {doc_id} is '{value}'; expected 0 or 1")
        labels.append(int(value))
    return documents, np.asarray(labels, dtype=np.int64), ids


def write_text_corpus(documents: Iterable[str], labels: Iterable[int], text_path: Path, labels_path: Path) -> None:
    text_path = Path(text_path)
    labels_path = Path(labels_path)
    text_path.parent.mkdir(parents=True, exist_ok=True)
    labels_path.parent.mkdir(parents=True, exist_ok=True)
    text_path.write_text("".join(f"{doc}\n" for doc in documents), encoding="utf-8")
    labels_path.write_text("".join(f"{int(label)}\n" for label in labels), encoding="utf-8")


def load_dataset(
    featurizer: str,
    dim: int,
    dataset_path: Optional[Path] = None,
    text_path: Optional[Path] = None,
    labels_path: Optional[Path] = None,
) -> Dataset:
    """Precomputed CSV passes through unchanged; raw text goes through the hashed featurizer."""
    if featurizer == "precomputed":
        if dataset_path is None:
            raise ConfigError("featurizer 'precomputed' needs dataset_path")
        dataset = load_dataset_csv(Path(dataset_path))
        return replace(dataset, features=featurize(dataset.features.rows, featurizer, dim, dataset.ids.tolist()))
    if featurizer == "hashed-tf":
        if text_path is None or labels_path is None:
            raise ConfigError("featurizer 'hashed-tf' needs text_path and labels_path")
        documents, labels, ids = load_text_corpus(Path(text_path), Path(labels_path))
        features = featurize(documents, featurizer, dim, ids)
        return Dataset(features=features, labels=labels, labeled_mask=np.zeros(features.n, dtype=bool), ids=ids)
    raise ConfigError(f"Unknown featurizer '{featurizer}'")


__all__ = [
    "featurize",
    "hashed_tf",
    "load_dataset",
    "load_text_corpus",
    "precomputed",
    "token_bucket",
    "tokenize",
    "write_text_corpus",
]
