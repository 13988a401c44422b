"""Node features, binary labels and the labeled/target masks."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from ..errors import DataError
from .knn import FeatureMatrix


@dataclass(frozen=True)
class Dataset:
    """Labels of unlabeled nodes are kept for evaluation only.

    ``target_mask`` marks the nodes that take part in splitting and evaluation.
    """

    features: FeatureMatrix
    labels: np.ndarray
    labeled_mask: np.ndarray
    ids: np.ndarray
    target_mask: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        n = self.features.n
        labels = np.asarray(self.labels, dtype=np.int64)
        labeled = np.asarray(self.labeled_mask, dtype=bool)
        ids = np.asarray(self.ids).astype(str)
        target = np.ones(n, dtype=bool) if self.target_mask is None else np.asarray(self.target_mask, dtype=bool)
        for name, array in (("labels", labels), ("labeled_mask", labeled), ("ids", ids), ("target_mask", target)):
            if array.shape != (n,):
                raise DataError(f"{name} has shape {array.shape}, expected ({n},)")
        if not np.isin(labels, (0, 1)).all():
            bad = int(np.flatnonzero(~np.isin(labels, (0, 1)))[0])
            raise DataError(f"Label of node {ids[bad]} is {labels[bad]}; labels must be 0 or 1")
        if np.any(labeled & ~target):
            raise DataError("Labeled nodes must be target nodes")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "labeled_mask", labeled)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "target_mask", target)

    @property
    def n(self) -> int:
        return self.features.n

    @property
    def eval_mask(self) -> np.ndarray:
        """Target nodes whose labels were not observed."""
        return self.target_mask & ~self.labeled_mask

    def with_labeled(self, labeled_mask: np.ndarray) -> Dataset:
        return replace(self, labeled_mask=labeled_mask)

    def observed_labels(self) -> np.ndarray:
        """Labels with unobserved entries set to -1."""
        return np.where(self.labeled_mask, self.labels, -1)


def load_dataset_csv(path: Path) -> Dataset:
    """Read ``id,label,f0..f(d-1)``; every node starts unlabeled."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"Dataset file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype={"id": str})
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"Could not parse dataset {path}: {exc}") from exc
    missing = [column for column in ("id", "label") if column not in frame.columns]
    if missing:
        raise DataError(f"Dataset {path} lacks column(s) {missing}")
    feature_columns = [f"f{idx}" for idx in range(len(frame.columns) - 2)]
    if list(frame.columns[2:]) != feature_columns or not feature_columns:
        raise DataError(f"Dataset {path} must have columns id, label, f0..f(d-1)")
    try:
        rows = frame[feature_columns].to_numpy(dtype=np.float64)
        labels = frame["label"].to_numpy(dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise DataError(f"Dataset {path} has non-numeric values: {exc}") from exc
    features = FeatureMatrix(rows)
    return Dataset(
        features=features,
        labels=labels,
        labeled_mask=np.zeros(features.n, dtype=bool),
        ids=frame["id"].to_numpy(),
    )


def save_dataset_csv(dataset: Dataset, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(dataset.features.rows, columns=[f"f{idx}" for idx in range(dataset.features.dim)])
    frame.insert(0, "label", dataset.labels)
    frame.insert(0, "id", dataset.ids)
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


__all__ = ["Dataset", "load_dataset_csv", "save_dataset_csv"]
