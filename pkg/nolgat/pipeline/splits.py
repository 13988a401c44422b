"""Stratified labeled/unlabeled splits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigError, DataError


@dataclass(frozen=True)
class SplitSpec:
    seed: int
    label_fraction: float
    labeled_mask: np.ndarray

    @property
    def labeled_count(self) -> int:
        return int(self.labeled_mask.sum())


def make_split(
    labels: np.ndarray,
    fraction: float,
    seed: int,
    candidates: Optional[np.ndarray] = None,
) -> SplitSpec:
    """Sample round(fraction * n_c) candidates of each class without replacement."""
    if not 0.0 < fraction < 1.0:
        raise ConfigError(f"label_fraction must lie in (0, 1) (got {fraction})")
    labels = np.asarray(labels, dtype=np.int64)
    pool = np.ones(labels.shape, dtype=bool) if candidates is None else np.asarray(candidates, dtype=bool)
    rng = np.random.default_rng(seed)
    mask = np.zeros(labels.shape, dtype=bool)
    for cls in (0, 1):
        members = np.flatnonzero(pool & (labels == cls))
        if members.size == 0:
            raise DataError(f"Class {cls} has no candidate nodes; both classes are required")
        count = int(np.floor(fraction * members.size + 0.5))
        if count == 0:
            raise DataError(
                f"label_fraction {fraction} selects no labeled items of class {cls} ({members.size} candidates)"
            )
        mask[rng.choice(members, size=count, replace=False)] = True
    return SplitSpec(seed=int(seed), label_fraction=float(fraction), labeled_mask=mask)


__all__ = ["SplitSpec", "make_split"]
