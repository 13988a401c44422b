"""Masked binary cross-entropy over the labeled nodes."""

from __future__ import annotations

import numpy as np

from ..constants import PROB_CLAMP
from ..diffcore import DiffNode, ops
from ..errors import DataError


def masked_bce_loss(probabilities: DiffNode, labels: np.ndarray, labeled_mask: np.ndarray) -> DiffNode:
    """-(1/|L|) Σ_L [y log p + (1 - y) log(1 - p)], with p clamped away from 0 and 1."""
    labeled = np.flatnonzero(np.asarray(labeled_mask, dtype=bool))
    if labeled.size == 0:
        raise DataError("No labeled nodes; the loss is undefined")
    y = np.asarray(labels, dtype=np.float64)[labeled]
    p = ops.clip(ops.gather_rows(probabilities, labeled), PROB_CLAMP, 1.0 - PROB_CLAMP)
    log_p = ops.log(p)
    log_q = ops.log(ops.add(ops.scale(p, -1.0), 1.0))
    terms = ops.add(ops.multiply(log_p, y), ops.multiply(log_q, 1.0 - y))
    return ops.scale(ops.mean(terms), -1.0)


__all__ = ["masked_bce_loss"]
