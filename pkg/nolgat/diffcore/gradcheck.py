"""Central finite-difference gradient checking."""

from __future__ import annotations

from typing import Callable, Dict, Iterable, Optional

import numpy as np

from ..errors import NumericalError
from .node import DiffNode
from .params import ParamStore

LossFn = Callable[[ParamStore], DiffNode]


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    return np.abs(analytic - numeric) / np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))


def _evaluate(loss_fn: LossFn, params: ParamStore, name: str, index: tuple, sign: str) -> float:
    value = loss_fn(params).item()
    if not np.isfinite(value):
        raise NumericalError(f"Non-finite loss {value} with '{name}'{list(index)} perturbed {sign}eps")
    return value


def grad_check_per_param(
    loss_fn: LossFn,
    params: ParamStore,
    eps: float = 1e-6,
    names: Optional[Iterable[str]] = None,
) -> Dict[str, float]:
    """Maximum relative error per parameter. ``loss_fn`` must be deterministic (frozen noise)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    selected = params.names() if names is None else sorted(names)

    params.zero_grad()
    loss = loss_fn(params)
    if not np.isfinite(loss.item()):
        raise NumericalError(f"Non-finite loss {loss.item()} at the unperturbed parameters")
    loss.backward()
    analytic = {name: params[name].grad.copy() for name in selected}
    params.zero_grad()

    errors: Dict[str, float] = {}
    for name in selected:
        node = params[name]
        numeric = np.zeros_like(node.data)
        for index in np.ndindex(node.shape):
            original = node.data[index]
            node.data[index] = original + eps
            upper = _evaluate(loss_fn, params, name, index, "+")
            node.data[index] = original - eps
            lower = _evaluate(loss_fn, params, name, index, "-")
            node.data[index] = original
            numeric[index] = (upper - lower) / (2.0 * eps)
        errors[name] = float(relative_error(analytic[name], numeric).max()) if node.size else 0.0
    return errors


def grad_check(
    loss_fn: LossFn,
    params: ParamStore,
    eps: float = 1e-6,
    names: Optional[Iterable[str]] = None,
) -> float:
    """Max over parameter entries of |analytic - numeric| / max(1e-8, |analytic| + |numeric|)."""
    errors = grad_check_per_param(loss_fn, params, eps, names)
    return max(errors.values(), default=0.0)


__all__ = ["grad_check", "grad_check_per_param", "relative_error"]
