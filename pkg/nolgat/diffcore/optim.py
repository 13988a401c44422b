"""Adam with decoupled weight decay."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from ..errors import NumericalError
from .params import ParamStore


@dataclass
class AdamState:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    weight_decay: float = 5e-4
    step_count: int = 0
    first_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ValueError("beta1 and beta2 must lie in [0, 1)")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be nonnegative")


def adam_step(params: ParamStore, state: AdamState) -> None:
    """One Adam update; decay is applied to the weights before the Adam delta, then grads are zeroed."""
    for name, node in params.items():
        if not np.all(np.isfinite(node.grad)):
            bad = tuple(int(i) for i in np.argwhere(~np.isfinite(node.grad))[0])
            raise NumericalError(f"Non-finite gradient in parameter '{name}' at index {bad}")

    state.step_count += 1
    t = state.step_count
    correction1 = 1.0 - state.beta1**t
    correction2 = 1.0 - state.beta2**t
    for name, node in params.items():
        m = state.first_moment.get(name)
        v = state.second_moment.get(name)
        if m is None or m.shape != node.shape:
            m = np.zeros_like(node.data)
            v = np.zeros_like(node.data)
        g = node.grad
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * g * g
        state.first_moment[name] = m
        state.second_moment[name] = v

        if state.weight_decay:
            node.data = node.data - state.learning_rate * state.weight_decay * node.data
        m_hat = m / correction1
        v_hat = v / correction2
        node.data = node.data - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    params.zero_grad()


__all__ = ["AdamState", "adam_step"]
