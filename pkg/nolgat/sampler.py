"""Gumbel noise, Gumbel-Softmax relaxation and straight-through order sampling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union

import numpy as np

from .diffcore import DiffNode, ops
from .errors import ConfigError, DataError

_MANTISSA = 2.0**53

NOISE_STREAM = 0
DROPOUT_STREAM = 1


@dataclass(frozen=True)
class NoiseKey:
    """Counter-based stream keyed by (seed, epoch, layer); node v owns row v of a block."""

    seed: int
    epoch: int
    layer: int
    stream: int = NOISE_STREAM

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream, self.epoch, self.layer))
        return np.random.Generator(np.random.Philox(seq))

    def node_generator(self, node: int) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream, self.epoch, self.layer, node))
        return np.random.Generator(np.random.Philox(seq))

    def uniform_block(self, n: int, width: int) -> np.ndarray:
        return open_uniform(self.generator(), (n, width))

    def gumbel_block(self, n: int, width: int) -> np.ndarray:
        return gumbel_noise(self.uniform_block(n, width))


def open_uniform(rng: np.random.Generator, shape: Any) -> np.ndarray:
    """Uniforms strictly inside (0, 1): midpoints of a 2**53 grid."""
    return (rng.integers(0, 2**53, size=shape).astype(np.float64) + 0.5) / _MANTISSA


def gumbel_noise(u: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    values = np.asarray(u, dtype=np.float64)
    if np.any(~((values > 0.0) & (values < 1.0))):
        raise DataError("Gumbel noise needs uniforms strictly inside (0, 1)")
    noise = -np.log(-np.log(values))
    return float(noise) if noise.ndim == 0 else noise


@dataclass(frozen=True)
class SupportMask:
    """Boolean over hop orders; order 0 is always available."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=bool)
        if values.ndim == 0 or not values.any(axis=-1).all():
            raise DataError("Support mask must allow at least one order per node")
        object.__setattr__(self, "values", values)

    @property
    def width(self) -> int:
        return int(self.values.shape[-1])

    def logit_bias(self) -> np.ndarray:
        return np.where(self.values, 0.0, -np.inf)


@dataclass(frozen=True)
class STSample:
    """``hard`` feeds the forward pass, ``relaxed`` carries the gradient."""

    hard: np.ndarray
    relaxed: DiffNode
    chosen: Union[int, np.ndarray]
    perturbed: np.ndarray

    def straight_through(self) -> DiffNode:
        """Forward value ``hard``, backward identity into ``relaxed``."""
        return ops.straight_through(self.relaxed, self.hard)


def _as_mask(mask: Union[SupportMask, np.ndarray]) -> SupportMask:
    return mask if isinstance(mask, SupportMask) else SupportMask(np.asarray(mask))


def _check_temperature(temperature: float) -> None:
    if not temperature > 0:
        raise ConfigError(f"temperature must be positive (got {temperature})")


def gumbel_softmax(
    log_probs: Any,
    noise: np.ndarray,
    temperature: float,
    mask: Union[SupportMask, np.ndarray],
) -> DiffNode:
    """softmax((log_probs + noise) / temperature) over supported entries; masked entries are exactly 0."""
    _check_temperature(temperature)
    support = _as_mask(mask)
    perturbed = ops.add(ops.add(log_probs, support.logit_bias()), np.asarray(noise, dtype=np.float64))
    return ops.row_softmax(ops.scale(perturbed, 1.0 / temperature))


def sample_orders(
    log_probs: Any,
    noise: np.ndarray,
    temperature: float,
    mask: Union[SupportMask, np.ndarray],
) -> STSample:
    """Straight-through selection over the last axis, given the noise realisation."""
    support = _as_mask(mask)
    relaxed = gumbel_softmax(log_probs, noise, temperature, support)
    values = log_probs.data if isinstance(log_probs, DiffNode) else np.asarray(log_probs, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        perturbed = values + support.logit_bias() + noise
    chosen = np.argmax(perturbed, axis=-1)
    hard = np.eye(support.width)[chosen]
    return STSample(
        hard=hard,
        relaxed=relaxed,
        chosen=int(chosen) if np.ndim(chosen) == 0 else chosen.astype(np.int64),
        perturbed=perturbed,
    )


def st_sample(
    log_probs: Any,
    temperature: float,
    mask: Union[SupportMask, np.ndarray],
    rng: np.random.Generator,
) -> STSample:
    """Draw fresh Gumbel noise from ``rng`` for every entry, then select."""
    support = _as_mask(mask)
    shape = log_probs.shape if isinstance(log_probs, DiffNode) else np.shape(log_probs)
    noise = gumbel_noise(open_uniform(rng, shape))
    return sample_orders(log_probs, np.asarray(noise), temperature, support)


def annealed_temperature(epoch: int, epochs: int, start: float, minimum: float, enabled: bool) -> float:
    """Linear schedule from ``start`` at epoch 0 to ``minimum`` at the last epoch."""
    if not enabled or epochs <= 1:
        return start
    fraction = min(1.0, max(0.0, epoch / (epochs - 1)))
    return start + (minimum - start) * fraction


__all__ = [
    "DROPOUT_STREAM",
    "NOISE_STREAM",
    "NoiseKey",
    "STSample",
    "SupportMask",
    "annealed_temperature",
    "gumbel_noise",
    "gumbel_softmax",
    "open_uniform",
    "sample_orders",
    "st_sample",
]
