"""Named learnable parameters with deterministic initialisation."""

from __future__ import annotations

import zlib
from typing import Dict, Iterator, List, Sequence, Tuple

import numpy as np

from .node import DiffNode

INITIALISERS = ("glorot", "zeros")


def glorot_uniform(shape: Sequence[int], rng: np.random.Generator) -> np.ndarray:
    """Glorot/Xavier uniform over the last two axes (fan-in, fan-out)."""
    shape = tuple(int(dim) for dim in shape)
    if len(shape) == 1:
        fan_in = fan_out = shape[0]
    else:
        receptive = int(np.prod(shape[:-2])) if len(shape) > 2 else 1
        fan_in, fan_out = shape[-2] * receptive, shape[-1] * receptive
    limit = np.sqrt(6.0 / max(1, fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class ParamStore:
    """Parameters keyed by identifier; every name draws from its own seeded stream.

    Keying the stream on the name keeps one parameter's values independent of
    how many other parameters were created before it.
    """

    def __init__(self, rng_seed: int = 0) -> None:
        self.rng_seed = int(rng_seed)
        self._params: Dict[str, DiffNode] = {}

    def _rng_for(self, name: str) -> np.random.Generator:
        seq = np.random.SeedSequence(self.rng_seed, spawn_key=(zlib.crc32(name.encode("utf-8")),))
        return np.random.default_rng(seq)

    def create(self, name: str, shape: Sequence[int], init: str = "glorot") -> DiffNode:
        if name in self._params:
            raise ValueError(f"Parameter '{name}' already exists")
        if init == "glorot":
            data = glorot_uniform(shape, self._rng_for(name))
        elif init == "zeros":
            data = np.zeros(tuple(shape), dtype=np.float64)
        else:
            raise ValueError(f"Unknown initialiser '{init}'; expected one of {INITIALISERS}")
        node = DiffNode(data, requires_grad=True, name=name)
        self._params[name] = node
        return node

    def __getitem__(self, name: str) -> DiffNode:
        return self._params[name]

    def __contains__(self, name: object) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def __iter__(self) -> Iterator[str]:
        return iter(self.names())

    def names(self) -> List[str]:
        return sorted(self._params)

    def items(self) -> List[Tuple[str, DiffNode]]:
        return [(name, self._params[name]) for name in self.names()]

    def zero_grad(self) -> None:
        for node in self._params.values():
            node.zero_grad()

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {name: node.data.copy() for name, node in self.items()}

    def load(self, values: Dict[str, np.ndarray]) -> None:
        for name, value in values.items():
            node = self._params[name]
            if np.shape(value) != node.shape:
                raise ValueError(f"Shape mismatch loading '{name}': {np.shape(value)} vs {node.shape}")
            node.data = np.array(value, dtype=np.float64)


__all__ = ["INITIALISERS", "ParamStore", "glorot_uniform"]
