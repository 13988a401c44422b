"""Dynamically built reverse-mode computation graph."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import ShapeError

ForwardFn = Callable[[Tuple[np.ndarray, ...], Mapping[str, Any]], Tuple[np.ndarray, Any]]
BackwardFn = Callable[
    [np.ndarray, Tuple[np.ndarray, ...], np.ndarray, Any, Mapping[str, Any]],
    Tuple[Optional[np.ndarray], ...],
]


@dataclass(frozen=True)
class OpKind:
    """Forward evaluation plus vector-Jacobian product for one operation tag."""

    name: str
    forward: ForwardFn
    backward: BackwardFn
    arity: Optional[int] = None


_REGISTRY: Dict[str, OpKind] = {}


def register_op(name: str, *, arity: Optional[int] = None) -> Callable[[type], type]:
    """Class decorator registering an op kind exposing ``forward``/``backward`` staticmethods."""

    def decorator(cls: type) -> type:
        if name in _REGISTRY:
            raise ValueError(f"Op kind '{name}' registered twice")
        _REGISTRY[name] = OpKind(name=name, forward=cls.forward, backward=cls.backward, arity=arity)
        return cls

    return decorator


def op_kinds() -> List[str]:
    return sorted(_REGISTRY)


class DiffNode:
    """A dense float64 array in the computation graph, with its accumulated gradient."""

    __slots__ = ("data", "grad", "op", "parents", "requires_grad", "attrs", "_ctx", "name")

    def __init__(
        self,
        data: Any,
        *,
        requires_grad: bool = False,
        op: str = "leaf",
        parents: Sequence[DiffNode] = (),
        attrs: Optional[Mapping[str, Any]] = None,
        name: Optional[str] = None,
    ) -> None:
        self.data = np.array(data, dtype=np.float64)
        self.grad = np.zeros_like(self.data)
        self.op = op
        self.parents: Tuple[DiffNode, ...] = tuple(parents)
        self.requires_grad = requires_grad
        self.attrs: Mapping[str, Any] = attrs or {}
        self._ctx: Any = None
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError("item", [self.shape], "node is not a scalar")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def backward(self) -> None:
        backward(self)

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"DiffNode({self.op}{label}, shape={self.shape}, requires_grad={self.requires_grad})"


def constant(data: Any) -> DiffNode:
    return DiffNode(data, requires_grad=False, op="constant")


def as_node(value: Any) -> DiffNode:
    return value if isinstance(value, DiffNode) else constant(value)


def apply(kind: str, inputs: Sequence[Any], attrs: Optional[Mapping[str, Any]] = None) -> DiffNode:
    """Evaluate ``kind`` on ``inputs`` and record it for backward."""
    try:
        spec = _REGISTRY[kind]
    except KeyError as exc:
        raise ShapeError(kind, [], "unknown operation kind") from exc
    nodes = tuple(as_node(value) for value in inputs)
    if spec.arity is not None and len(nodes) != spec.arity:
        raise ShapeError(kind, [node.shape for node in nodes], f"expected {spec.arity} input(s)")
    attrs = dict(attrs or {})
    datas = tuple(node.data for node in nodes)
    out_data, ctx = spec.forward(datas, attrs)
    out = DiffNode(
        out_data,
        requires_grad=any(node.requires_grad for node in nodes),
        op=kind,
        parents=nodes,
        attrs=attrs,
    )
    out._ctx = ctx
    return out


def _topological_order(root: DiffNode) -> List[DiffNode]:
    order: List[DiffNode] = []
    visited = set()
    stack: List[Tuple[DiffNode, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if id(parent) not in visited and parent.requires_grad:
                stack.append((parent, False))
    return order


def backward(root: DiffNode) -> None:
    """Accumulate d(root)/d(node) into ``grad`` of every reachable node requiring grad."""
    if root.data.size != 1:
        raise ShapeError("backward", [root.shape], "root must be a scalar")
    if not root.requires_grad:
        return
    order = _topological_order(root)
    # interior grads are per-pass; leaves accumulate until zeroed
    for node in order:
        if node.op != "leaf":
            node.grad = np.zeros_like(node.data)
    root.grad = root.grad + np.ones_like(root.data)
    for node in reversed(order):
        if not node.parents:
            continue
        spec = _REGISTRY[node.op]
        grads = spec.backward(
            node.grad,
            tuple(parent.data for parent in node.parents),
            node.data,
            node._ctx,
            node.attrs,
        )
        for parent, grad in zip(node.parents, grads):
            if grad is None or not parent.requires_grad:
                continue
            parent.grad = parent.grad + grad


__all__ = [
    "DiffNode",
    "OpKind",
    "apply",
    "as_node",
    "backward",
    "constant",
    "op_kinds",
    "register_op",
]
