"""Operation kinds for the differentiable core and thin functional wrappers."""

from __future__ import annotations

from typing import Any, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.special import expit, logsumexp

from ..errors import ShapeError
from .node import DiffNode, apply, register_op


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(kind: str, a: np.ndarray, b: np.ndarray) -> Tuple[int, ...]:
    try:
        shape = np.broadcast_shapes(a.shape, b.shape)
    except ValueError as exc:
        raise ShapeError(kind, [a.shape, b.shape]) from exc
    return shape


def _check_segments(kind: str, values: np.ndarray, attrs: Mapping[str, Any]) -> Tuple[np.ndarray, int]:
    ids = np.asarray(attrs["segment_ids"], dtype=np.int64)
    num = int(attrs.get("num_segments", int(ids[-1]) + 1 if ids.size else 0))
    if values.ndim == 0 or ids.shape != (values.shape[0],):
        raise ShapeError(kind, [values.shape, ids.shape], "segment ids must cover every row")
    if ids.size and (ids[0] < 0 or ids[-1] >= num or np.any(np.diff(ids) < 0)):
        raise ShapeError(kind, [values.shape, ids.shape], "segment ids must be nondecreasing and within range")
    return ids, num


def _segment_reduce(ufunc: np.ufunc, values: np.ndarray, ids: np.ndarray, num: int, fill: float) -> np.ndarray:
    out = np.full((num,) + values.shape[1:], fill, dtype=np.float64)
    if values.shape[0] == 0:
        return out
    counts = np.bincount(ids, minlength=num)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    present = counts > 0
    out[present] = ufunc.reduceat(values, starts[present], axis=0)
    return out


def _scatter_rows(grad: np.ndarray, index: np.ndarray, rows: int) -> np.ndarray:
    # CSR product sums duplicate indices in a fixed order
    m = index.shape[0]
    flat = grad.reshape(m, -1)
    scatter = sparse.csr_matrix((np.ones(m), (index, np.arange(m))), shape=(rows, m))
    return np.asarray(scatter @ flat).reshape((rows,) + grad.shape[1:])


@register_op("matmul", arity=2)
class _MatMul:
    @staticmethod
    def forward(datas, attrs):
        a, b = datas
        if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
            raise ShapeError("matmul", [a.shape, b.shape])
        return a @ b, None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        a, b = datas
        return grad @ b.T, a.T @ grad


@register_op("add", arity=2)
class _Add:
    @staticmethod
    def forward(datas, attrs):
        a, b = datas
        _broadcast_shape("add", a, b)
        return a + b, None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        a, b = datas
        return _unbroadcast(grad, a.shape), _unbroadcast(grad, b.shape)


@register_op("multiply", arity=2)
class _Multiply:
    @staticmethod
    def forward(datas, attrs):
        a, b = datas
        _broadcast_shape("multiply", a, b)
        return a * b, None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        a, b = datas
        return _unbroadcast(grad * b, a.shape), _unbroadcast(grad * a, b.shape)


@register_op("concat")
class _Concat:
    @staticmethod
    def forward(datas, attrs):
        shapes = [d.shape for d in datas]
        if not datas or any(d.ndim == 0 or d.shape[:-1] != datas[0].shape[:-1] for d in datas):
            raise ShapeError("concat", shapes, "leading dimensions must match")
        return np.concatenate(datas, axis=-1), np.cumsum([d.shape[-1] for d in datas])[:-1]

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        return tuple(np.split(grad, ctx, axis=-1))


@register_op("leaky-relu", arity=1)
class _LeakyRelu:
    @staticmethod
    def forward(datas, attrs):
        (x,) = datas
        slope = float(attrs.get("slope", 0.2))
        return np.where(x > 0, x, slope * x), slope

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        (x,) = datas
        return (grad * np.where(x > 0, 1.0, ctx),)


@register_op("elu", arity=1)
class _Elu:
    @staticmethod
    def forward(datas, attrs):
        (x,) = datas
        return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0))), None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        (x,) = datas
        return (grad * np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0))),)


@register_op("exp", arity=1)
class _Exp:
    @staticmethod
    def forward(datas, attrs):
        return np.exp(datas[0]), None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        return (grad * out,)


@register_op("log", arity=1)
class _Log:
    @staticmethod
    def forward(datas, attrs):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(datas[0]), None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (grad / datas[0],)


@register_op("sigmoid", arity=1)
class _Sigmoid:
    @staticmethod
    def forward(datas, attrs):
        return expit(datas[0]), None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        return (grad * out * (1.0 - out),)


@register_op("row-softmax", arity=1)
class _RowSoftmax:
    @staticmethod
    def forward(datas, attrs):
        (x,) = datas
        if x.ndim == 0:
            raise ShapeError("row-softmax", [x.shape])
        shifted = x - np.max(x, axis=-1, keepdims=True)
        e = np.exp(shifted)
        return e / np.sum(e, axis=-1, keepdims=True), None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        inner = np.sum(grad * out, axis=-1, keepdims=True)
        return (out * (grad - inner),)


@register_op("log-softmax", arity=1)
class _LogSoftmax:
    @staticmethod
    def forward(datas, attrs):
        (x,) = datas
        if x.ndim == 0:
            raise ShapeError("log-softmax", [x.shape])
        return x - logsumexp(x, axis=-1, keepdims=True), None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        probs = np.exp(out)
        return (grad - probs * np.sum(grad, axis=-1, keepdims=True),)


@register_op("segment-softmax", arity=1)
class _SegmentSoftmax:
    @staticmethod
    def forward(datas, attrs):
        (x,) = datas
        ids, num = _check_segments("segment-softmax", x, attrs)
        peak = _segment_reduce(np.maximum, x, ids, num, -np.inf)
        e = np.exp(x - peak[ids])
        total = _segment_reduce(np.add, e, ids, num, 0.0)
        return e / total[ids], (ids, num)

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        ids, num = ctx
        inner = _segment_reduce(np.add, grad * out, ids, num, 0.0)
        return (out * (grad - inner[ids]),)


@register_op("segment-sum", arity=1)
class _SegmentSum:
    @staticmethod
    def forward(datas, attrs):
        (x,) = datas
        ids, num = _check_segments("segment-sum", x, attrs)
        return _segment_reduce(np.add, x, ids, num, 0.0), (ids, num)

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        ids, _ = ctx
        return (grad[ids],)


@register_op("gather-rows", arity=1)
class _GatherRows:
    @staticmethod
    def forward(datas, attrs):
        (x,) = datas
        index = np.asarray(attrs["index"], dtype=np.int64)
        if x.ndim == 0 or index.ndim != 1 or (index.size and (index.min() < 0 or index.max() >= x.shape[0])):
            raise ShapeError("gather-rows", [x.shape, index.shape], "index out of range")
        return x[index], index

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        (x,) = datas
        return (_scatter_rows(grad, ctx, x.shape[0]),)


@register_op("scalar-multiply", arity=1)
class _ScalarMultiply:
    @staticmethod
    def forward(datas, attrs):
        return datas[0] * float(attrs["scalar"]), None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        return (grad * float(attrs["scalar"]),)


@register_op("sum", arity=1)
class _Sum:
    @staticmethod
    def forward(datas, attrs):
        (x,) = datas
        axis = attrs.get("axis")
        if axis is not None and not -x.ndim <= axis < x.ndim:
            raise ShapeError("sum", [x.shape], f"axis {axis} out of range")
        return np.sum(x, axis=axis), None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        (x,) = datas
        axis = attrs.get("axis")
        if axis is not None:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad, x.shape).copy(),)


@register_op("mean", arity=1)
class _Mean:
    @staticmethod
    def forward(datas, attrs):
        (x,) = datas
        axis = attrs.get("axis")
        if x.size == 0 or (axis is not None and not -x.ndim <= axis < x.ndim):
            raise ShapeError("mean", [x.shape])
        return np.mean(x, axis=axis), None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        (x,) = datas
        axis = attrs.get("axis")
        count = x.size if axis is None else x.shape[axis]
        if axis is not None:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad / count, x.shape).copy(),)


@register_op("reshape", arity=1)
class _Reshape:
    @staticmethod
    def forward(datas, attrs):
        (x,) = datas
        try:
            return x.reshape(attrs["shape"]), None
        except ValueError as exc:
            raise ShapeError("reshape", [x.shape, tuple(attrs["shape"])]) from exc

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        return (grad.reshape(datas[0].shape),)


@register_op("clip", arity=1)
class _Clip:
    @staticmethod
    def forward(datas, attrs):
        return np.clip(datas[0], attrs["low"], attrs["high"]), None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        (x,) = datas
        inside = (x >= attrs["low"]) & (x <= attrs["high"])
        return (grad * inside,)


@register_op("straight-through", arity=1)
class _StraightThrough:
    """Forward emits ``attrs['hard']``; backward treats the op as identity."""

    @staticmethod
    def forward(datas, attrs):
        (relaxed,) = datas
        hard = np.asarray(attrs["hard"], dtype=np.float64)
        if hard.shape != relaxed.shape:
            raise ShapeError("straight-through", [relaxed.shape, hard.shape])
        return hard.copy(), None

    @staticmethod
    def backward(grad, datas, out, ctx, attrs):
        return (grad,)


# ----------------------------------------------------------------------
# Functional wrappers
# ----------------------------------------------------------------------
def matmul(a: Any, b: Any) -> DiffNode:
    return apply("matmul", (a, b))


def add(a: Any, b: Any) -> DiffNode:
    return apply("add", (a, b))


def multiply(a: Any, b: Any) -> DiffNode:
    return apply("multiply", (a, b))


def concat(inputs: Sequence[Any]) -> DiffNode:
    return apply("concat", inputs)


def leaky_relu(x: Any, slope: float = 0.2) -> DiffNode:
    return apply("leaky-relu", (x,), {"slope": slope})


def elu(x: Any) -> DiffNode:
    return apply("elu", (x,))


def exp(x: Any) -> DiffNode:
    return apply("exp", (x,))


def log(x: Any) -> DiffNode:
    return apply("log", (x,))


def sigmoid(x: Any) -> DiffNode:
    return apply("sigmoid", (x,))


def row_softmax(x: Any) -> DiffNode:
    return apply("row-softmax", (x,))


def log_softmax(x: Any) -> DiffNode:
    return apply("log-softmax", (x,))


def segment_softmax(x: Any, segment_ids: np.ndarray, num_segments: Optional[int] = None) -> DiffNode:
    attrs: dict = {"segment_ids": segment_ids}
    if num_segments is not None:
        attrs["num_segments"] = num_segments
    return apply("segment-softmax", (x,), attrs)


def segment_sum(x: Any, segment_ids: np.ndarray, num_segments: Optional[int] = None) -> DiffNode:
    attrs: dict = {"segment_ids": segment_ids}
    if num_segments is not None:
        attrs["num_segments"] = num_segments
    return apply("segment-sum", (x,), attrs)


def gather_rows(x: Any, index: np.ndarray) -> DiffNode:
    return apply("gather-rows", (x,), {"index": index})


def scale(x: Any, scalar: float) -> DiffNode:
    return apply("scalar-multiply", (x,), {"scalar": scalar})


def total(x: Any, axis: Optional[int] = None) -> DiffNode:
    return apply("sum", (x,), {"axis": axis})


def mean(x: Any, axis: Optional[int] = None) -> DiffNode:
    return apply("mean", (x,), {"axis": axis})


def reshape(x: Any, shape: Sequence[int]) -> DiffNode:
    return apply("reshape", (x,), {"shape": tuple(shape)})


def clip(x: Any, low: float, high: float) -> DiffNode:
    return apply("clip", (x,), {"low": low, "high": high})


def straight_through(relaxed: Any, hard: np.ndarray) -> DiffNode:
    return apply("straight-through", (relaxed,), {"hard": hard})


def dropout_mask(shape: Sequence[int], rate: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout keep mask: entries are 0 or 1/(1 - rate)."""
    if not 0.0 <= rate < 1.0:
        raise ValueError("dropout rate must lie in [0, 1)")
    if rate == 0.0:
        return np.ones(tuple(shape))
    keep = rng.random(tuple(shape)) >= rate
    return keep / (1.0 - rate)


__all__ = [
    "add",
    "clip",
    "concat",
    "dropout_mask",
    "elu",
    "exp",
    "gather_rows",
    "leaky_relu",
    "log",
    "log_softmax",
    "matmul",
    "mean",
    "multiply",
    "reshape",
    "row_softmax",
    "scale",
    "segment_softmax",
    "segment_sum",
    "sigmoid",
    "straight_through",
    "total",
]
