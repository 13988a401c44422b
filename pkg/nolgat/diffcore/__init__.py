"""Reverse-mode differentiation over dense float64 arrays."""

from . import ops
from .gradcheck import grad_check, grad_check_per_param, relative_error
from .node import DiffNode, apply, as_node, backward, constant, op_kinds, register_op
from .optim import AdamState, adam_step
from .params import ParamStore, glorot_uniform

__all__ = [
    "AdamState",
    "DiffNode",
    "ParamStore",
    "adam_step",
    "apply",
    "as_node",
    "backward",
    "constant",
    "glorot_uniform",
    "grad_check",
    "grad_check_per_param",
    "op_kinds",
    "ops",
    "register_op",
    "relative_error",
]
