"""Minimal differentiable tensor engine: tensors, ops, losses and optimizers."""

from .gradcheck import gradcheck
from .ops import (
    add,
    concat,
    conv2d,
    cross_entropy,
    flatten,
    matmul,
    mul,
    relu,
    reshape,
    soft_cross_entropy,
    softmax,
    softmax_cross_entropy,
    tensor_sum,
)
from .optim import OptimizerState, adam_step, optimizer_step, sgd_step
from .tensor import Function, Parameters, Tensor

__all__ = [
    "Function",
    "Parameters",
    "Tensor",
    "OptimizerState",
    "add",
    "adam_step",
    "concat",
    "conv2d",
    "cross_entropy",
    "flatten",
    "gradcheck",
    "matmul",
    "mul",
    "optimizer_step",
    "relu",
    "reshape",
    "sgd_step",
    "soft_cross_entropy",
    "softmax",
    "softmax_cross_entropy",
    "tensor_sum",
]
