"""Reverse-mode autodiff engine: tensors, layers, Adam, gradient checking."""

from . import kernels, nn, optim
from .gradcheck import grad_check
from .tensor import (
    Tensor,
    add,
    causal_conv1d,
    concat,
    dropout,
    grad_enabled,
    interp_linear,
    layer_norm,
    lstm_seq,
    matmul,
    maxpool1d,
    mul,
    no_grad,
    reduce_mean,
    reduce_sum,
    relu,
    reshape,
    sigmoid,
    sub,
    take,
    tanh,
)

__all__ = [
    "Tensor",
    "add",
    "causal_conv1d",
    "concat",
    "dropout",
    "grad_check",
    "grad_enabled",
    "interp_linear",
    "kernels",
    "layer_norm",
    "lstm_seq",
    "matmul",
    "maxpool1d",
    "mul",
    "nn",
    "no_grad",
    "optim",
    "reduce_mean",
    "reduce_sum",
    "relu",
    "reshape",
    "sigmoid",
    "sub",
    "take",
    "tanh",
]
