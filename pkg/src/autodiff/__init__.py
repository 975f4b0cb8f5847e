"""
Reverse-mode differentiation engine
"""

from .tensor import (
    Tensor,
    Tape,
    constant,
    constants,
    matmul,
    transpose,
    add,
    mul,
    scale,
    sum_all,
    concat,
    relu,
    leaky_relu,
    exp,
    log,
    softmax,
    segment_softmax,
    segment_sum,
    segment_mean,
    gather_rows,
    dropout,
    cross_entropy,
)
from .grad_check import grad_check, relative_error, tape_gradients, numeric_gradients

__all__ = [
    'Tensor',
    'Tape',
    'constant',
    'constants',
    'matmul',
    'transpose',
    'add',
    'mul',
    'scale',
    'sum_all',
    'concat',
    'relu',
    'leaky_relu',
    'exp',
    'log',
    'softmax',
    'segment_softmax',
    'segment_sum',
    'segment_mean',
    'gather_rows',
    'dropout',
    'cross_entropy',
    'grad_check',
    'relative_error',
    'tape_gradients',
    'numeric_gradients',
]
