"""
Training module
"""

from .optimizer import Adam, SGD, make_optimizer
from .trainer import (
    split_dev,
    split_indices,
    build_model,
    prepare,
    example_loss_and_grads,
    batch_loss,
    first_step_decrease,
    predict,
    evaluate,
    train,
)

__all__ = [
    'Adam',
    'SGD',
    'make_optimizer',
    'split_dev',
    'split_indices',
    'build_model',
    'prepare',
    'example_loss_and_grads',
    'batch_loss',
    'first_step_decrease',
    'predict',
    'evaluate',
    'train',
]
