# src/training/optimizer.py
"""
In-place parameter updates from accumulated gradients
"""
from typing import Dict
import logging

import numpy as np

from src.errors import ConfigError

logger = logging.getLogger(__name__)


class SGD:
    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]):
        for name in sorted(grads):
            params[name] -= self.learning_rate * grads[name]


class Adam:
    """Adam with bias correction"""

    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}

    def step(self, params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray]):
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t

        for name in sorted(grads):
            g = grads[name]
            m = self.m.setdefault(name, np.zeros_like(g))
            v = self.v.setdefault(name, np.zeros_like(g))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[name] -= self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.eps)


def make_optimizer(name: str, learning_rate: float):
    if name == 'adam':
        return Adam(learning_rate)
    if name == 'sgd':
        return SGD(learning_rate)
    raise ConfigError(f"unknown optimizer '{name}'")
