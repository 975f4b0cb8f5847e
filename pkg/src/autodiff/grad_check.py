# src/autodiff/grad_check.py
"""
Central finite-difference check of tape gradients
"""
from typing import Callable, Dict, Optional
import logging

import numpy as np

from src.autodiff.tensor import Tape, Tensor, constants
from src.errors import NonFiniteError

logger = logging.getLogger(__name__)

LossFn = Callable[[Dict[str, Tensor]], Tensor]


def relative_error(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """|a - b| / max(1, |a|, |b|), elementwise"""
    return np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


def tape_gradients(loss_fn: LossFn, params: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    tape = Tape()
    loss = loss_fn(tape.bind(params))
    if not np.isfinite(loss.data).all():
        raise NonFiniteError("loss is not finite")
    tape.backward(loss)
    return tape.gradients()


def numeric_gradients(loss_fn: LossFn, params: Dict[str, np.ndarray], step: float = 1e-5) -> Dict[str, np.ndarray]:
    """Central differences, one coordinate at a time"""
    perturbed = {name: np.array(value, dtype=np.float64, copy=True) for name, value in params.items()}
    grads = {}

    for name in sorted(perturbed):
        array = perturbed[name]
        grad = np.zeros_like(array)
        flat, flat_grad = array.reshape(-1), grad.reshape(-1)

        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + step
            upper = loss_fn(constants(perturbed)).item()
            flat[i] = original - step
            lower = loss_fn(constants(perturbed)).item()
            flat[i] = original

            if not (np.isfinite(upper) and np.isfinite(lower)):
                raise NonFiniteError(f"loss is not finite while probing {name}[{i}]")
            flat_grad[i] = (upper - lower) / (2.0 * step)

        grads[name] = grad

    return grads


def grad_check(
    loss_fn: LossFn,
    params: Dict[str, np.ndarray],
    step: float = 1e-5,
    per_parameter: Optional[Dict[str, float]] = None,
) -> float:
    """Max relative error between tape and finite-difference gradients

    Args:
        loss_fn: maps bound tensors to a scalar loss; must be deterministic
        params: parameter arrays by name
        step: finite-difference step
        per_parameter: if given, filled with the max error of each parameter
    """
    analytic = tape_gradients(loss_fn, params)
    numeric = numeric_gradients(loss_fn, params, step)

    worst = 0.0
    for name in sorted(params):
        err = float(relative_error(analytic[name], numeric[name]).max()) if params[name].size else 0.0
        if per_parameter is not None:
            per_parameter[name] = err
        worst = max(worst, err)
        logger.debug(f"grad_check {name}: max relative error {err:.2e}")

    return worst
