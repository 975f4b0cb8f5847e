# src/autodiff/tensor.py
"""
Dense float64 tensors with reverse-mode gradient recording
"""
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from src.errors import NonFiniteError, ShapeError

logger = logging.getLogger(__name__)

BackwardFn = Callable[[np.ndarray], None]


class Tensor:
    """A numpy array plus the tape bookkeeping needed for backward"""

    __slots__ = ('data', 'grad', 'tape', 'name', '_parents', '_backward')

    def __init__(self, data, tape: Optional['Tape'] = None, name: Optional[str] = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.tape = tape
        self.name = name
        self._parents: Tuple['Tensor', ...] = ()
        self._backward: Optional[BackwardFn] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def requires_grad(self) -> bool:
        return self.tape is not None

    def item(self) -> float:
        return float(self.data)

    def accumulate(self, grad: np.ndarray):
        if self.tape is None:
            return
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64, copy=True)
        else:
            self.grad += grad

    def __repr__(self):
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label})"


class Tape:
    """Records operations in creation order; backward replays them in reverse"""

    def __init__(self, check_finite: bool = False):
        self.check_finite = check_finite
        self.nodes: List[Tensor] = []
        self.parameters: Dict[str, Tensor] = {}
        self._consumed = False

    def variable(self, name: str, data) -> Tensor:
        """Register a trainable leaf"""
        if name in self.parameters:
            raise ValueError(f"parameter '{name}' already registered")
        tensor = Tensor(np.array(data, dtype=np.float64, copy=True), tape=self, name=name)
        self.parameters[name] = tensor
        return tensor

    def bind(self, arrays: Dict[str, np.ndarray]) -> Dict[str, Tensor]:
        return {name: self.variable(name, arrays[name]) for name in sorted(arrays)}

    def record(self, tensor: Tensor):
        self.nodes.append(tensor)

    def backward(self, output: Tensor):
        """Populate .grad on every parameter reachable from a scalar output"""
        if self._consumed:
            raise RuntimeError("tape already consumed by a backward pass")
        if output.data.size != 1:
            raise ShapeError(f"backward needs a scalar output, got shape {output.shape}")
        self._consumed = True

        if output.tape is not self:
            return

        output.grad = np.ones_like(output.data)
        # creation order is a topological order
        for node in reversed(self.nodes):
            if node.grad is not None and node._backward is not None:
                node._backward(node.grad)

    def gradients(self) -> Dict[str, np.ndarray]:
        """Parameter gradients, zeros where nothing flowed"""
        return {
            name: tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
            for name, tensor in self.parameters.items()
        }


def constant(data, name: Optional[str] = None) -> Tensor:
    return Tensor(data, tape=None, name=name)


def constants(arrays: Dict[str, np.ndarray]) -> Dict[str, Tensor]:
    return {name: constant(arrays[name], name) for name in sorted(arrays)}


def _emit(data: np.ndarray, parents: Sequence[Tensor], backward: BackwardFn, op: str) -> Tensor:
    tape = next((p.tape for p in parents if p.tape is not None), None)
    if tape is not None and tape.check_finite and not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{op} produced non-finite values")

    out = Tensor(data, tape=tape)
    if tape is not None:
        out._parents = tuple(parents)
        out._backward = backward
        tape.record(out)
    return out


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to an operand's shape"""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _check_broadcast(a: Tensor, b: Tensor, op: str):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} do not broadcast") from None


# ---------------------------------------------------------------- arithmetic

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: incompatible shapes {a.shape} and {b.shape}")

    def backward(g):
        a.accumulate(g @ b.data.T)
        b.accumulate(a.data.T @ g)

    return _emit(a.data @ b.data, (a, b), backward, 'matmul')


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise ShapeError(f"transpose: expected a matrix, got shape {a.shape}")

    def backward(g):
        a.accumulate(g.T)

    return _emit(a.data.T.copy(), (a,), backward, 'transpose')


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, 'add')

    def backward(g):
        a.accumulate(_unbroadcast(g, a.shape))
        b.accumulate(_unbroadcast(g, b.shape))

    return _emit(a.data + b.data, (a, b), backward, 'add')


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise product with broadcasting"""
    _check_broadcast(a, b, 'mul')

    def backward(g):
        a.accumulate(_unbroadcast(g * b.data, a.shape))
        b.accumulate(_unbroadcast(g * a.data, b.shape))

    return _emit(a.data * b.data, (a, b), backward, 'mul')


def scale(a: Tensor, factor: float) -> Tensor:
    def backward(g):
        a.accumulate(g * factor)

    return _emit(a.data * factor, (a,), backward, 'scale')


def sum_all(a: Tensor) -> Tensor:
    def backward(g):
        a.accumulate(np.broadcast_to(g, a.shape))

    return _emit(np.array(a.data.sum()), (a,), backward, 'sum_all')


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ShapeError("concat: no tensors")
    try:
        data = np.concatenate([t.data for t in tensors], axis=axis)
    except ValueError as e:
        raise ShapeError(f"concat: {e}") from None

    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        for t, piece in zip(tensors, np.split(g, bounds, axis=axis)):
            t.accumulate(piece)

    return _emit(data, tuple(tensors), backward, 'concat')


# ------------------------------------------------------------- nonlinearities

def relu(a: Tensor) -> Tensor:
    mask = a.data > 0

    def backward(g):
        a.accumulate(g * mask)

    return _emit(a.data * mask, (a,), backward, 'relu')


def leaky_relu(a: Tensor, slope: float = 0.2) -> Tensor:
    factor = np.where(a.data > 0, 1.0, slope)

    def backward(g):
        a.accumulate(g * factor)

    return _emit(a.data * factor, (a,), backward, 'leaky_relu')


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)

    def backward(g):
        a.accumulate(g * out)

    return _emit(out, (a,), backward, 'exp')


def log(a: Tensor) -> Tensor:
    def backward(g):
        a.accumulate(g / a.data)

    with np.errstate(divide='ignore', invalid='ignore'):
        out = np.log(a.data)
    return _emit(out, (a,), backward, 'log')


def softmax(a: Tensor) -> Tensor:
    """Softmax over the last axis"""
    shifted = a.data - a.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=-1, keepdims=True)

    def backward(g):
        a.accumulate(out * (g - (g * out).sum(axis=-1, keepdims=True)))

    return _emit(out, (a,), backward, 'softmax')


# ------------------------------------------------------------- segment ops

def _check_segments(values: Tensor, segment_ids: np.ndarray, num_segments: Optional[int], op: str) -> int:
    segment_ids = np.asarray(segment_ids)
    if segment_ids.ndim != 1 or segment_ids.shape[0] != values.shape[0]:
        raise ShapeError(
            f"{op}: need one segment id per row, got {segment_ids.shape} for values {values.shape}"
        )
    if segment_ids.size and np.any(np.diff(segment_ids) < 0):
        raise ValueError(f"{op}: segment ids must be sorted")
    if num_segments is None:
        num_segments = int(segment_ids[-1]) + 1 if segment_ids.size else 0
    if segment_ids.size and (segment_ids[0] < 0 or segment_ids[-1] >= num_segments):
        raise ShapeError(f"{op}: segment ids outside [0, {num_segments})")
    return num_segments


def segment_softmax(values: Tensor, segment_ids: np.ndarray, num_segments: Optional[int] = None) -> Tensor:
    """Softmax within each segment along axis 0; extra axes are independent"""
    num_segments = _check_segments(values, segment_ids, num_segments, 'segment_softmax')
    ids = np.asarray(segment_ids)

    maxima = np.full((num_segments,) + values.shape[1:], -np.inf)
    np.maximum.at(maxima, ids, values.data)
    e = np.exp(values.data - maxima[ids])
    totals = np.zeros((num_segments,) + values.shape[1:])
    np.add.at(totals, ids, e)
    out = e / totals[ids]

    def backward(g):
        weighted = np.zeros((num_segments,) + values.shape[1:])
        np.add.at(weighted, ids, g * out)
        values.accumulate(out * (g - weighted[ids]))

    return _emit(out, (values,), backward, 'segment_softmax')


def segment_sum(values: Tensor, segment_ids: np.ndarray, num_segments: Optional[int] = None) -> Tensor:
    num_segments = _check_segments(values, segment_ids, num_segments, 'segment_sum')
    ids = np.asarray(segment_ids)

    out = np.zeros((num_segments,) + values.shape[1:])
    np.add.at(out, ids, values.data)

    def backward(g):
        values.accumulate(g[ids])

    return _emit(out, (values,), backward, 'segment_sum')


def segment_mean(values: Tensor, segment_ids: np.ndarray, num_segments: Optional[int] = None) -> Tensor:
    num_segments = _check_segments(values, segment_ids, num_segments, 'segment_mean')
    ids = np.asarray(segment_ids)

    counts = np.bincount(ids, minlength=num_segments).astype(np.float64)
    safe = np.maximum(counts, 1.0).reshape((num_segments,) + (1,) * (values.data.ndim - 1))
    out = np.zeros((num_segments,) + values.shape[1:])
    np.add.at(out, ids, values.data)
    out = out / safe

    def backward(g):
        values.accumulate((g / safe)[ids])

    return _emit(out, (values,), backward, 'segment_mean')


def gather_rows(a: Tensor, indices: np.ndarray) -> Tensor:
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= a.shape[0]):
        raise ShapeError(f"gather_rows: index outside [0, {a.shape[0]})")

    def backward(g):
        full = np.zeros_like(a.data)
        np.add.at(full, indices, g)
        a.accumulate(full)

    return _emit(a.data[indices], (a,), backward, 'gather_rows')


# ---------------------------------------------------------- regularization/loss

def dropout(a: Tensor, rate: float, rng: Optional[np.random.Generator], train: bool) -> Tensor:
    """Inverted dropout; identity when rate is 0 or not training"""
    if not train or rate <= 0.0:
        return a
    if rng is None:
        raise ValueError("dropout in training mode needs a random generator")

    keep = 1.0 - rate
    mask = (rng.random(a.shape) < keep) / keep

    def backward(g):
        a.accumulate(g * mask)

    return _emit(a.data * mask, (a,), backward, 'dropout')


def cross_entropy(probs: Tensor, target: int) -> Tensor:
    """-log probs[target] for a probability vector or a single-row matrix"""
    flat = probs.data.reshape(-1)
    if not 0 <= target < flat.size:
        raise ShapeError(f"cross_entropy: class {target} outside [0, {flat.size})")

    p = flat[target]

    def backward(g):
        grad = np.zeros_like(flat)
        grad[target] = -float(g) / p
        probs.accumulate(grad.reshape(probs.shape))

    with np.errstate(divide='ignore'):
        value = -np.log(p)
    return _emit(np.array(value), (probs,), backward, 'cross_entropy')
