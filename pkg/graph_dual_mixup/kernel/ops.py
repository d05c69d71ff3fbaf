"""Differentiable primitives.

Every primitive computes its forward value with numpy and records a backward
rule on the tape. Reductions that work "over node sets" reduce the row axis,
turning an n x c node matrix into a 1 x c row.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike

from ..errors import ContractViolation
from .tensor import Array, Tape, Tensor

LOG_FLOOR = 1e-12
TARGET_SUM_TOLERANCE = 1e-6


def _check_same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise ContractViolation(f"{op}: shapes {a.shape} and {b.shape} differ")


def matmul(tape: Tape, a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ContractViolation(f"matmul: cannot multiply {a.shape} by {b.shape}")
    av, bv = a.values, b.values
    return tape.record("matmul", av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def add(tape: Tape, a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; a 1 x c `b` is broadcast over the rows of `a` (bias add)."""
    if a.shape == b.shape:
        return tape.record("add", a.values + b.values, (a, b), lambda g: (g, g))
    if b.shape == (1, a.shape[1]):
        return tape.record("add", a.values + b.values, (a, b), lambda g: (g, g.sum(axis=0, keepdims=True)))
    raise ContractViolation(f"add: cannot broadcast {b.shape} onto {a.shape}")


def mul(tape: Tape, a: Tensor, b: Tensor) -> Tensor:
    _check_same_shape(a, b, "mul")
    av, bv = a.values, b.values
    return tape.record("mul", av * bv, (a, b), lambda g: (g * bv, g * av))


def scale(tape: Tape, a: Tensor, factor: float) -> Tensor:
    factor = float(factor)
    return tape.record("scale", a.values * factor, (a,), lambda g: (g * factor,))


def add_scalar(tape: Tape, a: Tensor, shift: float) -> Tensor:
    return tape.record("add_scalar", a.values + float(shift), (a,), lambda g: (g,))


def relu(tape: Tape, a: Tensor) -> Tensor:
    # subgradient 0 at exactly 0
    mask = a.values > 0
    return tape.record("relu", np.where(mask, a.values, 0.0), (a,), lambda g: (g * mask,))


def stable_sigmoid(values: Array) -> Array:
    return 0.5 * (1.0 + np.tanh(0.5 * values))


def sigmoid(tape: Tape, a: Tensor) -> Tensor:
    s = stable_sigmoid(a.values)
    return tape.record("sigmoid", s, (a,), lambda g: (g * s * (1.0 - s),))


def transpose(tape: Tape, a: Tensor) -> Tensor:
    return tape.record("transpose", a.values.T, (a,), lambda g: (g.T,))


def sum_rows(tape: Tape, a: Tensor) -> Tensor:
    shape = a.shape
    return tape.record("sum_rows", a.values.sum(axis=0, keepdims=True), (a,), lambda g: (np.broadcast_to(g, shape).copy(),))


def mean_rows(tape: Tape, a: Tensor) -> Tensor:
    shape = a.shape
    rows = shape[0]
    return tape.record(
        "mean_rows", a.values.mean(axis=0, keepdims=True), (a,), lambda g: (np.broadcast_to(g / rows, shape).copy(),)
    )


def max_rows(tape: Tape, a: Tensor) -> Tensor:
    """Column-wise max over rows; the gradient goes to the first maximal row."""
    winners = np.argmax(a.values, axis=0)
    columns = np.arange(a.shape[1])
    shape = a.shape

    def backward(g: Array):
        grad = np.zeros(shape)
        grad[winners, columns] = g[0]
        return (grad,)

    return tape.record("max_rows", a.values[winners, columns][None, :], (a,), backward)


def sum_all(tape: Tape, a: Tensor) -> Tensor:
    shape = a.shape
    return tape.record("sum_all", np.array([[a.values.sum()]]), (a,), lambda g: (np.full(shape, g[0, 0]),))


def concat_rows(tape: Tape, tensors: Sequence[Tensor]) -> Tensor:
    if not tensors:
        raise ContractViolation("concat_rows needs at least one tensor")
    width = tensors[0].shape[1]
    if any(t.shape[1] != width for t in tensors):
        raise ContractViolation("concat_rows: all tensors must have the same column count")
    bounds = np.cumsum([0] + [t.shape[0] for t in tensors])

    def backward(g: Array):
        return tuple(g[start:stop] for start, stop in zip(bounds[:-1], bounds[1:], strict=True))

    return tape.record("concat_rows", np.vstack([t.values for t in tensors]), tuple(tensors), backward)


def log_softmax(tape: Tape, a: Tensor) -> Tensor:
    """Row-wise log-softmax with max subtraction."""
    shifted = a.values - a.values.max(axis=1, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    softmax = np.exp(out)
    return tape.record("log_softmax", out, (a,), lambda g: (g - softmax * g.sum(axis=1, keepdims=True),))


def take(tape: Tape, a: Tensor, rows: ArrayLike, cols: ArrayLike) -> Tensor:
    """Gather entries a[rows[k], cols[k]] into a k x 1 column."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    shape = a.shape

    def backward(g: Array):
        grad = np.zeros(shape)
        np.add.at(grad, (rows, cols), g[:, 0])
        return (grad,)

    return tape.record("take", a.values[rows, cols].reshape(-1, 1), (a,), backward)


def log(tape: Tape, a: Tensor, floor: float = LOG_FLOOR) -> Tensor:
    """Natural log with inputs clamped at `floor`; clamped entries get zero gradient."""
    clamped = np.maximum(a.values, floor)
    live = a.values >= floor
    return tape.record("log", np.log(clamped), (a,), lambda g: (np.where(live, g / clamped, 0.0),))


def soft_cross_entropy(tape: Tape, log_probs: Tensor, targets: ArrayLike) -> Tensor:
    """Mean over rows of -sum_c targets[b, c] * log_probs[b, c].

    Raises:
        ContractViolation: If a target row does not sum to 1 within 1e-6
    """
    target = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    if target.shape != log_probs.shape:
        raise ContractViolation(f"soft_cross_entropy: targets {target.shape} vs log_probs {log_probs.shape}")
    row_sums = target.sum(axis=1)
    if np.any(np.abs(row_sums - 1.0) > TARGET_SUM_TOLERANCE):
        raise ContractViolation(f"soft_cross_entropy: target rows must sum to 1, got {row_sums.tolist()}")
    batch = target.shape[0]
    loss = -(target * log_probs.values).sum() / batch
    return tape.record("soft_cross_entropy", np.array([[loss]]), (log_probs,), lambda g: (-target * g[0, 0] / batch,))


def normalize_adjacency(a: ArrayLike) -> Array:
    """Symmetric GCN propagation operator D^-1/2 (A + I) D^-1/2.

    Isolated nodes end up with a single self-loop of weight 1.
    """
    adjacency = np.asarray(a, dtype=np.float64)
    if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
        raise ContractViolation(f"adjacency must be square, got shape {adjacency.shape}")
    if np.any(adjacency < 0):
        raise ContractViolation("adjacency entries must be non-negative")
    with_loops = adjacency + np.eye(adjacency.shape[0])
    inv_sqrt = 1.0 / np.sqrt(with_loops.sum(axis=1))
    return with_loops * np.outer(inv_sqrt, inv_sqrt)


__all__ = [
    "LOG_FLOOR",
    "matmul",
    "add",
    "mul",
    "scale",
    "add_scalar",
    "relu",
    "sigmoid",
    "stable_sigmoid",
    "transpose",
    "sum_rows",
    "mean_rows",
    "max_rows",
    "sum_all",
    "concat_rows",
    "log_softmax",
    "take",
    "log",
    "soft_cross_entropy",
    "normalize_adjacency",
]
