"""Finite-difference verification of the kernel's analytic gradients."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from . import ops
from .tensor import Tape, Tensor

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-5
DEFAULT_TOLERANCE = 1e-4
# Below this combined gradient norm the error is effectively measured absolutely
NORM_FLOOR = 1e-3

LossBuilder = Callable[[Tape], Tensor]


@dataclass
class GradCheckResult:
    """Outcome of one finite-difference comparison."""

    name: str
    instance: int
    max_rel_error: float
    tolerance: float = DEFAULT_TOLERANCE

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    denominator = max(np.linalg.norm(analytic) + np.linalg.norm(numeric), NORM_FLOOR)
    return float(np.linalg.norm(analytic - numeric) / denominator)


def numerical_gradient(build_loss: LossBuilder, param: Tensor, step: float = DEFAULT_STEP) -> np.ndarray:
    """Central differences of the loss with respect to every entry of `param`."""
    grad = np.zeros_like(param.values)
    original = param.values.copy()
    for index in np.ndindex(*original.shape):
        values = original.copy()
        values[index] += step
        param.values = values
        plus = build_loss(Tape()).item()
        values = original.copy()
        values[index] -= step
        param.values = values
        minus = build_loss(Tape()).item()
        grad[index] = (plus - minus) / (2.0 * step)
    param.values = original
    return grad


def check_gradients(build_loss: LossBuilder, params: Sequence[Tensor], step: float = DEFAULT_STEP) -> float:
    """Largest relative error between analytic and numerical gradients over `params`.

    Args:
        build_loss: Callable that records the scalar loss on the tape it is given
        params: Tensors to differentiate with respect to (requires_grad=True)
        step: Central-difference step size

    Returns:
        Maximum relative error across params
    """
    for param in params:
        param.zero_grad()
    tape = Tape()
    loss = build_loss(tape)
    tape.backward(loss)
    analytic = [np.zeros_like(p.values) if p.grad is None else p.grad.copy() for p in params]
    for param in params:
        param.zero_grad()
    errors = [relative_error(a, numerical_gradient(build_loss, p, step)) for a, p in zip(analytic, params, strict=True)]
    return max(errors, default=0.0)


def _projected(tape: Tape, out: Tensor, projection: np.ndarray) -> Tensor:
    """Reduce an op output to a scalar with a fixed random weighting."""
    return ops.sum_all(tape, ops.mul(tape, out, Tensor(projection)))


def _away_from_zero(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    return rng.uniform(0.2, 1.5, size=shape) * rng.choice([-1.0, 1.0], size=shape)


def _primitive_cases(rng: np.random.Generator) -> dict[str, tuple[LossBuilder, list[Tensor]]]:
    n = int(rng.integers(2, 7))
    d = int(rng.integers(1, 6))
    k = int(rng.integers(1, 6))
    a = Tensor.parameter(rng.normal(size=(n, d)), name="a")
    b = Tensor.parameter(rng.normal(size=(d, k)), name="b")
    c = Tensor.parameter(rng.normal(size=(n, d)), name="c")
    bias = Tensor.parameter(rng.normal(size=(1, d)), name="bias")
    signed = Tensor.parameter(_away_from_zero(rng, (n, d)), name="signed")
    positive = Tensor.parameter(rng.uniform(0.1, 2.0, size=(n, d)), name="positive")
    # distinct column values keep max_rows away from ties
    distinct = Tensor.parameter(rng.permutation(n * d).reshape(n, d) * 0.5 + rng.uniform(0, 0.1, size=(n, d)))
    w_nd = rng.normal(size=(n, d))
    w_nk = rng.normal(size=(n, k))
    w_dn = rng.normal(size=(d, n))
    w_1d = rng.normal(size=(1, d))
    w_2nd = rng.normal(size=(2 * n, d))
    rows = rng.integers(0, n, size=4)
    cols = rng.integers(0, d, size=4)
    w_take = rng.normal(size=(4, 1))
    targets = rng.dirichlet(np.ones(d), size=n)
    factor = float(rng.normal())

    return {
        "matmul": (lambda t: _projected(t, ops.matmul(t, a, b), w_nk), [a, b]),
        "add": (lambda t: _projected(t, ops.add(t, a, c), w_nd), [a, c]),
        "add_broadcast": (lambda t: _projected(t, ops.add(t, a, bias), w_nd), [a, bias]),
        "mul": (lambda t: _projected(t, ops.mul(t, a, c), w_nd), [a, c]),
        "scale": (lambda t: _projected(t, ops.scale(t, a, factor), w_nd), [a]),
        "add_scalar": (lambda t: _projected(t, ops.add_scalar(t, a, factor), w_nd), [a]),
        "relu": (lambda t: _projected(t, ops.relu(t, signed), w_nd), [signed]),
        "sigmoid": (lambda t: _projected(t, ops.sigmoid(t, a), w_nd), [a]),
        "transpose": (lambda t: _projected(t, ops.transpose(t, a), w_dn), [a]),
        "sum_rows": (lambda t: _projected(t, ops.sum_rows(t, a), w_1d), [a]),
        "mean_rows": (lambda t: _projected(t, ops.mean_rows(t, a), w_1d), [a]),
        "max_rows": (lambda t: _projected(t, ops.max_rows(t, distinct), w_1d), [distinct]),
        "concat_rows": (lambda t: _projected(t, ops.concat_rows(t, [a, c]), w_2nd), [a, c]),
        "log_softmax": (lambda t: _projected(t, ops.log_softmax(t, a), w_nd), [a]),
        "take": (lambda t: _projected(t, ops.take(t, a, rows, cols), w_take), [a]),
        "log": (lambda t: _projected(t, ops.log(t, positive), w_nd), [positive]),
        "soft_cross_entropy": (lambda t: ops.soft_cross_entropy(t, ops.log_softmax(t, a), targets), [a]),
    }


def _composite_cases(rng: np.random.Generator) -> dict[str, tuple[LossBuilder, list[Tensor]]]:
    from ..classifier import ClassifierModel, classification_loss
    from ..graphs import Graph
    from ..gsae import GsaeModel, reconstruction_loss, sample_negative_edges

    n = int(rng.integers(3, 7))
    d = int(rng.integers(1, 6))
    upper = np.triu(rng.random((n, n)) < 0.5, k=1).astype(float)
    upper[0, 1] = 1.0
    adjacency = upper + upper.T
    label = rng.dirichlet(np.ones(2))
    graph = Graph(rng.normal(size=(n, d)), adjacency, label)

    seed = int(rng.integers(2**31))
    gsae = GsaeModel(embedding_dim=4, hidden_dim=4, seed=seed)
    negatives = sample_negative_edges(graph, rng)
    classifier = ClassifierModel(in_dim=d, num_classes=2, hidden_dim=4, num_layers=2, seed=seed)

    return {
        "reconstruction_loss": (lambda t: reconstruction_loss(gsae, graph, negatives, tape=t), gsae.parameters()),
        "classifier_soft_cross_entropy": (
            lambda t: classification_loss(classifier, [graph], tape=t),
            classifier.parameters(),
        ),
    }


def run_gradcheck_suite(
    seed: int = 0, instances: int = 10, tolerance: float = DEFAULT_TOLERANCE
) -> list[GradCheckResult]:
    """Check every primitive and both composite losses on random small instances.

    Args:
        seed: Master seed for the random instances
        instances: Random instances per check
        tolerance: Maximum accepted relative error

    Returns:
        One GradCheckResult per (check, instance)
    """
    rng = np.random.default_rng(seed)
    results: list[GradCheckResult] = []
    for instance in range(instances):
        cases = {**_primitive_cases(rng), **_composite_cases(rng)}
        for name, (build_loss, params) in cases.items():
            error = check_gradients(build_loss, params)
            results.append(GradCheckResult(name, instance, error, tolerance))
            if error > tolerance:
                logger.warning(f"Gradient check {name} (instance {instance}) failed: rel. error {error:.2e}")
            else:
                logger.debug(f"Gradient check {name} (instance {instance}): rel. error {error:.2e}")
    return results


__all__ = [
    "GradCheckResult",
    "check_gradients",
    "numerical_gradient",
    "relative_error",
    "run_gradcheck_suite",
]
