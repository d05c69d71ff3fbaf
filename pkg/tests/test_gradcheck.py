"""Tests for the finite-difference gradient suite."""

import numpy as np

from graph_dual_mixup.kernel import ops
from graph_dual_mixup.kernel.gradcheck import (
    GradCheckResult,
    check_gradients,
    numerical_gradient,
    relative_error,
    run_gradcheck_suite,
)
from graph_dual_mixup.kernel.tensor import Tensor

EXPECTED_CHECKS = {
    "matmul",
    "add",
    "add_broadcast",
    "mul",
    "scale",
    "add_scalar",
    "relu",
    "sigmoid",
    "transpose",
    "sum_rows",
    "mean_rows",
    "max_rows",
    "concat_rows",
    "log_softmax",
    "take",
    "log",
    "soft_cross_entropy",
    "reconstruction_loss",
    "classifier_soft_cross_entropy",
}


def test_suite_passes_on_random_instances():
    """Test every primitive and both composite losses stay within 1e-4."""
    results = run_gradcheck_suite(seed=0, instances=3)

    assert {result.name for result in results} == EXPECTED_CHECKS
    assert len(results) == 3 * len(EXPECTED_CHECKS)
    failed = [(r.name, r.instance, r.max_rel_error) for r in results if not r.passed]
    assert failed == []


def test_suite_is_deterministic():
    """Test the same seed reproduces the same errors."""
    first = run_gradcheck_suite(seed=4, instances=1)
    second = run_gradcheck_suite(seed=4, instances=1)
    assert [r.max_rel_error for r in first] == [r.max_rel_error for r in second]


def test_numerical_gradient_of_quadratic():
    """Test central differences recover 2w for sum(w * w)."""
    w = Tensor.parameter(np.array([[1.0, -2.0, 0.5]]))
    grad = numerical_gradient(lambda t: ops.sum_all(t, ops.mul(t, w, w)), w)
    assert np.allclose(grad, [[2.0, -4.0, 1.0]], atol=1e-8)
    assert w.values.tolist() == [[1.0, -2.0, 0.5]]


def test_check_gradients_detects_a_wrong_rule():
    """Test a deliberately broken backward rule fails the check."""
    w = Tensor.parameter(np.array([[0.3, 1.1]]))

    def doubled_backward(tape):
        out = tape.record("bad_square", w.values**2, (w,), lambda g: (g * 4.0 * w.values,))
        return ops.sum_all(tape, out)

    assert check_gradients(doubled_backward, [w]) > 0.1


def test_relative_error_and_result():
    """Test the error measure and the pass flag."""
    assert relative_error(np.ones(3), np.ones(3)) == 0.0
    assert relative_error(np.zeros(3), np.zeros(3)) == 0.0
    assert GradCheckResult("op", 0, 5e-5).passed
    assert not GradCheckResult("op", 0, 2e-4).passed
