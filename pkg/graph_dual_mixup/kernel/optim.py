"""Adam optimizer."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from ..errors import KernelUsageError
from .tensor import Array, Tensor, check_finite


@dataclass
class AdamState:
    """Moment accumulators and hyper-parameters for one parameter set.

    Moments are keyed by parameter position, so the same parameter list (in the
    same order) must be passed to every `adam_step`.
    """

    learning_rate: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moments: list[Array] = field(default_factory=list)
    second_moments: list[Array] = field(default_factory=list)

    @classmethod
    def for_parameters(cls, params: Sequence[Tensor], learning_rate: float = 1e-2, **kwargs) -> AdamState:
        return cls(
            learning_rate=learning_rate,
            first_moments=[np.zeros_like(p.values) for p in params],
            second_moments=[np.zeros_like(p.values) for p in params],
            **kwargs,
        )


def adam_step(state: AdamState, params: Sequence[Tensor]) -> None:
    """Apply one bias-corrected Adam update in place, then clear the gradients.

    Raises:
        KernelUsageError: If any parameter has no gradient or shapes drifted
    """
    if len(params) != len(state.first_moments):
        raise KernelUsageError(f"optimizer tracks {len(state.first_moments)} parameters, got {len(params)}")
    missing = [p.name or str(i) for i, p in enumerate(params) if p.grad is None]
    if missing:
        raise KernelUsageError(f"no gradient for parameters: {', '.join(missing)}")

    state.step += 1
    correction1 = 1.0 - state.beta1**state.step
    correction2 = 1.0 - state.beta2**state.step
    for index, param in enumerate(params):
        grad = param.grad
        m = state.first_moments[index]
        if m.shape != param.values.shape:
            raise KernelUsageError(f"moment shape {m.shape} does not match parameter {param.name} {param.shape}")
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * state.second_moments[index] + (1.0 - state.beta2) * grad * grad
        state.first_moments[index] = m
        state.second_moments[index] = v
        update = state.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
        new_values = param.values - update
        check_finite(new_values, f"parameter {param.name} after Adam step {state.step}")
        param.values = new_values
        param.zero_grad()


def zero_grads(params: Sequence[Tensor]) -> None:
    for param in params:
        param.zero_grad()


__all__ = ["AdamState", "adam_step", "zero_grads"]
