"""Tensors and the compute tape that records operations for reverse-mode gradients."""

from __future__ import annotations

import logging
import weakref
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..errors import KernelUsageError, NumericError

logger = logging.getLogger(__name__)

Array = NDArray[np.float64]
BackwardRule = Callable[[Array], Sequence[Array | None]]


def check_finite(values: Array, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericError(f"Non-finite values in {what}")


class Tensor:
    """A dense 2-D float64 matrix with an optional gradient slot.

    Scalars are stored as 1 x 1 and vectors as 1 x c rows. Every tensor is checked
    for NaN/Inf on construction.
    """

    __slots__ = ("values", "grad", "requires_grad", "name", "__weakref__")

    def __init__(self, values: ArrayLike, requires_grad: bool = False, name: str | None = None):
        array = np.array(values, dtype=np.float64)
        if array.ndim == 0:
            array = array.reshape(1, 1)
        elif array.ndim == 1:
            array = array.reshape(1, -1)
        elif array.ndim != 2:
            raise ValueError(f"Tensor values must be at most 2-D, got shape {array.shape}")
        check_finite(array, f"tensor {name or '<unnamed>'}")
        self.values: Array = array
        self.grad: Array | None = None
        self.requires_grad = requires_grad
        self.name = name

    @classmethod
    def parameter(cls, values: ArrayLike, name: str | None = None) -> Tensor:
        return cls(values, requires_grad=True, name=name)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    def item(self) -> float:
        if self.values.size != 1:
            raise ValueError(f"item() needs a 1 x 1 tensor, got shape {self.shape}")
        return float(self.values[0, 0])

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, grad: Array) -> None:
        if grad.shape != self.values.shape:
            raise KernelUsageError(f"gradient shape {grad.shape} does not match tensor shape {self.shape}")
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"Tensor{label}(shape={self.shape}, requires_grad={self.requires_grad})"


@dataclass
class _Record:
    output: Tensor
    inputs: tuple[Tensor, ...]
    backward: BackwardRule
    op: str


class Tape:
    """Ordered record of differentiable operations.

    Operations append themselves through `record`. `backward` walks the records in
    exact reverse order and may run only once per tape.
    """

    def __init__(self) -> None:
        self._records: list[_Record] = []
        self._produced: weakref.WeakSet[Tensor] = weakref.WeakSet()
        self._finished = False

    def __len__(self) -> int:
        return len(self._records)

    def record(self, op: str, values: Array, inputs: tuple[Tensor, ...], backward: BackwardRule) -> Tensor:
        """Wrap `values` as the output of `op` and remember how to differentiate it."""
        if self._finished:
            raise KernelUsageError("this tape already ran backward; start a new tape")
        requires_grad = any(t.requires_grad for t in inputs)
        output = Tensor(values, requires_grad=requires_grad, name=op)
        self._produced.add(output)
        if requires_grad:
            self._records.append(_Record(output, inputs, backward, op))
        return output

    def backward(self, loss: Tensor) -> None:
        """Populate `.grad` of every requires_grad tensor that loss depends on.

        Raises:
            KernelUsageError: If loss is not a 1 x 1 tensor produced on this tape,
                or backward already ran
        """
        if self._finished:
            raise KernelUsageError("backward already ran on this tape")
        if loss not in self._produced:
            raise KernelUsageError("loss was not produced on this tape")
        if loss.shape != (1, 1):
            raise KernelUsageError(f"loss must be 1 x 1, got shape {loss.shape}")
        self._finished = True
        if not loss.requires_grad:
            logger.debug("Loss does not depend on any parameter; nothing to differentiate")
            return

        pending: dict[int, Array] = {id(loss): np.ones((1, 1))}
        leaves: dict[int, Tensor] = {}
        for record in reversed(self._records):
            grad = pending.pop(id(record.output), None)
            if grad is None:
                continue
            record.output.grad = grad
            input_grads = record.backward(grad)
            for tensor, input_grad in zip(record.inputs, input_grads, strict=True):
                if input_grad is None or not tensor.requires_grad:
                    continue
                check_finite(input_grad, f"gradient flowing out of {record.op}")
                key = id(tensor)
                pending[key] = pending[key] + input_grad if key in pending else input_grad
                if tensor not in self._produced:
                    leaves[key] = tensor

        for key, tensor in leaves.items():
            tensor.accumulate_grad(pending[key])


def backward(tape: Tape, loss: Tensor) -> None:
    """Run reverse-mode differentiation of `loss` over `tape`."""
    tape.backward(loss)


__all__ = ["Tensor", "Tape", "Array", "backward", "check_finite"]
