"""Parameterized layers built on the primitives."""

from __future__ import annotations

import numpy as np

from . import ops
from .tensor import Tape, Tensor


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class DenseLayer:
    """Affine map h W + b with a Glorot-uniform weight and zero bias."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator, name: str = "dense"):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.name = name
        self.weight = Tensor.parameter(glorot_uniform(rng, in_dim, out_dim), name=f"{name}.weight")
        self.bias = Tensor.parameter(np.zeros((1, out_dim)), name=f"{name}.bias")

    def parameters(self) -> list[Tensor]:
        return [self.weight, self.bias]

    def reset(self, rng: np.random.Generator) -> None:
        self.weight.values = glorot_uniform(rng, self.in_dim, self.out_dim)
        self.bias.values = np.zeros((1, self.out_dim))
        self.weight.zero_grad()
        self.bias.zero_grad()

    def __call__(self, tape: Tape, h: Tensor) -> Tensor:
        return ops.add(tape, ops.matmul(tape, h, self.weight), self.bias)


class GraphConvLayer(DenseLayer):
    """One message-passing step: propagation operator times the affine map, Â (h W) + b."""

    def propagate(self, tape: Tape, a_hat: Tensor, h: Tensor) -> Tensor:
        return ops.add(tape, ops.matmul(tape, a_hat, ops.matmul(tape, h, self.weight)), self.bias)


__all__ = ["DenseLayer", "GraphConvLayer", "glorot_uniform"]
