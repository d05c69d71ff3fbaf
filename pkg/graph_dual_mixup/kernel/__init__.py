"""Dense reverse-mode differentiation kernel.

Float64 matrices, a tape of recorded operations, the primitives the
classifier and the structural auto-encoder need, and Adam.
"""

from . import ops
from .gradcheck import GradCheckResult, check_gradients, run_gradcheck_suite
from .layers import DenseLayer, GraphConvLayer, glorot_uniform
from .ops import normalize_adjacency, soft_cross_entropy
from .optim import AdamState, adam_step, zero_grads
from .tensor import Tape, Tensor, backward

__all__ = ["ops", "Tensor", "Tape", "backward", "normalize_adjacency", "soft_cross_entropy", "DenseLayer", "GraphConvLayer", "glorot_uniform", "AdamState", "adam_step", "zero_grads", "GradCheckResult", "check_gradients", "run_gradcheck_suite"]
