"""
Dual mixup of a graph pair.

Node features and labels are interpolated directly; structure is interpolated
in the auto-encoder's embedding space and decoded back into an adjacency
matrix, which is then pruned and (optionally) binarized.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field

from .errors import ContractViolation
from .graphs import Graph, induced_subgraph, pad_to, permute_nodes
from .gsae import GsaeModel, decode, encode

logger = logging.getLogger(__name__)

SeedLike = int | np.random.Generator | None


class MixupConfig(BaseModel):
    """Settings of one mixup generator.

    Attributes:
        alpha: First Beta shape parameter of the mixing coefficient
        beta: Second Beta shape parameter
        epsilon: Decoded weights below this are pruned (weights equal to it are kept)
        binarize: Replace surviving weights by 1
        keep_isolated: Keep nodes left without edges (padding nodes included)
        permute: Randomly align the two node sets before mixing
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    alpha: float = Field(default=1.0, gt=0)
    beta: float = Field(default=1.0, gt=0)
    epsilon: float = Field(default=0.1, ge=0, lt=1)
    binarize: bool = True
    keep_isolated: bool = True
    permute: bool = True


def sample_lambda(cfg: MixupConfig, seed: SeedLike = None) -> float:
    """One draw of the mixing coefficient from Beta(alpha, beta)."""
    return float(np.random.default_rng(seed).beta(cfg.alpha, cfg.beta))


def sparsify_adjacency(a: ArrayLike, epsilon: float, binarize: bool) -> NDArray[np.float64]:
    """Zero the diagonal, drop entries below epsilon and optionally binarize.

    Returns:
        A new matrix; entries are in {0} ∪ [epsilon, 1], or {0, 1} when binarized
    """
    adjacency = np.array(a, dtype=np.float64)
    np.fill_diagonal(adjacency, 0.0)
    adjacency[adjacency < epsilon] = 0.0
    if binarize:
        adjacency = (adjacency > 0).astype(np.float64)
    return adjacency


def align_pair(gi: Graph, gj: Graph, seed: SeedLike = None, permute: bool = True) -> tuple[Graph, Graph]:
    """Randomly permute both graphs (when `permute`), then zero-pad the smaller one.

    Padding nodes are always trailing. The first permutation drawn from `seed`
    applies to gi, the second to gj.
    """
    if permute:
        rng = np.random.default_rng(seed)
        gi = permute_nodes(gi, rng.permutation(gi.n))
        gj = permute_nodes(gj, rng.permutation(gj.n))
    size = max(gi.n, gj.n)
    return pad_to(gi, size), pad_to(gj, size)


def mixed_structural_embedding(gsae: GsaeModel, gi: Graph, gj: Graph, lam: float) -> NDArray[np.float64]:
    """λ·encode(gi) + (1 - λ)·encode(gj) for two aligned graphs of equal size."""
    if gi.n != gj.n:
        raise ContractViolation(f"structural mixup needs aligned graphs, got {gi.n} and {gj.n} nodes")
    return lam * encode(gsae, gi) + (1.0 - lam) * encode(gsae, gj)


def dual_mixup(gsae: GsaeModel, gi: Graph, gj: Graph, lam: float, cfg: MixupConfig, seed: SeedLike = None) -> Graph:
    """Generate one graph from a pair.

    Steps: align (permute, then pad), mix features and labels, mix structural
    embeddings, decode, zero the diagonal, prune below epsilon, binarize, and
    finally drop isolated nodes unless `cfg.keep_isolated`.

    Args:
        gsae: Trained structural auto-encoder (read only)
        gi: First source graph
        gj: Second source graph
        lam: Mixing coefficient in [0, 1]; weight of gi
        cfg: Mixup settings
        seed: Seed of the node permutations

    Returns:
        The generated graph with soft label λ·y_i + (1 - λ)·y_j

    Raises:
        ContractViolation: On feature width or class count mismatch, or λ outside [0, 1]
    """
    if gi.feature_dim != gj.feature_dim:
        raise ContractViolation(f"feature widths differ: {gi.feature_dim} vs {gj.feature_dim}")
    if gi.class_count != gj.class_count:
        raise ContractViolation(f"class counts differ: {gi.class_count} vs {gj.class_count}")
    if not 0.0 <= lam <= 1.0:
        raise ContractViolation(f"mixing coefficient must be in [0, 1], got {lam}")

    gi, gj = align_pair(gi, gj, seed, cfg.permute)
    features = lam * gi.node_features + (1.0 - lam) * gj.node_features
    label = lam * gi.label + (1.0 - lam) * gj.label
    decoded = decode(mixed_structural_embedding(gsae, gi, gj, lam))
    adjacency = sparsify_adjacency(decoded, cfg.epsilon, cfg.binarize)
    mixed = Graph(features, adjacency, label)

    if not cfg.keep_isolated:
        connected = np.flatnonzero(adjacency.any(axis=1))
        if connected.size == 0:
            logger.debug("Every generated node is isolated; keeping the full graph")
        elif connected.size < mixed.n:
            mixed = induced_subgraph(mixed, connected)
    return mixed


__all__ = [
    "MixupConfig",
    "sample_lambda",
    "sparsify_adjacency",
    "align_pair",
    "mixed_structural_embedding",
    "dual_mixup",
]
