"""
Graph structural auto-encoder.

The encoder sees structure only: each node's raw degree is its single input
feature, propagated through two GCN layers (ReLU after the first, linear
second layer). The decoder is the parameter-free inner product σ(H Hᵀ).
Training reconstructs every graph's edges against freshly sampled non-edges.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from sklearn.metrics import roc_auc_score

from .classifier import DEFAULT_LOG_EVERY, TrainingLog
from .errors import ContractViolation
from .graphs import Graph, GraphDataset, degrees, edge_pairs
from .kernel import ops
from .kernel.layers import GraphConvLayer
from .kernel.optim import AdamState, adam_step
from .kernel.tensor import Tape, Tensor

logger = logging.getLogger(__name__)

DEFAULT_EMBEDDING_DIM = 32
STRUCTURAL_FEATURE_DIM = 1

# open interval (0, 1) bounds for decoded probabilities
_PROB_LOW = np.finfo(np.float64).tiny
_PROB_HIGH = np.nextafter(1.0, 0.0)


class GsaeModel:
    """Two-layer structural encoder; the decoder has no parameters."""

    def __init__(self, embedding_dim: int = DEFAULT_EMBEDDING_DIM, hidden_dim: int | None = None, seed: int = 0):
        hidden_dim = hidden_dim or embedding_dim
        if embedding_dim < 1 or hidden_dim < 1:
            raise ContractViolation("embedding and hidden widths must be positive")
        self.embedding_dim = embedding_dim
        self.hidden_dim = hidden_dim
        rng = np.random.default_rng(seed)
        self.layers = [
            GraphConvLayer(STRUCTURAL_FEATURE_DIM, hidden_dim, rng, name="enc0"),
            GraphConvLayer(hidden_dim, embedding_dim, rng, name="enc1"),
        ]

    def parameters(self) -> list[Tensor]:
        return [param for layer in self.layers for param in layer.parameters()]

    def reset_parameters(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        for layer in self.layers:
            layer.reset(rng)

    def architecture(self) -> dict[str, int]:
        return {"embedding_dim": self.embedding_dim, "hidden_dim": self.hidden_dim}

    def state_dict(self) -> dict[str, np.ndarray]:
        return {param.name: param.values.copy() for param in self.parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = {param.name: param for param in self.parameters()}
        if set(state) != set(params):
            raise ContractViolation(f"state keys {sorted(state)} do not match parameters {sorted(params)}")
        for name, values in state.items():
            values = np.asarray(values, dtype=np.float64)
            if values.shape != params[name].shape:
                raise ContractViolation(f"{name}: expected shape {params[name].shape}, got {values.shape}")
            params[name].values = values.copy()
            params[name].zero_grad()

    def embed(self, tape: Tape, g: Graph) -> Tensor:
        a_hat = Tensor(g.normalized_adjacency)
        hidden = ops.relu(tape, self.layers[0].propagate(tape, a_hat, Tensor(structural_features(g))))
        return self.layers[1].propagate(tape, a_hat, hidden)


@dataclass(frozen=True)
class NegativeEdgeSample:
    """Distinct node pairs (i != j) that are not edges of the graph, as a k x 2 array."""

    pairs: NDArray[np.int64]

    def __len__(self) -> int:
        return int(self.pairs.shape[0])


def structural_features(g: Graph) -> NDArray[np.float64]:
    """Raw degree of every node as an n x 1 column; node features are never read."""
    return degrees(g).reshape(-1, 1)


def encode(model: GsaeModel, g: Graph) -> NDArray[np.float64]:
    """Structural node embeddings H_s (n x embedding_dim)."""
    return model.embed(Tape(), g).values.copy()


def decode(h: NDArray[np.float64]) -> NDArray[np.float64]:
    """σ(H Hᵀ), exactly symmetric with every entry strictly inside (0, 1)."""
    h = np.asarray(h, dtype=np.float64)
    # einsum's fixed summation order gives gram[i, j] == gram[j, i] bitwise
    gram = np.einsum("ik,jk->ij", h, h)
    return np.clip(ops.stable_sigmoid(gram), _PROB_LOW, _PROB_HIGH)


def _non_edges(g: Graph) -> NDArray[np.int64]:
    off_diagonal = ~np.eye(g.n, dtype=bool)
    missing = (g.adjacency == 0) & off_diagonal
    if g.is_symmetric:
        missing = np.triu(missing, k=1)
    rows, cols = np.nonzero(missing)
    return np.stack([rows, cols], axis=1).astype(np.int64)


def sample_negative_edges(
    g: Graph, seed: int | np.random.Generator | None = None, count: int | None = None
) -> NegativeEdgeSample:
    """Sample non-edges uniformly without replacement.

    Args:
        g: Graph to sample from
        seed: Seed or generator for the draw
        count: Pairs wanted; defaults to the graph's edge count

    Returns:
        min(count, available non-edges) distinct pairs
    """
    rng = np.random.default_rng(seed)
    candidates = _non_edges(g)
    wanted = len(edge_pairs(g)) if count is None else count
    size = min(wanted, len(candidates))
    chosen = np.sort(rng.choice(len(candidates), size=size, replace=False)) if size else np.array([], dtype=np.int64)
    return NegativeEdgeSample(candidates[chosen].reshape(-1, 2))


def has_reconstruction_terms(g: Graph, neg: NegativeEdgeSample) -> bool:
    return len(edge_pairs(g)) > 0 or len(neg) > 0


def reconstruction_loss(model: GsaeModel, g: Graph, neg: NegativeEdgeSample, tape: Tape | None = None) -> Tensor:
    """-(Σ_edges log Â[i,j] + Σ_neg log(1 - Â[i,j])) with logs clamped at 1e-12.

    A graph with neither edges nor negatives has loss 0, returned as a constant
    that is not on the tape.
    """
    tape = tape or Tape()
    positives = edge_pairs(g)
    if not has_reconstruction_terms(g, neg):
        return Tensor(0.0)

    h = model.embed(tape, g)
    scores = ops.sigmoid(tape, ops.matmul(tape, h, ops.transpose(tape, h)))
    terms = []
    if len(positives):
        terms.append(ops.sum_all(tape, ops.log(tape, ops.take(tape, scores, positives[:, 0], positives[:, 1]))))
    if len(neg):
        picked = ops.take(tape, scores, neg.pairs[:, 0], neg.pairs[:, 1])
        complement = ops.add_scalar(tape, ops.scale(tape, picked, -1.0), 1.0)
        terms.append(ops.sum_all(tape, ops.log(tape, complement)))
    total = terms[0] if len(terms) == 1 else ops.add(tape, terms[0], terms[1])
    return ops.scale(tape, total, -1.0)


def train_gsae(
    model: GsaeModel,
    dataset: GraphDataset | Sequence[Graph],
    epochs: int = 200,
    lr: float = 1e-2,
    seed: int | None = 0,
    *,
    resample_negatives: bool = True,
    log_every: int = DEFAULT_LOG_EVERY,
) -> TrainingLog:
    """Train the encoder on the summed reconstruction loss of every graph.

    One Adam step per epoch over the whole graph set. Labels and node features
    are never read.

    Args:
        model: Auto-encoder to train in place
        dataset: Graphs to reconstruct
        epochs: Number of epochs
        lr: Adam learning rate
        seed: Seed of the negative-sampling stream
        resample_negatives: Draw fresh negatives every epoch instead of once
        log_every: Epoch interval of progress log lines

    Returns:
        TrainingLog with the summed loss of each epoch
    """
    if epochs < 0:
        raise ContractViolation(f"epochs must be non-negative, got {epochs}")
    graphs = list(dataset)
    rng = np.random.default_rng(seed)
    params = model.parameters()
    state = AdamState.for_parameters(params, learning_rate=lr)
    log = TrainingLog(stage="gsae")
    negatives = [sample_negative_edges(g, rng) for g in graphs] if not resample_negatives else None

    for epoch in range(1, epochs + 1):
        if resample_negatives:
            negatives = [sample_negative_edges(g, rng) for g in graphs]
        tape = Tape()
        total: Tensor | None = None
        for g, neg in zip(graphs, negatives, strict=True):
            if not has_reconstruction_terms(g, neg):
                continue
            term = reconstruction_loss(model, g, neg, tape)
            total = term if total is None else ops.add(tape, total, term)
        if total is None:
            # nothing to reconstruct anywhere: parameters stay as they are
            log.losses.append(0.0)
            continue
        tape.backward(total)
        adam_step(state, params)
        log.losses.append(total.item())
        if log_every and (epoch % log_every == 0 or epoch == epochs):
            logger.debug(f"[gsae] epoch {epoch}/{epochs} loss {total.item():.4f}")
    return log


def edge_ranking_auc(
    model: GsaeModel,
    graphs: Sequence[Graph],
    seed: int | None = 0,
    average: Literal["macro", "pooled"] = "macro",
) -> float:
    """ROC-AUC of decoded scores for true edges against sampled non-edges.

    "macro" averages the per-graph AUC over graphs that have both edges and
    non-edges; "pooled" ranks all pairs of all graphs together.

    Raises:
        ContractViolation: If no graph has both edges and non-edges
    """
    rng = np.random.default_rng(seed)
    per_graph: list[tuple[np.ndarray, np.ndarray]] = []
    for g in graphs:
        positives = edge_pairs(g)
        neg = sample_negative_edges(g, rng)
        if not len(positives) or not len(neg):
            continue
        scores = decode(encode(model, g))
        targets = np.concatenate([np.ones(len(positives)), np.zeros(len(neg))])
        predicted = np.concatenate(
            [scores[positives[:, 0], positives[:, 1]], scores[neg.pairs[:, 0], neg.pairs[:, 1]]]
        )
        per_graph.append((targets, predicted))
    if not per_graph:
        raise ContractViolation("edge ranking needs at least one graph with both edges and non-edges")
    if average == "pooled":
        targets = np.concatenate([t for t, _ in per_graph])
        predicted = np.concatenate([p for _, p in per_graph])
        return float(roc_auc_score(targets, predicted))
    return float(np.mean([roc_auc_score(t, p) for t, p in per_graph]))


__all__ = [
    "GsaeModel",
    "NegativeEdgeSample",
    "structural_features",
    "encode",
    "decode",
    "sample_negative_edges",
    "reconstruction_loss",
    "train_gsae",
    "edge_ranking_auc",
]
