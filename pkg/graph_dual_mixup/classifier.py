"""
GCN graph classifier.

Four message-passing layers relu(Â h W + b), a permutation-invariant readout
and a two-layer head ending in log-softmax. Training is full-batch Adam over
soft-target cross-entropy, so the same loop trains on original graphs and on
mixup graphs with soft labels.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal, get_args

import numpy as np

from .errors import ContractViolation
from .graphs import Graph
from .kernel import ops
from .kernel.layers import DenseLayer, GraphConvLayer
from .kernel.optim import AdamState, adam_step
from .kernel.tensor import Tape, Tensor

logger = logging.getLogger(__name__)

ReadoutKind = Literal["mean", "add", "max"]
LossReduction = Literal["mean", "sum"]

READOUT_KINDS: tuple[str, ...] = get_args(ReadoutKind)
DEFAULT_HIDDEN_DIM = 64
DEFAULT_NUM_LAYERS = 4
DEFAULT_LOG_EVERY = 50


class ClassifierModel:
    """Message-passing layers, readout and classification head.

    Parameters are created from `seed`; `reset_parameters(seed)` draws exactly
    the same values, so a model built with seed s and a model reset to s agree
    bitwise.
    """

    def __init__(
        self,
        in_dim: int,
        num_classes: int,
        hidden_dim: int = DEFAULT_HIDDEN_DIM,
        num_layers: int = DEFAULT_NUM_LAYERS,
        readout: ReadoutKind = "mean",
        seed: int = 0,
    ):
        if readout not in READOUT_KINDS:
            raise ContractViolation(f"readout must be one of {READOUT_KINDS}, got {readout!r}")
        if min(in_dim, num_classes, hidden_dim, num_layers) < 1:
            raise ContractViolation("classifier dimensions and layer count must be positive")
        self.in_dim = in_dim
        self.num_classes = num_classes
        self.hidden_dim = hidden_dim
        self.num_layers = num_layers
        self.readout = readout

        rng = np.random.default_rng(seed)
        widths = [in_dim] + [hidden_dim] * num_layers
        self.mp_layers = [
            GraphConvLayer(widths[i], widths[i + 1], rng, name=f"mp{i}") for i in range(num_layers)
        ]
        self.fc_layers = [
            DenseLayer(hidden_dim, hidden_dim, rng, name="fc0"),
            DenseLayer(hidden_dim, num_classes, rng, name="fc1"),
        ]

    def _layers(self) -> list[DenseLayer]:
        return [*self.mp_layers, *self.fc_layers]

    def parameters(self) -> list[Tensor]:
        return [param for layer in self._layers() for param in layer.parameters()]

    def reset_parameters(self, seed: int) -> None:
        rng = np.random.default_rng(seed)
        for layer in self._layers():
            layer.reset(rng)

    def architecture(self) -> dict[str, int | str]:
        return {
            "in_dim": self.in_dim,
            "num_classes": self.num_classes,
            "hidden_dim": self.hidden_dim,
            "num_layers": self.num_layers,
            "readout": self.readout,
        }

    def state_dict(self) -> dict[str, np.ndarray]:
        return {param.name: param.values.copy() for param in self.parameters()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        """Replace every parameter; names and shapes must match exactly."""
        params = {param.name: param for param in self.parameters()}
        if set(state) != set(params):
            raise ContractViolation(f"state keys {sorted(state)} do not match parameters {sorted(params)}")
        for name, values in state.items():
            values = np.asarray(values, dtype=np.float64)
            if values.shape != params[name].shape:
                raise ContractViolation(f"{name}: expected shape {params[name].shape}, got {values.shape}")
            params[name].values = values.copy()
            params[name].zero_grad()

    def graph_embedding(self, tape: Tape, g: Graph) -> Tensor:
        """Readout over the final message-passing layer: a 1 x hidden_dim row."""
        if g.feature_dim != self.in_dim:
            raise ContractViolation(f"graph has {g.feature_dim} node features, model expects {self.in_dim}")
        a_hat = Tensor(g.normalized_adjacency)
        h = Tensor(g.node_features)
        for layer in self.mp_layers:
            h = ops.relu(tape, layer.propagate(tape, a_hat, h))
        if self.readout == "mean":
            return ops.mean_rows(tape, h)
        if self.readout == "add":
            return ops.sum_rows(tape, h)
        return ops.max_rows(tape, h)

    def log_probs(self, tape: Tape, g: Graph) -> Tensor:
        hidden = ops.relu(tape, self.fc_layers[0](tape, self.graph_embedding(tape, g)))
        return ops.log_softmax(tape, self.fc_layers[1](tape, hidden))


@dataclass
class Prediction:
    """Class distribution predicted for one graph."""

    probs: np.ndarray
    log_probs: np.ndarray

    @property
    def predicted_class(self) -> int:
        return int(np.argmax(self.probs))


@dataclass
class TrainingLog:
    """Per-epoch loss sequence of one training stage."""

    stage: str
    losses: list[float] = field(default_factory=list)

    @property
    def epochs(self) -> int:
        return len(self.losses)

    @property
    def final_loss(self) -> float | None:
        return self.losses[-1] if self.losses else None

    def rows(self, **keys) -> list[dict]:
        """Loss-curve rows (1-based epochs) tagged with `keys`, e.g. fold and repeat."""
        return [{**keys, "stage": self.stage, "epoch": epoch, "loss": loss} for epoch, loss in enumerate(self.losses, 1)]


def forward(model: ClassifierModel, g: Graph) -> Prediction:
    """Predict class probabilities for one graph.

    Raises:
        ContractViolation: If the graph's feature width differs from the model input width
    """
    log_probs = model.log_probs(Tape(), g).values[0].copy()
    return Prediction(probs=np.exp(log_probs), log_probs=log_probs)


def classification_loss(
    model: ClassifierModel, graphs: Sequence[Graph], tape: Tape, reduction: LossReduction = "mean"
) -> Tensor:
    """Soft-target cross-entropy over `graphs`, averaged (or summed) over graphs."""
    if not graphs:
        raise ContractViolation("classification loss needs at least one graph")
    stacked = ops.concat_rows(tape, [model.log_probs(tape, g) for g in graphs])
    targets = np.vstack([g.label for g in graphs])
    loss = ops.soft_cross_entropy(tape, stacked, targets)
    if reduction == "sum":
        return ops.scale(tape, loss, len(graphs))
    return loss


def train(
    model: ClassifierModel,
    train_set: Sequence[Graph],
    epochs: int,
    lr: float = 1e-2,
    seed: int | None = None,
    *,
    generated: Sequence[Graph] = (),
    lambda_gdm: float = 1.0,
    loss_reduction: LossReduction = "mean",
    log_every: int = DEFAULT_LOG_EVERY,
    stage: str = "train",
) -> TrainingLog:
    """Full-batch training with Adam.

    The loss is the cross-entropy over `train_set` plus `lambda_gdm` times the
    cross-entropy over `generated` (skipped when `generated` is empty).

    Args:
        model: Classifier to train in place
        train_set: Original labeled graphs
        epochs: Number of full-batch epochs; 0 leaves the model untouched
        lr: Adam learning rate
        seed: When given, parameters are re-initialized from it first
        generated: Mixup graphs with soft labels
        lambda_gdm: Weight of the generated-graph term
        loss_reduction: "mean" averages each term over its graphs, "sum" adds them up
        log_every: Epoch interval of progress log lines
        stage: Stage name recorded in the log

    Returns:
        TrainingLog with one loss value per epoch

    Raises:
        ContractViolation: If train_set is empty or epochs is negative
    """
    if not train_set:
        raise ContractViolation("training needs at least one original graph")
    if epochs < 0:
        raise ContractViolation(f"epochs must be non-negative, got {epochs}")
    log = TrainingLog(stage=stage)
    if epochs == 0:
        return log
    if seed is not None:
        model.reset_parameters(seed)

    params = model.parameters()
    state = AdamState.for_parameters(params, learning_rate=lr)
    use_generated = len(generated) > 0 and lambda_gdm != 0
    logger.debug(
        f"[{stage}] {len(train_set)} original + {len(generated) if use_generated else 0} generated graphs, "
        f"{epochs} epochs"
    )
    for epoch in range(1, epochs + 1):
        tape = Tape()
        loss = classification_loss(model, train_set, tape, loss_reduction)
        if use_generated:
            generated_loss = classification_loss(model, generated, tape, loss_reduction)
            loss = ops.add(tape, loss, ops.scale(tape, generated_loss, lambda_gdm))
        tape.backward(loss)
        adam_step(state, params)
        log.losses.append(loss.item())
        if log_every and (epoch % log_every == 0 or epoch == epochs):
            logger.debug(f"[{stage}] epoch {epoch}/{epochs} loss {loss.item():.4f}")
    return log


def evaluate(model: ClassifierModel, eval_set: Sequence[Graph]) -> float:
    """Fraction of graphs whose predicted class equals the label's argmax.

    Raises:
        ContractViolation: If eval_set is empty
    """
    if not eval_set:
        raise ContractViolation("cannot evaluate on an empty set")
    correct = sum(forward(model, g).predicted_class == g.class_index for g in eval_set)
    return correct / len(eval_set)


__all__ = [
    "ClassifierModel",
    "Prediction",
    "TrainingLog",
    "ReadoutKind",
    "LossReduction",
    "READOUT_KINDS",
    "forward",
    "classification_loss",
    "train",
    "evaluate",
]
