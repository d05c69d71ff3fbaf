"""Graph value types and the structural utilities every other module shares.

A graph is a node-feature matrix, a dense adjacency matrix and a label
distribution. Graphs are immutable: arrays are copied on construction and
marked read-only, so graphs can be shared freely between workers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ContractViolation
from .kernel.ops import normalize_adjacency

logger = logging.getLogger(__name__)

LABEL_SUM_TOLERANCE = 1e-9

DegreeVector = NDArray[np.float64]


def _frozen_array(values: ArrayLike, ndim: int, what: str) -> NDArray[np.float64]:
    array = np.array(values, dtype=np.float64)
    if array.ndim != ndim:
        raise ContractViolation(f"{what} must be {ndim}-dimensional, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Graph:
    """One labeled graph.

    Attributes:
        node_features: n x d feature matrix
        adjacency: n x n matrix, binary or with non-negative weights, zero diagonal
        label: length-C probability vector (one-hot for originals, soft for mixup graphs)
    """

    node_features: NDArray[np.float64]
    adjacency: NDArray[np.float64]
    label: NDArray[np.float64]

    def __post_init__(self) -> None:
        features = _frozen_array(self.node_features, 2, "node_features")
        adjacency = _frozen_array(self.adjacency, 2, "adjacency")
        label = _frozen_array(self.label, 1, "label")
        object.__setattr__(self, "node_features", features)
        object.__setattr__(self, "adjacency", adjacency)
        object.__setattr__(self, "label", label)

        n = adjacency.shape[0]
        if n < 1:
            raise ContractViolation("a graph needs at least one node")
        if adjacency.shape != (n, n):
            raise ContractViolation(f"adjacency must be square, got shape {adjacency.shape}")
        if features.shape[0] != n:
            raise ContractViolation(f"node_features has {features.shape[0]} rows but the graph has {n} nodes")
        if not (np.all(np.isfinite(features)) and np.all(np.isfinite(adjacency)) and np.all(np.isfinite(label))):
            raise ContractViolation("graph arrays must be finite")
        if np.any(adjacency < 0):
            raise ContractViolation("adjacency entries must be non-negative")
        if np.any(np.diag(adjacency) != 0):
            raise ContractViolation("raw adjacency must not store self-loops")
        if np.any(label < 0) or abs(label.sum() - 1.0) > LABEL_SUM_TOLERANCE:
            raise ContractViolation(f"label must be a probability vector, got {label.tolist()}")

    @property
    def n(self) -> int:
        """Node count."""
        return self.adjacency.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.node_features.shape[1]

    @property
    def class_count(self) -> int:
        return self.label.shape[0]

    @cached_property
    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.adjacency, self.adjacency.T))

    @cached_property
    def is_binary(self) -> bool:
        return bool(np.all((self.adjacency == 0) | (self.adjacency == 1)))

    @cached_property
    def normalized_adjacency(self) -> NDArray[np.float64]:
        """Propagation operator of this graph, computed once and cached."""
        propagation = normalize_adjacency(self.adjacency)
        propagation.setflags(write=False)
        return propagation

    @property
    def class_index(self) -> int:
        """Argmax of the label; ties resolve to the lowest class index."""
        return int(np.argmax(self.label))

    def with_label(self, label: ArrayLike) -> Graph:
        return Graph(self.node_features, self.adjacency, np.asarray(label, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class GraphDataset:
    """An ordered collection of graphs sharing feature width and class count.

    Attributes:
        graphs: Graphs in stable index order
        feature_dim: Node feature width d
        class_count: Number of classes C
        undirected: True when every adjacency is symmetric
        name: Dataset identifier
        label_values: Original integer label of each class index (for re-serialization)
    """

    graphs: tuple[Graph, ...]
    feature_dim: int
    class_count: int
    undirected: bool = True
    name: str = "dataset"
    label_values: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "graphs", tuple(self.graphs))
        if not self.label_values:
            object.__setattr__(self, "label_values", tuple(range(self.class_count)))
        if len(self.label_values) != self.class_count:
            raise ContractViolation("label_values must name every class")
        for index, graph in enumerate(self.graphs):
            if graph.feature_dim != self.feature_dim or graph.class_count != self.class_count:
                raise ContractViolation(
                    f"graph {index} has d={graph.feature_dim}, C={graph.class_count}; "
                    f"dataset expects d={self.feature_dim}, C={self.class_count}"
                )
            if self.undirected and not graph.is_symmetric:
                raise ContractViolation(f"graph {index} is not symmetric in an undirected dataset")

    def __len__(self) -> int:
        return len(self.graphs)

    def __getitem__(self, index: int) -> Graph:
        return self.graphs[index]

    def __iter__(self):
        return iter(self.graphs)

    @property
    def is_binary(self) -> bool:
        return all(graph.is_binary for graph in self.graphs)

    def class_indices(self) -> NDArray[np.int64]:
        return np.array([graph.class_index for graph in self.graphs], dtype=np.int64)

    def subset(self, indices) -> GraphDataset:
        """Return a dataset holding the graphs at `indices`, in that order."""
        return GraphDataset(
            graphs=tuple(self.graphs[int(i)] for i in indices),
            feature_dim=self.feature_dim,
            class_count=self.class_count,
            undirected=self.undirected,
            name=self.name,
            label_values=self.label_values,
        )


def one_hot(class_index: int, class_count: int) -> NDArray[np.float64]:
    label = np.zeros(class_count, dtype=np.float64)
    label[class_index] = 1.0
    return label


def degrees(g: Graph) -> DegreeVector:
    """Row sums of the adjacency matrix."""
    return g.adjacency.sum(axis=1)


def pad_to(g: Graph, target_n: int) -> Graph:
    """Append all-zero nodes until the graph has `target_n` nodes.

    Raises:
        ContractViolation: If target_n is smaller than the current node count
    """
    if target_n < g.n:
        raise ContractViolation(f"cannot pad a {g.n}-node graph down to {target_n} nodes")
    if target_n == g.n:
        return g
    extra = target_n - g.n
    features = np.vstack([g.node_features, np.zeros((extra, g.feature_dim))])
    adjacency = np.zeros((target_n, target_n))
    adjacency[: g.n, : g.n] = g.adjacency
    return Graph(features, adjacency, g.label)


def induced_subgraph(g: Graph, nodes) -> Graph:
    """Keep only `nodes` (in the given order) and the edges among them."""
    index = np.asarray(nodes, dtype=np.int64)
    if index.size == 0:
        raise ContractViolation("an induced subgraph needs at least one node")
    return Graph(g.node_features[index], g.adjacency[np.ix_(index, index)], g.label)


def permute_nodes(g: Graph, permutation) -> Graph:
    """Reorder nodes so that new node k is old node permutation[k]."""
    perm = np.asarray(permutation, dtype=np.int64)
    if perm.shape != (g.n,) or not np.array_equal(np.sort(perm), np.arange(g.n)):
        raise ContractViolation(f"not a permutation of {g.n} nodes")
    return induced_subgraph(g, perm)


def random_node_permutation(g: Graph, seed: int | np.random.Generator | None = None) -> Graph:
    """Apply one uniformly random node permutation to rows of X and rows+columns of A."""
    rng = np.random.default_rng(seed)
    return permute_nodes(g, rng.permutation(g.n))


def edge_pairs(g: Graph) -> NDArray[np.int64]:
    """Edges as a k x 2 index array.

    Symmetric graphs list each undirected edge once (i < j); asymmetric graphs
    list every non-zero off-diagonal entry.
    """
    if g.is_symmetric:
        rows, cols = np.nonzero(np.triu(g.adjacency, k=1))
    else:
        rows, cols = np.nonzero(g.adjacency)
    return np.stack([rows, cols], axis=1).astype(np.int64)


__all__ = [
    "Graph",
    "GraphDataset",
    "DegreeVector",
    "one_hot",
    "degrees",
    "pad_to",
    "induced_subgraph",
    "permute_nodes",
    "random_node_permutation",
    "edge_pairs",
]
