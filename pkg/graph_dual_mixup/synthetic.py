"""Synthetic graph-classification datasets built with networkx."""

import logging
from collections.abc import Sequence

import networkx as nx
import numpy as np

from .errors import ContractViolation
from .graphs import Graph, GraphDataset, one_hot

logger = logging.getLogger(__name__)


def graph_from_networkx(nx_graph: nx.Graph, label: np.ndarray, features: np.ndarray | None = None) -> Graph:
    """Convert an undirected networkx graph (nodes in sorted order).

    Without `features`, every node gets the constant feature 1.0.
    """
    nodes = sorted(nx_graph.nodes())
    adjacency = nx.to_numpy_array(nx_graph, nodelist=nodes, dtype=np.float64, weight=None)
    np.fill_diagonal(adjacency, 0.0)
    if features is None:
        features = np.ones((len(nodes), 1))
    return Graph(features, adjacency, label)


def _sizes(rng: np.random.Generator, n_range: tuple[int, int], count: int) -> list[int]:
    low, high = n_range
    if low < 1 or high < low:
        raise ContractViolation(f"invalid node-count range {n_range}")
    return [int(n) for n in rng.integers(low, high + 1, size=count)]


def rings_and_stars(per_class: int = 20, n_range: tuple[int, int] = (6, 12), seed: int = 0) -> GraphDataset:
    """Class 0: cycles; class 1: stars. Node features are constant.

    Args:
        per_class: Graphs per class
        n_range: Inclusive node-count range
        seed: Seed of the node counts

    Returns:
        GraphDataset named "rings-stars", rings first
    """
    rng = np.random.default_rng(seed)
    rings = [graph_from_networkx(nx.cycle_graph(n), one_hot(0, 2)) for n in _sizes(rng, n_range, per_class)]
    stars = [graph_from_networkx(nx.star_graph(n - 1), one_hot(1, 2)) for n in _sizes(rng, n_range, per_class)]
    return GraphDataset(tuple(rings + stars), feature_dim=1, class_count=2, name="rings-stars")


def density_benchmark(
    per_class: int = 20,
    n_range: tuple[int, int] = (10, 20),
    densities: Sequence[float] = (0.2, 0.5),
    seed: int = 0,
) -> GraphDataset:
    """Erdős–Rényi graphs whose class is the edge probability; raw degree is the only feature.

    Graphs of all classes are interleaved (class 0, 1, ..., 0, 1, ...).
    """
    rng = np.random.default_rng(seed)
    per_density = [
        [
            (n, int(rng.integers(2**31)))
            for n in _sizes(rng, n_range, per_class)
        ]
        for _ in densities
    ]
    graphs = []
    for k in range(per_class):
        for class_index, p in enumerate(densities):
            n, graph_seed = per_density[class_index][k]
            nx_graph = nx.gnp_random_graph(n, p, seed=graph_seed)
            degree = np.array([nx_graph.degree(node) for node in sorted(nx_graph.nodes())], dtype=np.float64)
            graphs.append(
                graph_from_networkx(nx_graph, one_hot(class_index, len(densities)), degree.reshape(-1, 1))
            )
    return GraphDataset(tuple(graphs), feature_dim=1, class_count=len(densities), name="er-density")


def load_synthetic(name: str, per_class: int = 20, seed: int = 0) -> GraphDataset:
    """Build a synthetic dataset by name ("rings-stars" or "er-density")."""
    if name == "rings-stars":
        return rings_and_stars(per_class, seed=seed)
    if name == "er-density":
        return density_benchmark(per_class, seed=seed)
    raise ContractViolation(f"unknown synthetic dataset {name!r}")


__all__ = ["graph_from_networkx", "rings_and_stars", "density_benchmark", "load_synthetic"]
