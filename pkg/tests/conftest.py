"""Shared graph fixtures."""

import networkx as nx
import numpy as np
import pytest

from graph_dual_mixup.graphs import Graph, GraphDataset, one_hot
from graph_dual_mixup.synthetic import graph_from_networkx


def _make_graph(edges, n, features=None, label=(1.0, 0.0)) -> Graph:
    adjacency = np.zeros((n, n))
    for i, j in edges:
        adjacency[i, j] = adjacency[j, i] = 1.0
    if features is None:
        features = np.ones((n, 1))
    return Graph(np.asarray(features, dtype=float), adjacency, np.asarray(label, dtype=float))


def _ring(n: int, class_index: int = 0, class_count: int = 2) -> Graph:
    return graph_from_networkx(nx.cycle_graph(n), one_hot(class_index, class_count))


def _star(n: int, class_index: int = 1, class_count: int = 2) -> Graph:
    return graph_from_networkx(nx.star_graph(n - 1), one_hot(class_index, class_count))


@pytest.fixture
def make_graph():
    """Factory: undirected graph on n nodes from an edge list."""
    return _make_graph


@pytest.fixture
def ring():
    return _ring


@pytest.fixture
def star():
    return _star


@pytest.fixture
def path3():
    """3-node path 0-1-2."""
    return _make_graph([(0, 1), (1, 2)], 3)


@pytest.fixture
def toy_dataset():
    """Four rings (class 0) and four stars (class 1) with constant features."""
    graphs = [_ring(n) for n in (4, 5, 6, 7)] + [_star(n) for n in (4, 5, 6, 7)]
    return GraphDataset(tuple(graphs), feature_dim=1, class_count=2, name="toy")
