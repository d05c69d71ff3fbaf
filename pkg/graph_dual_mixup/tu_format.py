"""Reading and writing graph datasets in the TU benchmark file layout.

A dataset `NAME` lives in one directory as plain-text files:

- ``NAME_A.txt``: comma-separated 1-based ``src, dst`` node pairs (mandatory)
- ``NAME_graph_indicator.txt``: 1-based graph id of every node (mandatory)
- ``NAME_graph_labels.txt``: one integer label per graph (mandatory)
- ``NAME_node_labels.txt``: one integer label per node (optional)
- ``NAME_node_attributes.txt``: comma-separated reals per node (optional)

Generated sets add three files the loader also understands:
``NAME_graph_soft_labels.txt`` (comma-separated label distribution per graph),
``NAME_edge_weights.txt`` (one weight per ``NAME_A.txt`` line) and
``NAME_class_values.txt`` (original label value of each class index).
"""

from __future__ import annotations

import logging
from collections.abc import Iterator
from pathlib import Path

import numpy as np

from .errors import DatasetFormatError, DatasetLoadError
from .graphs import Graph, GraphDataset, one_hot
from .storage import atomic_write_text

logger = logging.getLogger(__name__)


def _dataset_file(root: Path, name: str, suffix: str) -> Path:
    return root / f"{name}_{suffix}.txt"


def _require(path: Path) -> Path:
    if not path.is_file():
        raise DatasetLoadError(f"Missing dataset file: {path.name} (looked in {path.parent})")
    return path


def _lines(path: Path) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, stripped content) for non-empty lines."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if line:
                yield lineno, line


def _parse_ints(path: Path, expected_width: int | None = None) -> list[tuple[int, list[int]]]:
    rows = []
    for lineno, line in _lines(path):
        try:
            numbers = [float(token) for token in line.split(",")]
        except ValueError as e:
            raise DatasetFormatError(f"{path.name}:{lineno}: expected integers, got {line!r}") from e
        if not all(number.is_integer() for number in numbers):
            raise DatasetFormatError(f"{path.name}:{lineno}: expected integers, got {line!r}")
        values = [int(number) for number in numbers]
        if expected_width is not None and len(values) != expected_width:
            raise DatasetFormatError(f"{path.name}:{lineno}: expected {expected_width} values, got {len(values)}")
        rows.append((lineno, values))
    return rows


def _parse_floats(path: Path) -> list[tuple[int, list[float]]]:
    rows = []
    width = None
    for lineno, line in _lines(path):
        try:
            values = [float(token) for token in line.split(",")]
        except ValueError as e:
            raise DatasetFormatError(f"{path.name}:{lineno}: expected real numbers, got {line!r}") from e
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise DatasetFormatError(f"{path.name}:{lineno}: expected {width} values, got {len(values)}")
        rows.append((lineno, values))
    return rows


def load_tu_dataset(root_path: Path | str, name: str, *, symmetrize: bool = True) -> GraphDataset:
    """Load a TU-format dataset.

    Node features are the node attributes when present, else one-hot node labels,
    else a constant 1.0 per node. Graph labels are remapped to 0..C-1 and one-hot
    encoded. Duplicate edges collapse and self-loops are dropped with a warning.

    Args:
        root_path: Directory holding the dataset files
        name: Dataset identifier (file prefix)
        symmetrize: Add the reverse of every edge and mark the dataset undirected

    Returns:
        GraphDataset with graphs in graph-id order

    Raises:
        DatasetLoadError: If a mandatory file is missing
        DatasetFormatError: If file content is malformed
    """
    root = Path(root_path)
    edges_file = _require(_dataset_file(root, name, "A"))
    indicator_file = _require(_dataset_file(root, name, "graph_indicator"))
    labels_file = _require(_dataset_file(root, name, "graph_labels"))

    indicator_rows = _parse_ints(indicator_file, expected_width=1)
    node_graph = np.array([values[0] for _, values in indicator_rows], dtype=np.int64)
    num_nodes = node_graph.size
    graph_ids = np.unique(node_graph)
    graph_position = {int(gid): pos for pos, gid in enumerate(graph_ids)}
    node_to_graph = np.array([graph_position[int(gid)] for gid in node_graph], dtype=np.int64)

    # Position of each node inside its own graph
    local_index = np.zeros(num_nodes, dtype=np.int64)
    graph_sizes = np.zeros(len(graph_ids), dtype=np.int64)
    for node, pos in enumerate(node_to_graph):
        local_index[node] = graph_sizes[pos]
        graph_sizes[pos] += 1

    label_rows = _parse_ints(labels_file, expected_width=1)
    if len(label_rows) != len(graph_ids):
        raise DatasetFormatError(
            f"{labels_file.name}: {len(label_rows)} labels for {len(graph_ids)} graphs in {indicator_file.name}"
        )
    raw_labels = [values[0] for _, values in label_rows]

    weights_file = _dataset_file(root, name, "edge_weights")
    weights = [values[0] for _, values in _parse_floats(weights_file)] if weights_file.is_file() else None

    adjacencies = [np.zeros((size, size)) for size in graph_sizes]
    self_loops = 0
    edge_rows = _parse_ints(edges_file, expected_width=2)
    if weights is not None and len(weights) != len(edge_rows):
        raise DatasetFormatError(f"{weights_file.name}: {len(weights)} weights for {len(edge_rows)} edges")
    for row_number, (lineno, (src, dst)) in enumerate(edge_rows):
        if not (1 <= src <= num_nodes and 1 <= dst <= num_nodes):
            raise DatasetFormatError(f"{edges_file.name}:{lineno}: node index out of range 1..{num_nodes}")
        src_graph, dst_graph = node_to_graph[src - 1], node_to_graph[dst - 1]
        if src_graph != dst_graph:
            raise DatasetFormatError(f"{edges_file.name}:{lineno}: edge ({src}, {dst}) crosses graphs")
        if src == dst:
            self_loops += 1
            continue
        weight = weights[row_number] if weights is not None else 1.0
        if weight < 0:
            raise DatasetFormatError(f"{weights_file.name}:{lineno}: negative edge weight {weight}")
        adjacencies[src_graph][local_index[src - 1], local_index[dst - 1]] = weight
    if self_loops:
        logger.warning(f"Dropped {self_loops} self-loops while loading {name}")

    if symmetrize:
        missing = 0
        for pos, adjacency in enumerate(adjacencies):
            conflicting = np.argwhere((adjacency > 0) & (adjacency.T > 0) & (adjacency != adjacency.T))
            if len(conflicting):
                i, j = conflicting[0]
                source = weights_file.name if weights is not None else edges_file.name
                raise DatasetFormatError(
                    f"{source}: graph {int(graph_ids[pos])} has edge ({i + 1}, {j + 1}) with weight "
                    f"{adjacency[i, j]} one way and {adjacency[j, i]} the other"
                )
            one_way = (adjacency > 0) & (adjacency.T == 0)
            missing += int(one_way.sum())
            adjacencies[pos] = np.where(adjacency > 0, adjacency, adjacency.T)
        if missing:
            logger.info(f"Added {missing} reverse edges to symmetrize {name}")
        undirected = True
    else:
        undirected = all(np.array_equal(a, a.T) for a in adjacencies)

    features = _load_node_features(root, name, num_nodes)

    soft_file = _dataset_file(root, name, "graph_soft_labels")
    class_values_file = _dataset_file(root, name, "class_values")
    if class_values_file.is_file():
        label_values = tuple(values[0] for _, values in _parse_ints(class_values_file, expected_width=1))
    else:
        label_values = tuple(sorted(set(raw_labels)))
    value_to_class = {value: index for index, value in enumerate(label_values)}
    for (lineno, _), value in zip(label_rows, raw_labels, strict=True):
        if value not in value_to_class:
            raise DatasetFormatError(f"{labels_file.name}:{lineno}: label {value} missing from {class_values_file.name}")

    if soft_file.is_file():
        soft_rows = _parse_floats(soft_file)
        if len(soft_rows) != len(graph_ids):
            raise DatasetFormatError(f"{soft_file.name}: {len(soft_rows)} rows for {len(graph_ids)} graphs")
        labels = [np.array(values) for _, values in soft_rows]
        if labels and labels[0].size != len(label_values):
            raise DatasetFormatError(f"{soft_file.name}: width {labels[0].size} does not match {len(label_values)} classes")
    else:
        labels = [one_hot(value_to_class[value], len(label_values)) for value in raw_labels]

    graphs = []
    for pos in range(len(graph_ids)):
        node_mask = node_to_graph == pos
        graphs.append(Graph(features[node_mask], adjacencies[pos], labels[pos]))

    dataset = GraphDataset(
        graphs=tuple(graphs),
        feature_dim=features.shape[1],
        class_count=len(label_values),
        undirected=undirected,
        name=name,
        label_values=label_values,
    )
    logger.info(f"Loaded {name}: N={len(dataset)}, d={dataset.feature_dim}, C={dataset.class_count}")
    return dataset


def _load_node_features(root: Path, name: str, num_nodes: int) -> np.ndarray:
    attributes_file = _dataset_file(root, name, "node_attributes")
    node_labels_file = _dataset_file(root, name, "node_labels")

    if attributes_file.is_file():
        rows = _parse_floats(attributes_file)
        if len(rows) != num_nodes:
            raise DatasetFormatError(f"{attributes_file.name}: {len(rows)} rows for {num_nodes} nodes")
        return np.array([values for _, values in rows], dtype=np.float64)

    if node_labels_file.is_file():
        rows = _parse_ints(node_labels_file, expected_width=1)
        if len(rows) != num_nodes:
            raise DatasetFormatError(f"{node_labels_file.name}: {len(rows)} rows for {num_nodes} nodes")
        values = [row[0] for _, row in rows]
        vocabulary = {value: index for index, value in enumerate(sorted(set(values)))}
        features = np.zeros((num_nodes, len(vocabulary)))
        features[np.arange(num_nodes), [vocabulary[v] for v in values]] = 1.0
        return features

    return np.ones((num_nodes, 1))


def _format_row(values) -> str:
    return ", ".join(repr(float(v)) for v in values)


def export_tu_dataset(dataset: GraphDataset, out_dir: Path | str, name: str | None = None) -> list[Path]:
    """Serialize a dataset in TU layout so that load_tu_dataset reproduces it exactly.

    Node features are written as node attributes. Soft labels and edge weights get
    their own files only when the dataset needs them.

    Args:
        dataset: Dataset to write
        out_dir: Target directory (created if missing)
        name: File prefix (defaults to dataset.name)

    Returns:
        Paths of all written files
    """
    root = Path(out_dir)
    name = name or dataset.name
    edge_lines: list[str] = []
    weight_lines: list[str] = []
    indicator_lines: list[str] = []
    attribute_lines: list[str] = []
    label_lines: list[str] = []
    soft_lines: list[str] = []

    needs_weights = not dataset.is_binary
    needs_soft = any(not np.array_equal(g.label, one_hot(g.class_index, g.class_count)) for g in dataset)

    offset = 0
    for graph_id, graph in enumerate(dataset, start=1):
        rows, cols = np.nonzero(graph.adjacency)
        for i, j in zip(rows, cols, strict=True):
            edge_lines.append(f"{offset + i + 1}, {offset + j + 1}")
            weight_lines.append(repr(float(graph.adjacency[i, j])))
        indicator_lines.extend([str(graph_id)] * graph.n)
        attribute_lines.extend(_format_row(row) for row in graph.node_features)
        label_lines.append(str(dataset.label_values[graph.class_index]))
        soft_lines.append(_format_row(graph.label))
        offset += graph.n

    contents = {
        "A": edge_lines,
        "graph_indicator": indicator_lines,
        "graph_labels": label_lines,
        "node_attributes": attribute_lines,
        "class_values": [str(value) for value in dataset.label_values],
    }
    if needs_weights:
        contents["edge_weights"] = weight_lines
    if needs_soft:
        contents["graph_soft_labels"] = soft_lines

    written = []
    for suffix, lines in contents.items():
        target = _dataset_file(root, name, suffix)
        atomic_write_text(target, "".join(f"{line}\n" for line in lines), error_msg=f"Failed to export {target.name}")
        written.append(target)
    logger.info(f"Exported {len(dataset)} graphs to {root} as {name}")
    return written


__all__ = ["load_tu_dataset", "export_tu_dataset"]
