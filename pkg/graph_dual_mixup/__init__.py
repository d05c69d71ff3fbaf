"""Graph Dual Mixup - difficulty-aware graph augmentation for low-label graph classification.

Two graphs are mixed twice: their node features and labels are interpolated
directly, and their structures are interpolated in the embedding space of a
graph structural auto-encoder and decoded back into an adjacency matrix. A
classifier pre-trained on the few labeled graphs tags them as easy or hard,
and generation draws equal numbers of easy-easy, easy-hard and hard-hard pairs.

Quick Start:
    ```python
    from graph_dual_mixup import ExperimentConfig, rings_and_stars, run_experiment

    cfg = ExperimentConfig(labels_per_class=5, folds=5, repeats=1, out_dir="out")
    result = run_experiment(cfg, dataset=rings_and_stars(per_class=20))
    print(result.summary().format_banner_line())
    ```

Components:
    - Graph, GraphDataset: immutable graph value types; TU-format load/export
    - kernel: dense reverse-mode differentiation, GCN layers and Adam
    - ClassifierModel: GCN classifier with mean/add/max readout
    - GsaeModel: structural auto-encoder (degree input, inner-product decoder)
    - dual_mixup: one generated graph from a pair
    - generate_balanced / generate_random: difficulty-aware or random generation
    - run_gdm_pipeline / run_experiment: training stages and the k-fold harness
"""

from .checkpoints import load_checkpoint, save_checkpoint
from .classifier import ClassifierModel, Prediction, TrainingLog, evaluate, forward, train
from .config import ExperimentConfig, build_config, load_config_file
from .errors import (
    CheckpointError,
    ConfigError,
    ContractViolation,
    DatasetError,
    DatasetFormatError,
    DatasetLoadError,
    GdmError,
    KernelUsageError,
    LabelBudgetError,
    NumericError,
)
from .graphs import (
    Graph,
    GraphDataset,
    degrees,
    edge_pairs,
    pad_to,
    permute_nodes,
    random_node_permutation,
)
from .gsae import (
    GsaeModel,
    NegativeEdgeSample,
    decode,
    edge_ranking_auc,
    encode,
    reconstruction_loss,
    sample_negative_edges,
    train_gsae,
)
from .mixup import MixupConfig, dual_mixup, sample_lambda, sparsify_adjacency
from .pipeline import augment_dataset, run_baseline, run_experiment, run_gdm_pipeline
from .results import RunRecord, RunResult, RunSummary
from .sampling import (
    DifficultyTag,
    GeneratedGraph,
    GenerationPlan,
    MixupProvenance,
    assess_difficulty,
    generate_balanced,
    generate_random,
    replay,
)
from .storage import RunStore
from .synthetic import density_benchmark, rings_and_stars
from .tu_format import export_tu_dataset, load_tu_dataset

__version__ = "0.1.0"

__all__ = [
    # Graphs and datasets
    "Graph",
    "GraphDataset",
    "degrees",
    "edge_pairs",
    "pad_to",
    "permute_nodes",
    "random_node_permutation",
    "load_tu_dataset",
    "export_tu_dataset",
    "rings_and_stars",
    "density_benchmark",
    # Classifier
    "ClassifierModel",
    "Prediction",
    "TrainingLog",
    "forward",
    "train",
    "evaluate",
    # Structural auto-encoder
    "GsaeModel",
    "NegativeEdgeSample",
    "encode",
    "decode",
    "sample_negative_edges",
    "reconstruction_loss",
    "train_gsae",
    "edge_ranking_auc",
    # Mixup and sampling
    "MixupConfig",
    "sample_lambda",
    "sparsify_adjacency",
    "dual_mixup",
    "DifficultyTag",
    "MixupProvenance",
    "GeneratedGraph",
    "GenerationPlan",
    "assess_difficulty",
    "generate_balanced",
    "generate_random",
    "replay",
    # Experiments
    "ExperimentConfig",
    "build_config",
    "load_config_file",
    "run_gdm_pipeline",
    "run_baseline",
    "run_experiment",
    "augment_dataset",
    "RunRecord",
    "RunResult",
    "RunSummary",
    "RunStore",
    # Checkpoints
    "save_checkpoint",
    "load_checkpoint",
    # Errors
    "GdmError",
    "ContractViolation",
    "ConfigError",
    "DatasetError",
    "DatasetLoadError",
    "DatasetFormatError",
    "LabelBudgetError",
    "CheckpointError",
    "NumericError",
    "KernelUsageError",
    # Version
    "__version__",
]
