"""
Augmentation-and-training orchestration.

`run_gdm_pipeline` runs the four stages on one labeled training set:
pre-train a classifier, train the structural auto-encoder, generate the
low/medium/high subsets, and train a fresh classifier on originals plus
generated graphs. `run_experiment` wraps it in a stratified k-fold,
low-label harness with repeats and writes the result files.
"""

import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from sklearn.model_selection import StratifiedKFold

from .checkpoints import save_checkpoint
from .classifier import ClassifierModel, TrainingLog, evaluate, train
from .config import ExperimentConfig
from .errors import ConfigError, ContractViolation, LabelBudgetError
from .graphs import Graph, GraphDataset
from .gsae import GsaeModel, train_gsae
from .results import RESULT_FIELDS, RunRecord, RunResult
from .sampling import DifficultyTag, GeneratedGraph, assess_difficulty, generate_balanced, generate_random
from .seeding import derive_seed
from .storage import RunStore
from .synthetic import load_synthetic
from .tu_format import export_tu_dataset, load_tu_dataset

logger = logging.getLogger(__name__)

# stage keys of derive_seed(seed, stage, ...)
PRETRAIN_STAGE = 1
GSAE_STAGE = 2
GENERATE_STAGE = 3
FINAL_STAGE = 4

CHECKPOINT_DIR = "checkpoints"


@dataclass
class PipelineOutcome:
    """Everything one pipeline run produced."""

    model: ClassifierModel | None = None
    logs: list[TrainingLog] = field(default_factory=list)
    gsae: GsaeModel | None = None
    tags: list[DifficultyTag] = field(default_factory=list)
    generated: list[GeneratedGraph] = field(default_factory=list)


def load_dataset(cfg: ExperimentConfig) -> GraphDataset:
    """Load the TU dataset or build the synthetic dataset named by `cfg`.

    Raises:
        ConfigError: If cfg names no dataset
    """
    if cfg.synthetic:
        return load_synthetic(cfg.synthetic, cfg.synthetic_per_class, cfg.seed)
    if cfg.dataset_root is None or cfg.dataset is None:
        raise ConfigError("No dataset given: set dataset_root and dataset, or synthetic")
    return load_tu_dataset(cfg.dataset_root, cfg.dataset)


def _new_classifier(cfg: ExperimentConfig, sample: Graph, seed: int) -> ClassifierModel:
    return ClassifierModel(
        in_dim=sample.feature_dim,
        num_classes=sample.class_count,
        hidden_dim=cfg.hidden_dim,
        num_layers=cfg.num_layers,
        readout=cfg.readout,
        seed=seed,
    )


def _train_final(
    cfg: ExperimentConfig, train_graphs: Sequence[Graph], seed: int, generated: Sequence[Graph] = ()
) -> tuple[ClassifierModel, TrainingLog]:
    final_seed = derive_seed(seed, FINAL_STAGE)
    model = _new_classifier(cfg, train_graphs[0], final_seed)
    log = train(
        model,
        train_graphs,
        cfg.epochs_main,
        cfg.lr,
        final_seed,
        generated=generated,
        lambda_gdm=cfg.lambda_gdm,
        loss_reduction=cfg.loss_reduction,
        log_every=cfg.log_every,
        stage="main",
    )
    return model, log


def run_baseline(
    cfg: ExperimentConfig, train_graphs: Sequence[Graph], seed: int
) -> tuple[ClassifierModel, TrainingLog]:
    """Train the no-augmentation classifier exactly like the final pipeline stage."""
    if not train_graphs:
        raise ContractViolation("the training set is empty")
    return _train_final(cfg, train_graphs, seed)


def generate_augmentation(
    cfg: ExperimentConfig, train_graphs: Sequence[Graph], seed: int
) -> PipelineOutcome:
    """Stages 1-3: pre-train (balanced policies only), train the auto-encoder, generate.

    The returned outcome's model is the pre-trained classifier (untrained for "rand").
    """
    if not train_graphs:
        raise ContractViolation("the training set is empty")
    graphs = list(train_graphs)
    binary = all(g.is_binary for g in graphs)
    mixup_cfg = cfg.mixup_config(binary)
    outcome = PipelineOutcome(model=_new_classifier(cfg, graphs[0], derive_seed(seed, PRETRAIN_STAGE)))

    if cfg.policy != "rand":
        logger.info(f"Pre-training classifier for {cfg.epochs_pretrain} epochs on {len(graphs)} graphs")
        outcome.logs.append(
            train(outcome.model, graphs, cfg.epochs_pretrain, cfg.lr, log_every=cfg.log_every, stage="pretrain")
        )

    logger.info(f"Training structural auto-encoder for {cfg.epochs_gsae} epochs")
    gsae_seed = derive_seed(seed, GSAE_STAGE)
    outcome.gsae = GsaeModel(embedding_dim=cfg.embedding_dim, seed=gsae_seed)
    outcome.logs.append(
        train_gsae(
            outcome.gsae,
            graphs,
            cfg.epochs_gsae,
            cfg.lr,
            derive_seed(gsae_seed, 1),
            resample_negatives=cfg.resample_negatives,
            log_every=cfg.log_every,
        )
    )

    m = cfg.per_subset_count(len(graphs))
    generate_seed = derive_seed(seed, GENERATE_STAGE)
    if cfg.policy == "rand":
        outcome.generated = generate_random(
            outcome.gsae, graphs, mixup_cfg, m * len(cfg.enabled_subsets), generate_seed
        )
    else:
        outcome.tags = assess_difficulty(outcome.model, graphs, cfg.policy)
        outcome.generated = generate_balanced(
            outcome.gsae, graphs, outcome.tags, mixup_cfg, m, generate_seed, cfg.enabled_subsets
        )
    logger.info(f"Generated {len(outcome.generated)} graphs ({cfg.policy}, m={m})")
    return outcome


def run_gdm_pipeline(cfg: ExperimentConfig, train_graphs: Sequence[Graph], seed: int = 0) -> PipelineOutcome:
    """Run every stage on one labeled training set.

    Without augmentation (lambda_gdm = 0, multiplier 0 or no enabled subset)
    stages 1-3 are skipped and the final stage equals `run_baseline`.

    Args:
        cfg: Experiment configuration
        train_graphs: Labeled original graphs
        seed: Seed of this run; every stage derives its own stream from it

    Returns:
        PipelineOutcome whose model is the final classifier

    Raises:
        ContractViolation: If train_graphs is empty
    """
    if not train_graphs:
        raise ContractViolation("the training set is empty")
    outcome = generate_augmentation(cfg, train_graphs, seed) if cfg.augments else PipelineOutcome()

    logger.info(f"Final training for {cfg.epochs_main} epochs (lambda_gdm={cfg.lambda_gdm})")
    generated_graphs = [item.graph for item in outcome.generated]
    outcome.model, main_log = _train_final(cfg, train_graphs, seed, generated_graphs)
    outcome.logs.append(main_log)
    return outcome


def stratified_folds(dataset: GraphDataset, folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified (train, test) index splits, deterministic per seed.

    Raises:
        ConfigError: If there are more folds than graphs
    """
    if folds > len(dataset):
        raise ConfigError(f"{folds} folds requested for {len(dataset)} graphs")
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed % 2**32)
    labels = dataset.class_indices()
    return [(train_idx, test_idx) for train_idx, test_idx in splitter.split(np.zeros(len(labels)), labels)]


def sample_low_label(
    dataset: GraphDataset,
    train_idx: Sequence[int],
    labels_per_class: int,
    rng: np.random.Generator,
    fold: int = 0,
) -> np.ndarray:
    """Pick `labels_per_class` training graphs of every class uniformly without replacement.

    Returns:
        Sorted dataset indices

    Raises:
        LabelBudgetError: If a class has too few training graphs in this fold
    """
    train_idx = np.asarray(train_idx, dtype=np.int64)
    labels = dataset.class_indices()[train_idx]
    chosen = []
    for class_index in range(dataset.class_count):
        members = train_idx[labels == class_index]
        if len(members) < labels_per_class:
            raise LabelBudgetError(
                f"Fold {fold}: class {dataset.label_values[class_index]} has {len(members)} training graphs, "
                f"{labels_per_class} labels per class requested"
            )
        chosen.append(rng.choice(members, size=labels_per_class, replace=False))
    return np.sort(np.concatenate(chosen))


@dataclass
class FoldJob:
    fold: int
    repeat: int
    seed: int
    train_idx: np.ndarray
    test_idx: np.ndarray


@dataclass
class JobOutcome:
    record: RunRecord
    loss_rows: list[dict[str, Any]]
    provenance: list[dict[str, Any]]


def plan_jobs(cfg: ExperimentConfig, dataset: GraphDataset) -> list[FoldJob]:
    """One job per (fold, repeat); folds are shared by all repeats."""
    splits = stratified_folds(dataset, cfg.folds, derive_seed(cfg.seed, 0))
    return [
        FoldJob(fold, repeat, derive_seed(cfg.seed, 1, fold, repeat), train_idx, test_idx)
        for repeat in range(cfg.repeats)
        for fold, (train_idx, test_idx) in enumerate(splits)
    ]


def run_job(cfg: ExperimentConfig, dataset: GraphDataset, job: FoldJob, baseline: bool = False) -> JobOutcome:
    """Sample the low-label training set of one job, train, and evaluate on the fold's test graphs."""
    rng = np.random.default_rng(derive_seed(job.seed, 0))
    labeled = sample_low_label(dataset, job.train_idx, cfg.labels_per_class, rng, job.fold)
    train_graphs = [dataset[int(i)] for i in labeled]
    test_graphs = [dataset[int(i)] for i in job.test_idx]

    if baseline:
        model, log = run_baseline(cfg, train_graphs, job.seed)
        outcome = PipelineOutcome(model=model, logs=[log])
        arm = "GCN"
    else:
        outcome = run_gdm_pipeline(cfg, train_graphs, job.seed)
        arm = cfg.arm_name

    accuracy = evaluate(outcome.model, test_graphs)
    logger.info(f"Fold {job.fold} repeat {job.repeat}: {arm} test accuracy {accuracy:.4f}")

    if cfg.save_checkpoints:
        directory = Path(cfg.out_dir) / CHECKPOINT_DIR
        save_checkpoint(outcome.model, directory / f"fold{job.fold}_repeat{job.repeat}_classifier.json")
        if outcome.gsae is not None:
            save_checkpoint(outcome.gsae, directory / f"fold{job.fold}_repeat{job.repeat}_gsae.json")

    record = RunRecord(
        arm=arm,
        fold=job.fold,
        repeat=job.repeat,
        seed=job.seed,
        accuracy=accuracy,
        train_size=len(train_graphs),
        test_size=len(test_graphs),
        generated=len(outcome.generated),
    )
    keys = {"fold": job.fold, "repeat": job.repeat}
    loss_rows = [row for log in outcome.logs for row in log.rows(**keys)]
    provenance = [
        {**keys, **item.provenance.model_dump(), "source_i": int(labeled[item.provenance.source_i]),
         "source_j": int(labeled[item.provenance.source_j])}
        for item in outcome.generated
    ]
    return JobOutcome(record, loss_rows, provenance)


def run_experiment(
    cfg: ExperimentConfig, dataset: GraphDataset | None = None, baseline: bool = False, write: bool = True
) -> RunResult:
    """k-fold x repeats low-label experiment.

    Jobs run serially or on `cfg.workers` processes; results are ordered by
    (fold, repeat) either way. Provenance source indices refer to the full dataset.

    Args:
        cfg: Experiment configuration
        dataset: Dataset to use instead of the one named by cfg
        baseline: Run the no-augmentation arm
        write: Write result files to cfg.out_dir

    Returns:
        RunResult with one record per (fold, repeat)
    """
    dataset = dataset if dataset is not None else load_dataset(cfg)
    jobs = plan_jobs(cfg, dataset)
    logger.info(
        f"Running {len(jobs)} jobs ({cfg.folds} folds x {cfg.repeats} repeats) on {dataset.name} "
        f"with {cfg.workers} worker(s)"
    )
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(run_job, cfg, dataset, job, baseline) for job in jobs]
            outcomes = [future.result() for future in futures]
    else:
        outcomes = [run_job(cfg, dataset, job, baseline) for job in jobs]
    outcomes.sort(key=lambda outcome: (outcome.record.fold, outcome.record.repeat))

    result = RunResult(
        arm="GCN" if baseline else cfg.arm_name,
        dataset=dataset.name,
        folds=cfg.folds,
        repeats=cfg.repeats,
        records=[outcome.record for outcome in outcomes],
        loss_curves=[row for outcome in outcomes for row in outcome.loss_rows],
        provenance=[record for outcome in outcomes for record in outcome.provenance],
    )
    if write:
        write_run(cfg, result)
    return result


def write_run(cfg: ExperimentConfig, result: RunResult) -> RunStore:
    store = RunStore(cfg.out_dir)
    store.save_results(RESULT_FIELDS, result.rows())
    store.save_loss_curves(result.loss_curves)
    store.save_config_snapshot(cfg.snapshot())
    if result.provenance:
        store.save_provenance(result.provenance)
    store.save_summary(result.summary(cfg.snapshot()).model_dump())
    return store


@dataclass
class AugmentationOutcome:
    generated: list[GeneratedGraph]
    written: list[Path]


def augment_dataset(cfg: ExperimentConfig, dataset: GraphDataset | None = None) -> AugmentationOutcome:
    """Generate a mixup set from a whole dataset and export it in TU layout.

    The generated graphs go to `<out_dir>/generated/` as `<name>_gdm_*.txt`,
    one provenance record per graph to `<out_dir>/provenance.jsonl`.
    """
    dataset = dataset if dataset is not None else load_dataset(cfg)
    outcome = generate_augmentation(cfg, list(dataset), cfg.seed)
    generated_set = GraphDataset(
        graphs=tuple(item.graph for item in outcome.generated),
        feature_dim=dataset.feature_dim,
        class_count=dataset.class_count,
        undirected=True,
        name=f"{dataset.name}_gdm",
        label_values=dataset.label_values,
    )
    store = RunStore(cfg.out_dir)
    written = export_tu_dataset(generated_set, store.out_dir / "generated")
    written.append(store.save_provenance([item.provenance for item in outcome.generated]))
    written.append(store.save_config_snapshot(cfg.snapshot()))
    if cfg.save_checkpoints and outcome.gsae is not None:
        written.append(save_checkpoint(outcome.gsae, store.out_dir / CHECKPOINT_DIR / "gsae.json"))
    return AugmentationOutcome(outcome.generated, written)


__all__ = [
    "PipelineOutcome",
    "AugmentationOutcome",
    "FoldJob",
    "JobOutcome",
    "load_dataset",
    "run_baseline",
    "generate_augmentation",
    "run_gdm_pipeline",
    "stratified_folds",
    "sample_low_label",
    "plan_jobs",
    "run_job",
    "run_experiment",
    "write_run",
    "augment_dataset",
]
