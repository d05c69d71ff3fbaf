"""Experiment configuration: defaults, config files and CLI overrides.

Precedence (lowest to highest):
1. Model defaults (the published hyper-parameters)
2. Config file (flat key = value text, or a flat YAML mapping)
3. CLI flags
"""

from __future__ import annotations

import logging
import os
import re
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, model_validator

from .classifier import LossReduction, ReadoutKind
from .errors import ConfigError
from .mixup import MixupConfig
from .sampling import BALANCED_SUBSETS, SubsetName

logger = logging.getLogger(__name__)

Policy = Literal["acc", "unc", "rand"]
SyntheticSource = Literal["rings-stars", "er-density"]

# flags that switch a positive setting off
NEGATED_KEYS = {
    "no_low": "low",
    "no_med": "med",
    "no_high": "high",
    "fixed_negatives": "resample_negatives",
    "drop_isolated": "keep_isolated",
}

_BOOL = TypeAdapter(bool)


class ExperimentConfig(BaseModel):
    """Every knob of an experiment, with the published defaults.

    Attributes:
        dataset_root: Directory holding TU-format files
        dataset: TU dataset name (file prefix)
        synthetic: Built-in synthetic dataset used instead of TU files
        synthetic_per_class: Graphs per class of the synthetic dataset
        labels_per_class: Labeled training graphs sampled per class in each fold
        folds: Stratified folds
        repeats: Repeats per fold
        seed: Master seed
        policy: Difficulty policy, or "rand" for random pairing
        low, med, high: Enabled generated subsets
        readout: Graph readout of the classifier
        lambda_gdm: Weight of the generated-graph loss
        loss_reduction: "mean" or "sum" for each loss term
        epochs_pretrain, epochs_main, epochs_gsae: Stage lengths
        lr: Adam learning rate for every stage
        alpha, beta: Beta distribution of the mixing coefficient
        epsilon: Pruning threshold of decoded edges
        binarize: Binarize generated edges; None follows the dataset (binary datasets binarize)
        keep_isolated: Keep isolated nodes in generated graphs
        aug_multiplier: Per-subset count as a multiple of the labeled set size
        hidden_dim, num_layers: Classifier width and message-passing depth
        embedding_dim: Structural embedding width
        resample_negatives: Resample auto-encoder negatives every epoch
        workers: Parallel fold x repeat jobs
        out_dir: Output directory
        save_checkpoints: Write model checkpoints per fold and repeat
        log_every: Epoch interval of progress log lines
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    dataset_root: Path | None = None
    dataset: str | None = None
    synthetic: SyntheticSource | None = None
    synthetic_per_class: int = Field(default=20, ge=1)
    labels_per_class: int = Field(default=10, ge=1)
    folds: int = Field(default=10, ge=2)
    repeats: int = Field(default=3, ge=1)
    seed: int = Field(default=0, ge=0)
    policy: Policy = "acc"
    low: bool = True
    med: bool = True
    high: bool = True
    readout: ReadoutKind = "mean"
    lambda_gdm: float = Field(default=1.0, ge=0)
    loss_reduction: LossReduction = "mean"
    epochs_pretrain: int = Field(default=100, ge=0)
    epochs_main: int = Field(default=800, ge=0)
    epochs_gsae: int = Field(default=200, ge=0)
    lr: float = Field(default=1e-2, gt=0)
    alpha: float = Field(default=1.0, gt=0)
    beta: float = Field(default=1.0, gt=0)
    epsilon: float = Field(default=0.1, ge=0, lt=1)
    binarize: bool | None = None
    keep_isolated: bool = True
    aug_multiplier: float = Field(default=1.0, ge=0)
    hidden_dim: int = Field(default=64, ge=1)
    num_layers: int = Field(default=4, ge=1)
    embedding_dim: int = Field(default=32, ge=1)
    resample_negatives: bool = True
    workers: int = Field(default=1, ge=1)
    out_dir: Path = Path("gdm-results")
    save_checkpoints: bool = False
    log_every: int = Field(default=50, ge=0)

    @model_validator(mode="after")
    def _dataset_source(self) -> ExperimentConfig:
        if self.synthetic and self.dataset:
            raise ValueError("choose either a TU dataset or a synthetic dataset, not both")
        return self

    @property
    def has_dataset(self) -> bool:
        return self.synthetic is not None or (self.dataset is not None and self.dataset_root is not None)

    @property
    def dataset_label(self) -> str:
        return self.synthetic or self.dataset or "dataset"

    @property
    def enabled_subsets(self) -> tuple[SubsetName, ...]:
        flags = {"low": self.low, "medium": self.med, "high": self.high}
        return tuple(subset for subset in BALANCED_SUBSETS if flags[subset])

    @property
    def augments(self) -> bool:
        """True when the final stage trains on generated graphs at all."""
        return self.lambda_gdm > 0 and self.aug_multiplier > 0 and bool(self.enabled_subsets)

    @property
    def arm_name(self) -> str:
        return f"GDM-{self.policy.upper()}" if self.augments else "GCN"

    def per_subset_count(self, labeled_size: int) -> int:
        return int(round(self.aug_multiplier * labeled_size))

    def mixup_config(self, binary_dataset: bool = True) -> MixupConfig:
        return MixupConfig(
            alpha=self.alpha,
            beta=self.beta,
            epsilon=self.epsilon,
            binarize=binary_dataset if self.binarize is None else self.binarize,
            keep_isolated=self.keep_isolated,
        )

    def snapshot(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


ENV_PATTERN = re.compile(r"\$\{([^}:]+)(?::([^}]*))?}")


def expand_env_vars(values: dict[str, Any]) -> dict[str, Any]:
    """Substitute ${VAR} and ${VAR:default} in the string values of a flat settings dict.

    An unset variable without a default becomes the empty string. Non-string
    values pass through untouched.
    """

    def lookup(match: re.Match[str]) -> str:
        return os.environ.get(match.group(1), match.group(2) or "")

    return {
        key: ENV_PATTERN.sub(lookup, value) if isinstance(value, str) else value for key, value in values.items()
    }


def normalize_keys(values: dict[str, Any]) -> dict[str, Any]:
    """Map CLI-style keys (hyphens, negated flags) onto ExperimentConfig field names.

    Raises:
        ConfigError: If a negated flag has a value that is not a boolean
    """
    normalized: dict[str, Any] = {}
    for raw_key, value in values.items():
        key = str(raw_key).strip().lstrip("-").replace("-", "_")
        if key in NEGATED_KEYS:
            try:
                flag = _BOOL.validate_python(value)
            except ValidationError as e:
                raise ConfigError(f"{raw_key} expects a boolean, got {value!r}") from e
            normalized[NEGATED_KEYS[key]] = not flag
        else:
            normalized[key] = value
    return normalized


def _read_key_value_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path.name}:{lineno}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip().strip('"').strip("'")
    return values


def load_config_file(path: Path | str) -> dict[str, Any]:
    """Read a config file into a flat dict of ExperimentConfig field names.

    `.yaml`/`.yml` files must hold a flat mapping; anything else is read as
    `key = value` lines with `#` comments.

    Raises:
        ConfigError: If the file is missing or malformed
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    if path.suffix in (".yaml", ".yml"):
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML in {path}: {e}") from e
        if not isinstance(data, dict) or any(isinstance(v, dict | list) for v in data.values()):
            raise ConfigError(f"{path} must contain a flat mapping of settings")
    else:
        data = _read_key_value_file(path)
    logger.debug(f"Loaded {len(data)} settings from {path}")
    return normalize_keys(expand_env_vars(data))


def build_config(config_file: Path | str | None = None, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Assemble an ExperimentConfig from defaults, an optional file and overrides.

    Overrides whose value is None are ignored, so unset CLI flags never mask
    file values.

    Raises:
        ConfigError: If a key is unknown or a value is invalid
    """
    values: dict[str, Any] = load_config_file(config_file) if config_file else {}
    cli_values = normalize_keys({k: v for k, v in (overrides or {}).items() if v is not None})
    values.update(cli_values)
    try:
        return ExperimentConfig.model_validate(values)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in error['loc']) or 'config'}: {error['msg']}" for error in e.errors()
        )
        raise ConfigError(f"Invalid configuration: {problems}") from e


__all__ = [
    "ExperimentConfig",
    "Policy",
    "SyntheticSource",
    "expand_env_vars",
    "normalize_keys",
    "load_config_file",
    "build_config",
]
