"""Tests for experiment configuration."""

from pathlib import Path

import pytest

from graph_dual_mixup.config import (
    ExperimentConfig,
    build_config,
    load_config_file,
    normalize_keys,
)
from graph_dual_mixup.errors import ConfigError


class TestEnvReferences:
    """Tests for ${VAR} references in config files."""

    def test_set_variable_wins_over_default(self, tmp_path, monkeypatch):
        """Test a set variable replaces the reference and ignores its default."""
        monkeypatch.setenv("GDM_DATASET", "PROTEINS")
        config_file = tmp_path / "exp.conf"
        config_file.write_text("dataset = ${GDM_DATASET:MUTAG}\n")
        assert load_config_file(config_file) == {"dataset": "PROTEINS"}

    def test_defaults_for_unset_variables(self, tmp_path, monkeypatch):
        """Test unset variables fall back to their default, or to the empty string."""
        monkeypatch.delenv("GDM_UNSET", raising=False)
        config_file = tmp_path / "exp.conf"
        config_file.write_text("dataset = ${GDM_UNSET:MUTAG}\ndataset-root = /data/${GDM_UNSET}/tu\n")
        assert load_config_file(config_file) == {"dataset": "MUTAG", "dataset_root": "/data//tu"}

    def test_yaml_keeps_non_string_values(self, tmp_path, monkeypatch):
        """Test YAML strings expand while numbers and booleans pass through."""
        monkeypatch.setenv("GDM_DATA", "/data/tu")
        config_file = tmp_path / "exp.yaml"
        config_file.write_text("dataset-root: ${GDM_DATA}\nepochs_main: 50\nbinarize: false\n")
        assert load_config_file(config_file) == {"dataset_root": "/data/tu", "epochs_main": 50, "binarize": False}


class TestExperimentConfig:
    """Tests for defaults and derived settings."""

    def test_published_defaults(self):
        """Test the default hyper-parameters."""
        cfg = ExperimentConfig()
        assert (cfg.epochs_pretrain, cfg.epochs_main, cfg.epochs_gsae) == (100, 800, 200)
        assert cfg.lr == 1e-2
        assert cfg.lambda_gdm == 1.0
        assert cfg.epsilon == 0.1
        assert (cfg.alpha, cfg.beta) == (1.0, 1.0)
        assert (cfg.num_layers, cfg.hidden_dim, cfg.embedding_dim) == (4, 64, 32)
        assert cfg.readout == "mean"
        assert cfg.policy == "acc"
        assert cfg.enabled_subsets == ("low", "medium", "high")
        assert cfg.arm_name == "GDM-ACC"

    def test_frozen_and_strict(self):
        """Test unknown fields are rejected and instances are immutable."""
        cfg = ExperimentConfig()
        with pytest.raises(Exception):
            cfg.seed = 3
        with pytest.raises(Exception):
            ExperimentConfig(learning_rate=0.1)

    def test_arm_name_without_augmentation(self):
        """Test zero weight or no subsets make the baseline arm."""
        assert ExperimentConfig(lambda_gdm=0).arm_name == "GCN"
        assert ExperimentConfig(low=False, med=False, high=False).arm_name == "GCN"
        assert ExperimentConfig(policy="unc", med=False).arm_name == "GDM-UNC"

    def test_mixup_config_follows_dataset(self):
        """Test binarization defaults to the dataset's edge type unless set."""
        cfg = ExperimentConfig(epsilon=0.2, alpha=2.0)
        assert cfg.mixup_config(binary_dataset=True).binarize
        assert not cfg.mixup_config(binary_dataset=False).binarize
        assert not ExperimentConfig(binarize=False).mixup_config(binary_dataset=True).binarize
        assert cfg.mixup_config().epsilon == 0.2
        assert cfg.mixup_config().alpha == 2.0

    def test_per_subset_count(self):
        """Test m scales with the labeled set size."""
        assert ExperimentConfig().per_subset_count(20) == 20
        assert ExperimentConfig(aug_multiplier=2).per_subset_count(10) == 20
        assert ExperimentConfig(aug_multiplier=0.5).per_subset_count(7) == 4

    def test_dataset_sources_are_exclusive(self):
        """Test a TU dataset and a synthetic one cannot both be chosen."""
        with pytest.raises(Exception, match="either"):
            ExperimentConfig(dataset="MUTAG", synthetic="rings-stars")
        assert not ExperimentConfig().has_dataset
        assert ExperimentConfig(synthetic="er-density").has_dataset
        assert not ExperimentConfig(dataset="MUTAG").has_dataset
        assert ExperimentConfig(dataset="MUTAG", dataset_root=Path("data")).has_dataset


def test_normalize_keys():
    """Test hyphens, leading dashes and negated flags."""
    normalized = normalize_keys(
        {"--labels-per-class": 5, "no-med": "true", "fixed_negatives": True, "drop-isolated": "false"}
    )
    assert normalized == {"labels_per_class": 5, "med": False, "resample_negatives": False, "keep_isolated": True}

    with pytest.raises(ConfigError, match="boolean"):
        normalize_keys({"no_low": "maybe"})


class TestConfigFiles:
    """Tests for key = value and YAML config files."""

    def test_key_value_file(self, tmp_path, monkeypatch):
        """Test comments, quotes, hyphenated keys and env references."""
        monkeypatch.setenv("GDM_DATA", "/data/tu")
        config_file = tmp_path / "exp.conf"
        config_file.write_text(
            "# low-label run\n"
            "\n"
            "dataset = 'IMDB-BINARY'\n"
            "dataset-root = ${GDM_DATA}\n"
            "labels-per-class = 5\n"
            "no-high = true\n"
        )
        values = load_config_file(config_file)
        assert values == {
            "dataset": "IMDB-BINARY",
            "dataset_root": "/data/tu",
            "labels_per_class": "5",
            "high": False,
        }

        cfg = build_config(config_file)
        assert cfg.dataset_root == Path("/data/tu")
        assert cfg.labels_per_class == 5
        assert cfg.enabled_subsets == ("low", "medium")

    def test_yaml_file(self, tmp_path):
        """Test a flat YAML mapping."""
        config_file = tmp_path / "exp.yaml"
        config_file.write_text("synthetic: rings-stars\nepochs_main: 50\nreadout: max\n")
        cfg = build_config(config_file)
        assert cfg.synthetic == "rings-stars"
        assert cfg.epochs_main == 50
        assert cfg.readout == "max"

    def test_nested_yaml_rejected(self, tmp_path):
        """Test YAML must be flat."""
        config_file = tmp_path / "exp.yml"
        config_file.write_text("mixup:\n  epsilon: 0.2\n")
        with pytest.raises(ConfigError, match="flat mapping"):
            load_config_file(config_file)

    def test_malformed_line(self, tmp_path):
        """Test a line without '=' names file and line."""
        config_file = tmp_path / "exp.conf"
        config_file.write_text("seed = 1\nfolds 5\n")
        with pytest.raises(ConfigError, match="exp.conf:2"):
            load_config_file(config_file)

    def test_missing_file(self, tmp_path):
        """Test a missing config file is a config error."""
        with pytest.raises(ConfigError, match="not found"):
            load_config_file(tmp_path / "absent.conf")


class TestBuildConfig:
    """Tests for precedence and validation."""

    def test_overrides_win_over_file(self, tmp_path):
        """Test CLI values beat file values, and None leaves file values alone."""
        config_file = tmp_path / "exp.conf"
        config_file.write_text("seed = 3\nfolds = 4\n")
        cfg = build_config(config_file, {"seed": 9, "folds": None})
        assert cfg.seed == 9
        assert cfg.folds == 4

    def test_unknown_key(self):
        """Test unknown keys are config errors naming the key."""
        with pytest.raises(ConfigError, match="learning_rate"):
            build_config(overrides={"learning_rate": 0.1})

    def test_invalid_value(self):
        """Test out-of-range values are config errors."""
        with pytest.raises(ConfigError, match="Invalid configuration"):
            build_config(overrides={"epsilon": 1.5})
        with pytest.raises(ConfigError, match="policy"):
            build_config(overrides={"policy": "greedy"})
