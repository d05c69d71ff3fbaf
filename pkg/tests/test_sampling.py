"""Tests for difficulty tagging and balanced generation."""

import logging
import math

import numpy as np
import pytest

from graph_dual_mixup import sampling
from graph_dual_mixup.classifier import ClassifierModel, forward
from graph_dual_mixup.errors import ContractViolation
from graph_dual_mixup.graphs import GraphDataset
from graph_dual_mixup.gsae import GsaeModel
from graph_dual_mixup.mixup import MixupConfig
from graph_dual_mixup.sampling import (
    DifficultyTag,
    MixupProvenance,
    assess_difficulty,
    draw_random_pairs,
    generate_balanced,
    generate_random,
    plan_balanced,
    prediction_entropy,
    replay,
    tag_by_accuracy,
    tag_by_uncertainty,
)


def alternating_tags(n):
    """Even indices high, odd indices low."""
    return [DifficultyTag(i, "low" if i % 2 else "high", "acc", float(i % 2)) for i in range(n)]


@pytest.fixture
def gsae():
    return GsaeModel(embedding_dim=8, seed=0)


class TestAccuracyTags:
    """Test correctness-based difficulty."""

    def test_examples(self):
        """Test a correct prediction is low and a wrong one high."""
        tags = tag_by_accuracy([np.array([0.7, 0.3])] * 2, [np.array([1.0, 0.0]), np.array([0.0, 1.0])])
        assert [tag.level for tag in tags] == ["low", "high"]
        assert [tag.score for tag in tags] == [1.0, 0.0]
        assert all(tag.policy == "acc" for tag in tags)

    def test_matches_independent_oracle(self):
        """Test 200 random (p, y) pairs against a per-graph rule."""
        rng = np.random.default_rng(0)
        probs = [rng.dirichlet(np.ones(3)) for _ in range(200)]
        labels = [np.eye(3)[rng.integers(3)] for _ in range(200)]
        tags = tag_by_accuracy(probs, labels)

        for tag, p, y in zip(tags, probs, labels, strict=True):
            predicted = max(range(3), key=lambda c: (p[c], -c))
            expected = "low" if predicted == list(y).index(1.0) else "high"
            assert tag.level == expected

    def test_ties_resolve_to_lowest_class(self):
        """Test a 50/50 prediction counts as class 0."""
        tags = tag_by_accuracy([np.array([0.5, 0.5])] * 2, [np.array([1.0, 0.0]), np.array([0.0, 1.0])])
        assert [tag.level for tag in tags] == ["low", "high"]


class TestUncertaintyTags:
    """Test entropy-based difficulty."""

    def test_entropy_of_uniform_pair(self):
        """Test Ent([0.5, 0.5]) = ln 2."""
        assert math.isclose(prediction_entropy(np.array([0.5, 0.5])), math.log(2))
        assert prediction_entropy(np.array([1.0, 0.0])) == 0.0

    def test_median_split(self, monkeypatch):
        """Test entropies 0.1, 0.2, 0.6, 0.9 split at median 0.4."""
        monkeypatch.setattr(sampling, "prediction_entropy", lambda p: float(p))
        tags = tag_by_uncertainty([0.1, 0.2, 0.6, 0.9])
        assert [tag.level for tag in tags] == ["low", "low", "high", "high"]
        assert [tag.score for tag in tags] == [0.1, 0.2, 0.6, 0.9]

    @pytest.mark.parametrize("n", range(1, 51))
    def test_low_set_is_ceil_half(self, n):
        """Test distinct entropies put ceil(N/2) graphs in the low set."""
        rng = np.random.default_rng(n)
        q = rng.permutation(np.linspace(0.01, 0.49, n))
        tags = tag_by_uncertainty([np.array([p, 1 - p]) for p in q])
        assert sum(tag.level == "low" for tag in tags) == math.ceil(n / 2)

    def test_empty(self):
        """Test no predictions give no tags."""
        assert tag_by_uncertainty([]) == []


class TestAssessDifficulty:
    """Test tagging through a classifier."""

    @pytest.fixture
    def dataset(self, make_graph):
        rng = np.random.default_rng(3)
        graphs = [
            make_graph([(0, 1), (1, 2)], 3, features=rng.normal(size=(3, 2)), label=np.eye(2)[k % 2])
            for k in range(7)
        ]
        return GraphDataset(tuple(graphs), feature_dim=2, class_count=2)

    def test_accuracy_policy_follows_predictions(self, dataset):
        """Test acc tags agree with forward predictions."""
        model = ClassifierModel(in_dim=2, num_classes=2, hidden_dim=8, seed=1)
        tags = assess_difficulty(model, dataset, "acc")
        for tag, g in zip(tags, dataset, strict=True):
            correct = forward(model, g).predicted_class == g.class_index
            assert tag.level == ("low" if correct else "high")

    def test_uncertainty_policy_halves(self, dataset):
        """Test unc tags put four of seven graphs in the low set."""
        model = ClassifierModel(in_dim=2, num_classes=2, hidden_dim=8, seed=1)
        tags = assess_difficulty(model, dataset, "unc")
        assert sum(tag.level == "low" for tag in tags) == 4

    def test_unknown_policy(self, dataset):
        """Test only acc and unc are accepted."""
        with pytest.raises(ContractViolation):
            assess_difficulty(ClassifierModel(in_dim=2, num_classes=2, hidden_dim=4), dataset, "rand")


class TestBalancedGeneration:
    """Test the three equal-size subsets."""

    def test_three_m_graphs(self, gsae, toy_dataset):
        """Test m=10 gives 30 graphs, 10 per subset."""
        generated = generate_balanced(gsae, toy_dataset, alternating_tags(8), MixupConfig(), m=10, seed=0)
        subsets = [item.provenance.subset for item in generated]
        assert len(generated) == 30
        assert subsets.count("low") == subsets.count("medium") == subsets.count("high") == 10
        assert [item.provenance.position for item in generated] == list(range(30))

    def test_pairs_follow_the_recipes(self, toy_dataset):
        """Test each subset draws from the right difficulty classes, never self-pairs."""
        tags = alternating_tags(8)
        level = {tag.index: tag.level for tag in tags}
        plan = plan_balanced(tags, MixupConfig(), m=25, seed=4)

        for draw in plan.draws:
            pair = (level[draw.source_i], level[draw.source_j])
            expected = {"low": ("low", "low"), "medium": ("low", "high"), "high": ("high", "high")}[draw.subset]
            assert pair == expected
            assert draw.source_i != draw.source_j
            assert 0.0 <= draw.lam <= 1.0
            assert not draw.fallback

    def test_singleton_class_pairs_with_itself(self):
        """Test a one-member class can only pair with itself."""
        tags = [DifficultyTag(0, "high", "acc", 0.0)] + [DifficultyTag(i, "low", "acc", 1.0) for i in range(1, 4)]
        plan = plan_balanced(tags, MixupConfig(), m=5, seed=0, subsets=("high",))
        assert {(d.source_i, d.source_j) for d in plan.draws} == {(0, 0)}

    def test_empty_class_falls_back_with_warning(self, gsae, toy_dataset, caplog):
        """Test all-low tags still give 3m graphs, flagging the affected subsets."""
        tags = [DifficultyTag(i, "low", "acc", 1.0) for i in range(8)]
        with caplog.at_level(logging.WARNING):
            generated = generate_balanced(gsae, toy_dataset, tags, MixupConfig(), m=4, seed=1)

        assert len(generated) == 12
        assert "falling back to random pairing" in caplog.text
        fallback = {item.provenance.subset: item.provenance.fallback for item in generated}
        assert fallback == {"low": False, "medium": True, "high": True}

    def test_disabled_subsets_keep_m_each(self, toy_dataset):
        """Test dropping a subset leaves the others at m."""
        plan = plan_balanced(alternating_tags(8), MixupConfig(), m=6, seed=2, subsets=("low", "high"))
        assert len(plan) == 12
        assert plan.count("low") == plan.count("high") == 6
        assert plan.count("medium") == 0

    def test_plan_is_seeded(self):
        """Test the same seed draws the same pairs and coefficients."""
        first = plan_balanced(alternating_tags(8), MixupConfig(), m=5, seed=3)
        second = plan_balanced(alternating_tags(8), MixupConfig(), m=5, seed=3)
        assert first.draws == second.draws

    def test_tag_count_must_match(self, gsae, toy_dataset):
        """Test tags must cover the dataset."""
        with pytest.raises(ContractViolation):
            generate_balanced(gsae, toy_dataset, alternating_tags(3), MixupConfig(), m=1, seed=0)


class TestRandomGeneration:
    """Test the random-pairing arm."""

    def test_counts(self, gsae, toy_dataset):
        """Test count 0 and count 30."""
        assert generate_random(gsae, toy_dataset, MixupConfig(), count=0, seed=0) == []
        generated = generate_random(gsae, toy_dataset, MixupConfig(), count=30, seed=0)
        assert len(generated) == 30
        for item in generated:
            assert item.provenance.subset == "random"
            assert 0 <= item.provenance.source_i < 8
            assert 0 <= item.provenance.source_j < 8

    def test_ordered_pair_frequencies(self):
        """Test each of the 16 ordered pairs of a 4-graph set appears about 1/16 of the time."""
        pairs = draw_random_pairs(4, 10_000, np.random.default_rng(0))
        counts = np.zeros((4, 4))
        for i, j in pairs:
            counts[i, j] += 1
        assert np.all(np.abs(counts / 10_000 - 1 / 16) < 0.01)

    def test_empty_dataset(self):
        """Test pairs cannot come from nothing."""
        with pytest.raises(ContractViolation):
            draw_random_pairs(0, 1, np.random.default_rng(0))


def test_replay_is_bitwise(gsae, toy_dataset):
    """Test regenerating from provenance reproduces every graph exactly."""
    cfg = MixupConfig(epsilon=0.3)
    generated = generate_balanced(gsae, toy_dataset, alternating_tags(8), cfg, m=3, seed=5)
    generated += generate_random(gsae, toy_dataset, cfg, count=3, seed=5)
    for item in generated:
        restored = MixupProvenance.model_validate_json(item.provenance.model_dump_json())
        again = replay(gsae, toy_dataset, restored, cfg)
        assert np.array_equal(again.adjacency, item.graph.adjacency)
        assert np.array_equal(again.node_features, item.graph.node_features)
        assert np.array_equal(again.label, item.graph.label)
