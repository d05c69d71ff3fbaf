"""Tests for the graph structural auto-encoder."""

import math

import networkx as nx
import numpy as np
import pytest

from graph_dual_mixup.errors import ContractViolation
from graph_dual_mixup.graphs import Graph, edge_pairs, permute_nodes
from graph_dual_mixup.gsae import (
    GsaeModel,
    NegativeEdgeSample,
    decode,
    edge_ranking_auc,
    encode,
    reconstruction_loss,
    sample_negative_edges,
    train_gsae,
)
from graph_dual_mixup.synthetic import graph_from_networkx, rings_and_stars


def zeroed(model: GsaeModel) -> GsaeModel:
    model.load_state_dict({name: np.zeros_like(values) for name, values in model.state_dict().items()})
    return model


class TestDecode:
    """Test the inner-product decoder."""

    def test_zero_embeddings_give_one_half(self):
        """Test sigma(0) everywhere."""
        assert np.array_equal(decode(np.zeros((3, 4))), np.full((3, 3), 0.5))

    def test_symmetric_and_strictly_inside_unit_interval(self):
        """Test exact symmetry and open-interval bounds on random and extreme embeddings."""
        rng = np.random.default_rng(0)
        for scale in (1.0, 10.0, 1e3):
            out = decode(rng.normal(size=(7, 5)) * scale)
            assert np.array_equal(out, out.T)
            assert np.all(out > 0) and np.all(out < 1)

    def test_identical_rows(self):
        """Test two identical embedding rows score the same against each other and themselves."""
        h = np.array([[0.3, -0.2], [0.3, -0.2], [1.0, 0.5]])
        out = decode(h)
        assert out[0, 0] == out[0, 1] == out[1, 1]


class TestEncode:
    """Test the structural encoder."""

    def test_node_features_are_ignored(self, make_graph):
        """Test graphs with equal structure but different features embed identically."""
        edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]
        g1 = make_graph(edges, 4, features=np.zeros((4, 2)))
        g2 = make_graph(edges, 4, features=np.random.default_rng(1).normal(size=(4, 2)))
        model = GsaeModel(embedding_dim=8, seed=2)
        assert np.array_equal(encode(model, g1), encode(model, g2))

    def test_permutation_equivariance(self, make_graph):
        """Test a node permutation permutes the embedding rows."""
        g = make_graph([(0, 1), (0, 2), (0, 3), (3, 4), (4, 5)], 6)
        perm = np.array([5, 2, 0, 4, 1, 3])
        model = GsaeModel(embedding_dim=8, seed=3)
        assert np.allclose(encode(model, permute_nodes(g, perm)), encode(model, g)[perm], rtol=0, atol=1e-9)

    def test_single_node(self):
        """Test a one-node graph gives one finite row."""
        g = Graph(np.ones((1, 1)), np.zeros((1, 1)), np.array([1.0]))
        h = encode(GsaeModel(embedding_dim=32, seed=0), g)
        assert h.shape == (1, 32)
        assert np.all(np.isfinite(h))


class TestNegativeSampling:
    """Test non-edge sampling."""

    def test_sample_avoids_edges_and_repeats(self):
        """Test negatives are distinct non-edges with i < j, one per edge."""
        g = graph_from_networkx(nx.cycle_graph(8), np.array([1.0, 0.0]))
        neg = sample_negative_edges(g, seed=0)
        edges = {tuple(pair) for pair in edge_pairs(g).tolist()}
        pairs = [tuple(pair) for pair in neg.pairs.tolist()]

        assert len(neg) == len(edges) == 8
        assert len(set(pairs)) == len(pairs)
        assert all(i < j for i, j in pairs)
        assert not edges & set(pairs)

    def test_sample_is_capped_by_available_non_edges(self):
        """Test a dense graph yields fewer negatives than edges."""
        g = graph_from_networkx(nx.complete_graph(4), np.array([1.0]))
        assert len(sample_negative_edges(g, seed=0)) == 0
        star = graph_from_networkx(nx.star_graph(5), np.array([1.0]))
        # 5 edges and 10 leaf-leaf non-edges
        assert len(sample_negative_edges(star, seed=0)) == 5
        assert len(sample_negative_edges(star, seed=0, count=50)) == 10

    def test_sampling_is_seeded(self):
        """Test equal seeds draw equal samples."""
        g = graph_from_networkx(nx.path_graph(9), np.array([1.0]))
        assert np.array_equal(sample_negative_edges(g, 4).pairs, sample_negative_edges(g, 4).pairs)


class TestReconstructionLoss:
    """Test the reconstruction objective."""

    def test_zero_weights_give_four_ln_two(self, make_graph):
        """Test two edges and two negatives at score 0.5 cost 4 ln 2."""
        g = make_graph([(0, 1), (2, 3)], 4)
        neg = sample_negative_edges(g, seed=0)
        assert len(neg) == 2
        loss = reconstruction_loss(zeroed(GsaeModel(embedding_dim=4)), g, neg).item()
        assert math.isclose(loss, 4 * math.log(2), rel_tol=1e-12)

    def test_loss_is_non_negative(self):
        """Test the loss never drops below zero."""
        model = GsaeModel(embedding_dim=6, seed=5)
        for seed in range(5):
            g = graph_from_networkx(nx.gnp_random_graph(7, 0.4, seed=seed), np.array([1.0]))
            assert reconstruction_loss(model, g, sample_negative_edges(g, seed)).item() >= 0.0

    def test_empty_graph_has_zero_loss(self):
        """Test a graph without edges or negatives contributes nothing."""
        g = Graph(np.ones((1, 1)), np.zeros((1, 1)), np.array([1.0]))
        neg = NegativeEdgeSample(np.zeros((0, 2), dtype=np.int64))
        assert reconstruction_loss(GsaeModel(), g, neg).item() == 0.0


class TestTraining:
    """Test self-supervised training."""

    @pytest.fixture(scope="class")
    def trained(self):
        dataset = rings_and_stars(per_class=20, seed=0)
        model = GsaeModel(seed=0)
        log = train_gsae(model, dataset, epochs=200, lr=1e-2, seed=0)
        return dataset, model, log

    def test_loss_decreases(self, trained):
        """Test the final epoch loss is below the first."""
        _, _, log = trained
        assert log.epochs == 200
        assert log.stage == "gsae"
        assert log.final_loss < log.losses[0]

    def test_loss_halves_on_most_seeds(self):
        """Test 200 epochs at least halve the loss for 8 of 10 seeds."""
        halved = 0
        for seed in range(10):
            dataset = rings_and_stars(per_class=20, n_range=(6, 12), seed=seed)
            log = train_gsae(GsaeModel(seed=seed), dataset, epochs=200, lr=1e-2, seed=seed)
            halved += log.final_loss <= 0.5 * log.losses[0]
        assert halved >= 8

    def test_star_edges_rank_above_non_edges(self, trained):
        """Test center-leaf pairs outscore leaf-leaf pairs on trained stars.

        Ring nodes all have degree 2 and identical input features, so their
        embeddings coincide and ring edges cannot be ranked above non-edges.
        """
        dataset, model, _ = trained
        stars = [g for g in dataset if g.class_index == 1]
        assert edge_ranking_auc(model, stars, seed=1) >= 0.9

    def test_single_node_graphs_leave_parameters_alone(self):
        """Test nothing to reconstruct means zero loss and no update."""
        graphs = [Graph(np.ones((1, 1)), np.zeros((1, 1)), np.array([1.0])) for _ in range(3)]
        model = GsaeModel(embedding_dim=4, seed=1)
        before = model.state_dict()
        log = train_gsae(model, graphs, epochs=5)

        assert log.losses == [0.0] * 5
        after = model.state_dict()
        assert all(np.array_equal(before[name], after[name]) for name in before)

    def test_fixed_negatives_are_deterministic(self):
        """Test both negative schedules are reproducible per seed."""
        dataset = rings_and_stars(per_class=3, seed=1)
        for resample in (True, False):
            logs = [
                train_gsae(GsaeModel(embedding_dim=8, seed=2), dataset, 10, seed=3, resample_negatives=resample)
                for _ in range(2)
            ]
            assert logs[0].losses == logs[1].losses


def test_auc_needs_rankable_graphs():
    """Test graphs without both edges and non-edges cannot be ranked."""
    complete = graph_from_networkx(nx.complete_graph(3), np.array([1.0]))
    with pytest.raises(ContractViolation):
        edge_ranking_auc(GsaeModel(embedding_dim=4), [complete])


def test_pooled_auc_is_a_probability(toy_dataset):
    """Test the pooled average stays within [0, 1]."""
    auc = edge_ranking_auc(GsaeModel(embedding_dim=4, seed=1), list(toy_dataset), average="pooled")
    assert 0.0 <= auc <= 1.0
