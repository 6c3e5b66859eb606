import numpy as np
import pytest

from stepldp.graphon import make_step_graphon
from stepldp.samplers import (
    alignment_distance_bound,
    apportion_counts,
    coupled_block_sample,
    sample_block,
    sample_wrandom,
)


class TestApportionCounts:
    def test_sums_and_bounds(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            m = int(rng.integers(1, 7))
            w = rng.dirichlet(np.ones(m))
            n = int(rng.integers(0, 200))
            c = apportion_counts(n, w)
            assert c.sum() == n
            assert np.all(c >= np.floor(n * w).astype(int))
            assert np.all(c <= np.floor(n * w).astype(int) + 1)

    def test_exact_when_divisible(self):
        np.testing.assert_array_equal(apportion_counts(10, [0.2, 0.3, 0.5]),
                                      [2, 3, 5])

    def test_tie_goes_to_lower_index(self):
        np.testing.assert_array_equal(apportion_counts(1, [0.5, 0.5]), [1, 0])
        np.testing.assert_array_equal(apportion_counts(3, [0.5, 0.5]), [2, 1])

    def test_zero_weight_part_gets_nothing(self):
        np.testing.assert_array_equal(apportion_counts(7, [0.0, 1.0]), [0, 7])

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            apportion_counts(-1, [1.0])


class TestSampleBlock:
    def test_shape_and_determinism(self):
        p = np.array([[0.7, 0.2], [0.2, 0.4]])
        g1 = sample_block([3, 4], p, seed=42)
        g2 = sample_block([3, 4], p, seed=42)
        assert g1.n == 7
        assert g1.edges == g2.edges
        g3 = sample_block([3, 4], p, seed=43)
        assert g1.edges != g3.edges  # overwhelmingly likely

    def test_probability_zero_and_one_exact(self):
        p = np.array([[1.0, 0.0], [0.0, 1.0]])
        g = sample_block([4, 5], p, seed=0)
        adj = g.adjacency()
        # first four vertices form a clique, last five form a clique,
        # nothing crosses
        assert np.all(adj[:4, :4][np.triu_indices(4, 1)] == 1)
        assert np.all(adj[4:, 4:][np.triu_indices(5, 1)] == 1)
        assert np.all(adj[:4, 4:] == 0)

    def test_no_loops(self):
        g = sample_block([6], [[1.0]], seed=1)
        assert np.all(np.diag(g.adjacency()) == 0)

    def test_empirical_frequency(self):
        p = np.array([[0.3]])
        total = edges = 0
        for s in range(200):
            g = sample_block([12], p, seed=s)
            edges += len(g.edges)
            total += 12 * 11 // 2
        freq = edges / total
        assert abs(freq - 0.3) < 0.02

    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            sample_block([-1, 2], np.full((2, 2), 0.5), seed=0)
        with pytest.raises(ValueError):
            sample_block([1, 2, 3], np.full((2, 2), 0.5), seed=0)


class TestSampleWRandom:
    def test_counts_match_graph(self):
        u = make_step_graphon([0.3, 0.7], [[0.9, 0.1], [0.1, 0.5]])
        s = sample_wrandom(25, u, seed=7)
        assert s.counts.sum() == 25
        assert s.graph.n == 25

    def test_zero_weight_part_never_sampled(self):
        u = make_step_graphon(np.array([0.0, 1.0]), [[0.9, 0.1], [0.1, 0.5]])
        for seed in range(10):
            s = sample_wrandom(30, u, seed=seed)
            assert s.counts[0] == 0

    def test_determinism(self):
        u = make_step_graphon([0.5, 0.5], [[0.8, 0.1], [0.1, 0.6]])
        a = sample_wrandom(20, u, seed=3)
        b = sample_wrandom(20, u, seed=3)
        assert a.graph.edges == b.graph.edges
        np.testing.assert_array_equal(a.counts, b.counts)

    def test_type_frequencies(self):
        u = make_step_graphon([0.25, 0.75], [[0.5, 0.5], [0.5, 0.5]])
        totals = np.zeros(2)
        for seed in range(100):
            totals += sample_wrandom(40, u, seed=seed).counts
        props = totals / totals.sum()
        assert abs(props[0] - 0.25) < 0.03


class TestAlignmentBound:
    def test_identical_counts(self):
        assert alignment_distance_bound([5, 5], [5, 5]) == 0.0

    def test_frozen_example(self):
        # shares min(3,4)+min(3,3) = 6 of max 7 vertices on one side:
        # s_a = 6/6, s_b = 6/7 -> 2(7/6 - 1) = 1/3
        assert abs(alignment_distance_bound([3, 3], [4, 3]) - 1.0 / 3.0) < 1e-15

    def test_disjoint_supports(self):
        assert alignment_distance_bound([5, 0], [0, 5]) == float("inf")


class TestCoupledBlockSample:
    def test_frozen_small_example(self):
        p = np.full((2, 2), 0.5)
        pair = coupled_block_sample([3, 3], [4, 3], p, seed=11)
        assert abs(pair.epsilon - 1.0 / 6.0) < 1e-15
        assert abs(pair.bound - 1.0 / 3.0) < 1e-15
        np.testing.assert_array_equal(pair.aligned_a, list(range(6)))
        np.testing.assert_array_equal(pair.aligned_b, [0, 1, 2, 4, 5, 6])

    def test_shared_part_isomorphic(self):
        p = np.array([[0.6, 0.2], [0.2, 0.7]])
        for seed in range(50):
            pair = coupled_block_sample([5, 7], [6, 6], p, seed=seed)
            a = pair.graph_a.adjacency()[np.ix_(pair.aligned_a, pair.aligned_a)]
            b = pair.graph_b.adjacency()[np.ix_(pair.aligned_b, pair.aligned_b)]
            np.testing.assert_array_equal(a, b)

    def test_epsilon_formula(self):
        pair = coupled_block_sample([10, 10], [8, 12], np.full((2, 2), 0.5), seed=0)
        # unaligned mass is |10-8| + |10-12| = 4 over min(20, 20)
        assert abs(pair.epsilon - 4.0 / 20.0) < 1e-15

    def test_marginal_law(self):
        # each coupled graph, viewed alone, has the block-model law
        p = np.array([[0.6]])
        edges = trials = 0
        for seed in range(300):
            pair = coupled_block_sample([8], [10], p, seed=seed)
            edges += len(pair.graph_a.edges)
            trials += 8 * 7 // 2
        assert abs(edges / trials - 0.6) < 0.02

    def test_determinism(self):
        p = np.full((2, 2), 0.4)
        x = coupled_block_sample([4, 5], [5, 4], p, seed=9)
        y = coupled_block_sample([4, 5], [5, 4], p, seed=9)
        assert x.graph_a.edges == y.graph_a.edges
        assert x.graph_b.edges == y.graph_b.edges

    def test_identical_counts_identical_graphs(self):
        p = np.full((2, 2), 0.5)
        pair = coupled_block_sample([6, 6], [6, 6], p, seed=4)
        assert pair.epsilon == 0.0
        assert pair.bound == 0.0
        assert pair.graph_a.edges == pair.graph_b.edges
