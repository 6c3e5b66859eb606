import json

import numpy as np
import pytest

from stepldp.graphon import (
    LabeledGraph,
    OverlapCoupling,
    PartWeights,
    StepGraphon,
    apply_coupling,
    common_refinement,
    coupling_pieces,
    edge_density,
    graph_from_edgelist,
    graph_to_edgelist,
    graph_to_graphon,
    graphon_from_json,
    graphon_to_json,
    make_step_graphon,
    overlay_partitions,
    project_steps,
    stretch_pullback,
)


class TestPartWeights:
    def test_exact_weights_kept_bitwise(self):
        w = PartWeights([0.3, 0.7])
        assert w.weights[0] == 0.3 and w.weights[1] == 0.7

    def test_zero_weight_parts_retained(self):
        w = PartWeights([0.5, 0.0, 0.5])
        assert w.size == 3
        assert w.weights[1] == 0.0

    def test_normalizes_only_when_off(self):
        w = PartWeights([1.0, 3.0])
        np.testing.assert_allclose(w.weights, [0.25, 0.75])
        assert w.total == 4.0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            PartWeights([0.5, -0.1, 0.6])

    def test_rejects_zero_total(self):
        with pytest.raises(ValueError):
            PartWeights([0.0, 0.0])

    def test_boundaries(self):
        w = PartWeights([0.3, 0.2, 0.5])
        np.testing.assert_allclose(w.boundaries(), [0.3, 0.5, 1.0])

    def test_read_only(self):
        w = PartWeights([0.5, 0.5])
        with pytest.raises(ValueError):
            w.weights[0] = 0.9

    def test_approx_equal(self):
        assert PartWeights([0.5, 0.5]).approx_equal(PartWeights([0.5, 0.5 + 1e-12]))
        assert not PartWeights([0.5, 0.5]).approx_equal(PartWeights([0.4, 0.6]))


class TestStepGraphon:
    def test_symmetrizes_tiny_drift(self):
        vals = np.array([[0.5, 0.3], [0.3 + 1e-13, 0.5]])
        u = StepGraphon(PartWeights([0.5, 0.5]), vals)
        assert u.values[0, 1] == u.values[1, 0]

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            StepGraphon(PartWeights([0.5, 0.5]), [[0.5, 0.1], [0.9, 0.5]])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            make_step_graphon([1.0], [[1.5]])
        with pytest.raises(ValueError):
            make_step_graphon([1.0], [[-0.5]])

    def test_graph_embedding(self):
        g = LabeledGraph(3, [(0, 1), (1, 2)])
        u = graph_to_graphon(g)
        np.testing.assert_allclose(u.parts.weights, [1 / 3] * 3)
        assert u.values[0, 1] == 1.0 and u.values[0, 2] == 0.0
        assert np.all(np.diag(u.values) == 0.0)

    def test_edge_density(self):
        u = make_step_graphon([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]])
        assert edge_density(u) == 0.5


class TestLabeledGraph:
    def test_canonical_edges(self):
        g = LabeledGraph(3, [(2, 0), (0, 2), (1, 2)])
        assert g.edge_count() == 2
        assert g.has_edge(0, 2) and g.has_edge(2, 0)

    def test_rejects_loops(self):
        with pytest.raises(ValueError):
            LabeledGraph(3, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            LabeledGraph(3, [(0, 3)])

    def test_adjacency_symmetric(self):
        g = LabeledGraph(4, [(0, 1), (2, 3)])
        adj = g.adjacency()
        assert np.array_equal(adj, adj.T)
        assert adj[0, 1] == 1 and adj[0, 2] == 0

    def test_density(self):
        g = LabeledGraph(4, [(0, 1), (2, 3), (0, 3)])
        assert g.density() == 0.5


class TestOverlay:
    def test_frozen_example(self):
        w, src, tgt = overlay_partitions(PartWeights([0.3, 0.7]), PartWeights([0.5, 0.5]))
        np.testing.assert_array_equal(w, [0.3, 0.2, 0.5])
        np.testing.assert_array_equal(src, [0, 1, 1])
        np.testing.assert_array_equal(tgt, [0, 0, 1])
        assert w.sum() == 1.0

    def test_identical_partitions(self):
        p = PartWeights([0.25, 0.25, 0.5])
        w, src, tgt = overlay_partitions(p, p)
        # zero-width bridge pieces may appear where both sides advance
        np.testing.assert_array_equal(w[w > 0], p.weights)
        np.testing.assert_array_equal(src[w > 0], tgt[w > 0])
        assert w.sum() == 1.0

    def test_zero_weight_parts_show_up(self):
        w, src, tgt = overlay_partitions(PartWeights([0.5, 0.0, 0.5]), PartWeights([1.0]))
        assert 1 in src
        assert w[src == 1].sum() == 0.0

    def test_weights_partition_both_sides(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            a = PartWeights(rng.dirichlet(np.ones(rng.integers(1, 7))))
            b = PartWeights(rng.dirichlet(np.ones(rng.integers(1, 7))))
            w, src, tgt = overlay_partitions(a, b)
            for i in range(a.size):
                np.testing.assert_allclose(w[src == i].sum(), a.weights[i], atol=1e-12)
            for j in range(b.size):
                np.testing.assert_allclose(w[tgt == j].sum(), b.weights[j], atol=1e-12)

    def test_common_refinement_reproduces_values(self):
        u = make_step_graphon([0.3, 0.7], [[0.9, 0.2], [0.2, 0.5]])
        v = make_step_graphon([0.5, 0.5], [[0.1, 0.8], [0.8, 0.4]])
        parts, vu, vv = common_refinement(u, v)
        # same function, finer steps: total mass must match
        ru = StepGraphon(parts, vu)
        rv = StepGraphon(parts, vv)
        np.testing.assert_allclose(edge_density(ru), edge_density(u), atol=1e-12)
        np.testing.assert_allclose(edge_density(rv), edge_density(v), atol=1e-12)


class TestCouplings:
    def test_marginal_validation(self):
        with pytest.raises(ValueError):
            OverlapCoupling(
                np.array([[0.5, 0.0], [0.0, 0.4]]),
                PartWeights([0.5, 0.5]),
                PartWeights([0.5, 0.5]),
            )

    def test_identity_coupling_is_noop(self):
        u = make_step_graphon([0.4, 0.6], [[0.9, 0.2], [0.2, 0.5]])
        c = OverlapCoupling(np.diag(u.parts.weights), u.parts, u.parts)
        v = apply_coupling(u, u.parts, c)
        np.testing.assert_allclose(edge_density(v), edge_density(u), atol=1e-14)

    def test_coupling_pieces_grouped_by_target(self):
        c = OverlapCoupling(
            np.array([[0.25, 0.25], [0.25, 0.25]]),
            PartWeights([0.5, 0.5]),
            PartWeights([0.5, 0.5]),
        )
        w, src, tgt = coupling_pieces(c)
        assert list(tgt) == [0, 0, 1, 1]
        assert list(src) == [0, 1, 0, 1]
        np.testing.assert_allclose(w, 0.25)

    def test_transpose(self):
        c = OverlapCoupling(
            np.array([[0.3, 0.0], [0.2, 0.5]]),
            PartWeights([0.3, 0.7]),
            PartWeights([0.5, 0.5]),
        )
        t = c.transpose()
        np.testing.assert_array_equal(t.matrix, c.matrix.T)


class TestStretchAndProject:
    def test_stretch_frozen_example(self):
        u = make_step_graphon([0.3, 0.7], [[0.9, 0.2], [0.2, 0.5]])
        v = stretch_pullback(u, 0.75)
        np.testing.assert_allclose(v.parts.weights, [0.4, 0.6])
        np.testing.assert_array_equal(v.values, u.values)

    def test_stretch_identity(self):
        u = make_step_graphon([0.3, 0.7], [[0.9, 0.2], [0.2, 0.5]])
        v = stretch_pullback(u, 1.0)
        np.testing.assert_allclose(v.parts.weights, u.parts.weights)

    def test_stretch_drops_far_parts(self):
        u = make_step_graphon([0.5, 0.5], [[0.9, 0.2], [0.2, 0.5]])
        v = stretch_pullback(u, 0.5)
        np.testing.assert_allclose(v.parts.weights, [1.0, 0.0])

    def test_stretch_validates(self):
        u = make_step_graphon([1.0], [[0.5]])
        with pytest.raises(ValueError):
            stretch_pullback(u, 0.0)
        with pytest.raises(ValueError):
            stretch_pullback(u, 1.5)

    def test_project_identity_grouping(self):
        u = make_step_graphon([0.3, 0.7], [[0.9, 0.2], [0.2, 0.5]])
        v = project_steps(u, [0, 1])
        np.testing.assert_allclose(v.values, u.values)

    def test_project_to_constant(self):
        u = make_step_graphon([0.3, 0.7], [[0.9, 0.2], [0.2, 0.5]])
        v = project_steps(u, [0, 0])
        np.testing.assert_allclose(v.values[0, 0], edge_density(u), atol=1e-14)

    def test_project_requires_all_groups(self):
        u = make_step_graphon([0.5, 0.5], [[0.9, 0.2], [0.2, 0.5]])
        with pytest.raises(ValueError):
            project_steps(u, [0, 2])


class TestSerialization:
    def test_graphon_json_roundtrip_bitexact(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            m = int(rng.integers(1, 6))
            w = rng.dirichlet(np.ones(m))
            vals = rng.uniform(0, 1, (m, m))
            vals = (vals + vals.T) / 2
            u = StepGraphon(PartWeights(w), vals)
            text = json.dumps(graphon_to_json(u))
            v = graphon_from_json(json.loads(text))
            assert np.array_equal(u.parts.weights, v.parts.weights)
            assert np.array_equal(u.values, v.values)

    def test_graphon_json_rejects_garbage(self):
        with pytest.raises(ValueError):
            graphon_from_json([1, 2, 3])
        with pytest.raises(ValueError):
            graphon_from_json({"weights": [1.0]})

    def test_edgelist_roundtrip(self):
        g = LabeledGraph(5, [(0, 1), (3, 4), (1, 4)])
        h = graph_from_edgelist(graph_to_edgelist(g))
        assert h.n == g.n and h.edges == g.edges

    def test_edgelist_rejects_garbage(self):
        with pytest.raises(ValueError):
            graph_from_edgelist("")
        with pytest.raises(ValueError):
            graph_from_edgelist("3\n1 2 3\n")
