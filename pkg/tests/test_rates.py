import math

import numpy as np
import pytest

from stepldp.coloured import ColouredStepGraphon
from stepldp.graphon import OverlapCoupling, PartWeights, make_step_graphon
from stepldp.rates import (
    RateReport,
    block_entropy_objective,
    coupling_entropy_objective,
    rate_Ik,
    rate_Ip,
    rate_J,
    rate_R,
    rel_entropy,
    reweight_witness,
)

INF = float("inf")


def two_clique():
    return make_step_graphon([0.5, 0.5], [[1.0, 0.0], [0.0, 1.0]])


TWO_CLIQUE_P = [[1.0, 0.0], [0.0, 1.0]]


class TestRelEntropy:
    def test_zero_on_diagonal(self):
        for p in [0.0, 0.17, 0.5, 0.99, 1.0]:
            assert rel_entropy(p, p) == 0.0

    def test_degenerate_reference(self):
        assert rel_entropy(0.0, 0.3) == INF
        assert rel_entropy(1.0, 0.3) == INF
        assert rel_entropy(0.0, 0.0) == 0.0
        assert rel_entropy(1.0, 1.0) == 0.0

    def test_known_value(self):
        # against a fair coin the cost is log 2 minus the binary entropy
        rho = 0.8
        want = math.log(2) + rho * math.log(rho) + (1 - rho) * math.log(1 - rho)
        assert abs(rel_entropy(0.5, rho) - want) < 1e-15

    def test_endpoints_against_interior_reference(self):
        assert abs(rel_entropy(0.25, 1.0) - math.log(4)) < 1e-15
        assert abs(rel_entropy(0.25, 0.0) - math.log(4 / 3)) < 1e-15

    def test_convex_in_rho(self):
        grid = np.linspace(0.0, 1.0, 101)
        vals = np.array([rel_entropy(0.37, x) for x in grid])
        assert np.all(vals[:-2] + vals[2:] - 2 * vals[1:-1] >= -1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            rel_entropy(-0.1, 0.5)
        with pytest.raises(ValueError):
            rel_entropy(0.5, 1.5)


class TestRateIp:
    def test_two_clique_against_half(self):
        assert abs(rate_Ip(0.5, two_clique()) - math.log(2) / 2) < 1e-15

    def test_matches_reference_constant(self):
        u = make_step_graphon([1.0], [[0.8]])
        assert rate_Ip(0.5, u) == 0.5 * rel_entropy(0.5, 0.8)

    def test_zero_weight_cells_ignored(self):
        # second part carries no mass, so its infinite cost never shows up
        u = make_step_graphon(PartWeights([1.0, 0.0]),
                              [[0.5, 1.0], [1.0, 1.0]])
        assert rate_Ip(0.0, make_step_graphon([1.0], [[0.0]])) == 0.0
        assert rate_Ip(0.5, u) == 0.0

    def test_brute_force(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            m = int(rng.integers(1, 5))
            w = rng.dirichlet(np.ones(m))
            vals = rng.uniform(0, 1, (m, m))
            vals = (vals + vals.T) / 2
            u = make_step_graphon(w, vals)
            p = float(rng.uniform(0.1, 0.9))
            want = 0.5 * sum(
                w[a] * w[b] * rel_entropy(p, vals[a, b])
                for a in range(m) for b in range(m)
            )
            assert abs(rate_Ip(p, u) - want) < 1e-12


class TestRateIk:
    def test_brute_force(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            m = int(rng.integers(1, 5))
            k = int(rng.integers(1, 4))
            w = rng.dirichlet(np.ones(m))
            vals = rng.uniform(0, 1, (m, m))
            vals = (vals + vals.T) / 2
            colours = rng.integers(0, k, m)
            p = rng.uniform(0.05, 0.95, (k, k))
            p = (p + p.T) / 2
            a = ColouredStepGraphon(make_step_graphon(w, vals), colours, num_colours=k)
            want = 0.5 * sum(
                w[s] * w[t] * rel_entropy(p[colours[s], colours[t]], vals[s, t])
                for s in range(m) for t in range(m)
            )
            assert abs(rate_Ik(p, a) - want) < 1e-12

    def test_single_colour_reduces_to_Ip(self):
        u = two_clique()
        a = ColouredStepGraphon(u, [0, 0], num_colours=1)
        assert rate_Ik([[0.5]], a) == rate_Ip(0.5, u)

    def test_infinite_when_colour_forbids(self):
        u = make_step_graphon([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]])
        a = ColouredStepGraphon(u, [0, 1], num_colours=2)
        p = [[0.5, 0.0], [0.0, 0.5]]
        assert rate_Ik(p, a) == INF


def sweep_oracle_two_part(alpha, p, u, points=20001):
    """1-D exhaustive minimization for m = k = 2: couplings between two
    parts and two colours form a segment, parametrized by the (0,0) mass."""
    w = u.parts.weights
    ah = np.asarray(alpha, dtype=float)
    ah = ah / ah.sum()
    p = np.asarray(p, dtype=float)
    lo = max(0.0, w[0] + ah[0] - 1.0)
    hi = min(w[0], ah[0])
    h = np.empty((2, 2, 2, 2))
    for a in range(2):
        for b in range(2):
            for i in range(2):
                for j in range(2):
                    h[a, i, b, j] = rel_entropy(p[i, j], u.values[a, b])
    best = INF
    for t in np.linspace(lo, hi, points):
        c = np.array([[t, w[0] - t], [ah[0] - t, w[1] - ah[0] + t]])
        if c.min() < -1e-12:
            continue
        total = 0.0
        ok = True
        for a in range(2):
            for i in range(2):
                for b in range(2):
                    for j in range(2):
                        mass = c[a, i] * c[b, j]
                        if mass <= 0.0:
                            continue
                        if math.isinf(h[a, i, b, j]):
                            ok = False
                            break
                        total += mass * h[a, i, b, j]
                    if not ok:
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            best = min(best, 0.5 * total)
    return best


class TestRateJ:
    def test_two_clique_balanced_zero(self):
        rep = rate_J([0.5, 0.5], TWO_CLIQUE_P, two_clique(), budget=8, seed=0)
        assert rep.value <= 1e-12
        assert rep.witness_coupling is not None
        assert rep.budget_used >= 1

    def test_two_clique_unbalanced_infinite(self):
        rep = rate_J([0.3, 0.7], TWO_CLIQUE_P, two_clique(), budget=8, seed=0)
        assert rep.value == INF
        assert not rep.is_finite

    def test_constant_graphon_closed_form(self):
        # a single part forces the product coupling, so the value is the
        # alpha-weighted average entropy, exactly
        rng = np.random.default_rng(11)
        for _ in range(10):
            rho = float(rng.uniform(0.1, 0.9))
            u = make_step_graphon([1.0], [[rho]])
            k = int(rng.integers(1, 4))
            alpha = rng.dirichlet(np.ones(k))
            p = rng.uniform(0.05, 0.95, (k, k))
            p = (p + p.T) / 2
            rep = rate_J(alpha, p, u, budget=4, seed=1)
            want = 0.5 * sum(
                alpha[i] * alpha[j] * rel_entropy(p[i, j], rho)
                for i in range(k) for j in range(k)
            )
            assert abs(rep.value - want) < 1e-12

    def test_matches_sweep_oracle(self):
        rng = np.random.default_rng(13)
        for trial in range(15):
            w = rng.dirichlet(np.ones(2))
            vals = rng.uniform(0, 1, (2, 2))
            vals = (vals + vals.T) / 2
            u = make_step_graphon(w, vals)
            alpha = rng.dirichlet(np.ones(2))
            p = rng.uniform(0.05, 0.95, (2, 2))
            p = (p + p.T) / 2
            rep = rate_J(alpha, p, u, budget=16, seed=trial)
            want = sweep_oracle_two_part(alpha, p, u)
            assert rep.value <= want + 1e-9, (trial, rep.value, want)
            assert rep.value >= want - 1e-6, (trial, rep.value, want)

    def test_witness_recomputes_to_value(self):
        rng = np.random.default_rng(17)
        for trial in range(10):
            m = int(rng.integers(1, 4))
            k = int(rng.integers(1, 4))
            w = rng.dirichlet(np.ones(m))
            vals = rng.uniform(0, 1, (m, m))
            vals = (vals + vals.T) / 2
            u = make_step_graphon(w, vals)
            alpha = rng.dirichlet(np.ones(k))
            p = rng.uniform(0.05, 0.95, (k, k))
            p = (p + p.T) / 2
            rep = rate_J(alpha, p, u, budget=8, seed=trial)
            assert rep.value == coupling_entropy_objective(rep.witness_coupling, p, u)

    def test_budget_monotone(self):
        rng = np.random.default_rng(19)
        w = rng.dirichlet(np.ones(3))
        vals = rng.uniform(0, 1, (3, 3))
        vals = (vals + vals.T) / 2
        u = make_step_graphon(w, vals)
        alpha = [0.2, 0.5, 0.3]
        p = rng.uniform(0.05, 0.95, (3, 3))
        p = (p + p.T) / 2
        v1 = rate_J(alpha, p, u, budget=1, seed=5).value
        v8 = rate_J(alpha, p, u, budget=8, seed=5).value
        v64 = rate_J(alpha, p, u, budget=64, seed=5).value
        assert v64 <= v8 <= v1

    def test_scaling_invariance_bitwise(self):
        rng = np.random.default_rng(23)
        for trial in range(10):
            m = int(rng.integers(1, 4))
            k = int(rng.integers(1, 4))
            w = rng.dirichlet(np.ones(m))
            vals = rng.uniform(0, 1, (m, m))
            vals = (vals + vals.T) / 2
            u = make_step_graphon(w, vals)
            alpha = rng.integers(1, 20, k).astype(float)
            p = rng.uniform(0.05, 0.95, (k, k))
            p = (p + p.T) / 2
            base = rate_J(alpha, p, u, budget=8, seed=trial)
            for c in (0.5, 2.0, 7.0):
                other = rate_J(c * alpha, p, u, budget=8, seed=trial)
                assert other.value == base.value
                assert np.array_equal(other.witness_coupling.matrix,
                                      base.witness_coupling.matrix)

    def test_rejects_bad_budget(self):
        with pytest.raises(ValueError):
            rate_J([1.0], [[0.5]], make_step_graphon([1.0], [[0.5]]), budget=0)


class TestRateR:
    def test_two_clique_zero_at_balanced(self):
        rep = rate_R(TWO_CLIQUE_P, two_clique(), budget=64, seed=0)
        assert rep.value <= 1e-9
        wa = rep.witness_alpha.weights
        assert abs(wa[0] - 0.5) < 0.05 and abs(wa[1] - 0.5) < 0.05

    def test_two_clique_unbalanced_parts(self):
        # a 0.4/0.6 two-clique graphon: the only finite couplings put each
        # part on its own colour, so the optimum sits at alpha = (0.4, 0.6)
        u = make_step_graphon([0.4, 0.6], [[1.0, 0.0], [0.0, 1.0]])
        rep = rate_R(TWO_CLIQUE_P, u, budget=64, seed=0)
        assert rep.value <= 1e-9
        wa = np.sort(rep.witness_alpha.weights)
        assert abs(wa[0] - 0.4) < 0.05 and abs(wa[1] - 0.6) < 0.05

    def test_self_block_recovered(self):
        # u constant rho, p with p[0,0] = rho: putting everything on colour 0
        # costs nothing
        u = make_step_graphon([1.0], [[0.3]])
        p = [[0.3, 0.9], [0.9, 0.8]]
        rep = rate_R(p, u, budget=32, seed=0)
        assert rep.value <= 1e-12
        assert rep.witness_alpha.weights[0] > 0.99

    def test_all_infeasible(self):
        u = make_step_graphon([1.0], [[0.5]])
        rep = rate_R([[0.0, 0.0], [0.0, 0.0]], u, budget=8, seed=0)
        assert rep.value == INF

    def test_budget_monotone(self):
        u = make_step_graphon([0.3, 0.7], [[0.9, 0.2], [0.2, 0.6]])
        p = [[0.8, 0.3], [0.3, 0.5]]
        vals = [rate_R(p, u, budget=b, seed=2).value for b in (8, 32, 128)]
        assert vals[1] <= vals[0] and vals[2] <= vals[1]

    def test_never_exceeds_any_J(self):
        rng = np.random.default_rng(29)
        u = make_step_graphon([0.5, 0.5], [[0.7, 0.2], [0.2, 0.4]])
        p = [[0.6, 0.25], [0.25, 0.45]]
        r = rate_R(p, u, budget=64, seed=0).value
        for trial in range(10):
            alpha = rng.dirichlet(np.ones(2))
            j = rate_J(alpha, p, u, budget=16, seed=trial).value
            assert r <= j + 1e-9


class TestRateReport:
    def test_json_finite(self):
        rep = rate_J([0.5, 0.5], TWO_CLIQUE_P, two_clique(), budget=4, seed=0)
        obj = rep.to_json()
        assert obj["value"] == rep.value
        assert isinstance(obj["witnessCoupling"], list)
        assert obj["budgetUsed"] == rep.budget_used

    def test_json_infinite(self):
        rep = rate_J([0.3, 0.7], TWO_CLIQUE_P, two_clique(), budget=4, seed=0)
        assert rep.to_json()["value"] == "inf"

    def test_json_witness_alpha(self):
        rep = rate_R(TWO_CLIQUE_P, two_clique(), budget=16, seed=0)
        wa = rep.to_json()["witnessAlpha"]
        assert isinstance(wa, list) and abs(sum(wa) - 1.0) < 1e-12


class TestObjectives:
    def test_block_entropy_matches_coupling_on_identity(self):
        rng = np.random.default_rng(31)
        for _ in range(5):
            m = int(rng.integers(1, 4))
            w = rng.dirichlet(np.ones(m))
            vals = rng.uniform(0, 1, (m, m))
            vals = (vals + vals.T) / 2
            u = make_step_graphon(w, vals)
            p = rng.uniform(0.05, 0.95, (m, m))
            p = (p + p.T) / 2
            beta = PartWeights(w)
            ident = OverlapCoupling(np.diag(w), u.parts, beta)
            a = block_entropy_objective(u, beta, p)
            b = coupling_entropy_objective(ident, p, u)
            assert abs(a - b) < 1e-12


class TestReweightWitness:
    def test_identity_is_free(self):
        u = make_step_graphon([0.3, 0.7], [[0.9, 0.2], [0.2, 0.6]])
        g = PartWeights([0.3, 0.7])
        wit = reweight_witness(g, g, [[0.8, 0.3], [0.3, 0.5]], u)
        assert wit.epsilon == 0.0 and wit.bound == 0.0
        np.testing.assert_array_equal(wit.graphon.values, u.values)

    def test_frozen_epsilon_and_bound(self):
        u = make_step_graphon([0.5, 0.5], [[0.9, 0.2], [0.2, 0.6]])
        gamma = [0.5, 0.5]
        kappa = [7.0 / 12.0, 5.0 / 12.0]
        wit = reweight_witness(gamma, kappa, [[0.8, 0.3], [0.3, 0.5]], u)
        assert abs(wit.epsilon - 1.0 / 6.0) < 1e-12
        assert abs(wit.bound - 1.0 / 3.0) < 1e-12

    def test_value_preserving_identity_random(self):
        # the internal consistency check raises if the defining identity
        # breaks, so constructing many witnesses is itself the test
        rng = np.random.default_rng(37)
        for _ in range(25):
            m = int(rng.integers(1, 5))
            gw = rng.dirichlet(np.ones(m))
            kw = rng.dirichlet(np.ones(m))
            w = rng.dirichlet(np.ones(m))
            vals = rng.uniform(0, 1, (m, m))
            vals = (vals + vals.T) / 2
            u = make_step_graphon(w, vals)
            p = rng.uniform(0.05, 0.95, (m, m))
            p = (p + p.T) / 2
            wit = reweight_witness(gw, kw, p, u)
            assert wit.bound == 2.0 * wit.epsilon
            assert abs(wit.graphon.parts.total - 1.0) < 1e-9

    def test_rejects_mass_on_vanishing_block(self):
        u = make_step_graphon([1.0], [[0.5]])
        with pytest.raises(ValueError):
            reweight_witness(PartWeights([1.0, 0.0]),
                             PartWeights([0.5, 0.5]), [[0.5, 0.5], [0.5, 0.5]], u)
