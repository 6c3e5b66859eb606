"""Measuring rare-event probabilities of block-model and step-graphon graphs.

The harness computes log probabilities of graph events three ways: exactly
(binomial/convolution closed forms for edge-density events, full enumeration
over edge subsets for general events at tiny sizes), by exponentially tilted
importance sampling (density events at scale), and by plain Monte Carlo.
``ldp_curve`` sweeps the graph size and reports the decay of
-log P(event) against the speed n^2, which is the quantity the rate
functions predict.

Conventions.  Densities compare with plain float comparisons, no tolerance:
an event "density >= r" holds iff edge_count / (n choose 2) >= r in floats,
and every exact routine reproduces exactly that predicate.  Ball events test
membership through a certified upper bound on the cut distance, so reported
probabilities are lower bounds on the true ball probability (a graph only
counts once the search proves it within eta).
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaln, logsumexp

from .graphon import LabeledGraph, StepGraphon, graph_to_graphon
from .cutmetric import cut_distance_search
from .rates import _simplex_grid, rel_entropy
from .samplers import apportion_counts, sample_block, sample_wrandom

__all__ = [
    "EventSpec",
    "GnpFamily",
    "BlockFamily",
    "WRandomFamily",
    "CurvePoint",
    "Estimate",
    "binomial_tail_logprob",
    "density_logprob_block",
    "exact_event_logprob_block",
    "exact_event_logprob_wrandom",
    "mc_event_logprob",
    "tilted_density_logprob_block",
    "gnp_density_rate",
    "ldp_curve",
]

ENUM_FREE_LIMIT = 21  # at most 2^21 edge subsets are ever enumerated
_ENUM_CHUNK = 1 << 14
_CONVOLVE_BUDGET = 50_000_000


# ---------------------------------------------------------------------------
# events


@dataclass(frozen=True)
class EventSpec:
    """A graph event: an edge-density threshold or a cut-metric ball.

    kind is "density-ge", "density-le", or "ball".  Density events carry the
    threshold r; ball events carry a target step graphon and radius eta, and
    hold when the distance search certifies the empirical graphon within eta
    of the target (an upper-bound test: the event never over-counts).
    """

    kind: str
    r: Optional[float] = None
    target: Optional[StepGraphon] = None
    eta: Optional[float] = None
    search_restarts: int = 16

    def __post_init__(self):
        if self.kind in ("density-ge", "density-le"):
            if self.r is None or not (0.0 <= self.r <= 1.0):
                raise ValueError("density events need a threshold r in [0, 1]")
        elif self.kind == "ball":
            if self.target is None or self.eta is None or self.eta < 0.0:
                raise ValueError("ball events need a target graphon and eta >= 0")
        else:
            raise ValueError("unknown event kind %r" % (self.kind,))

    @property
    def is_density(self):
        return self.kind in ("density-ge", "density-le")

    def check_density(self, density):
        if self.kind == "density-ge":
            return density >= self.r
        if self.kind == "density-le":
            return density <= self.r
        raise ValueError("not a density event")

    def check_graph(self, graph: LabeledGraph):
        if self.is_density:
            return self.check_density(graph.density())
        d = cut_distance_search(
            graph_to_graphon(graph),
            self.target,
            restarts=self.search_restarts,
            seed=0,
        )
        return d.upper <= self.eta


# ---------------------------------------------------------------------------
# families of graph laws, one per size n


@dataclass(frozen=True)
class GnpFamily:
    """Erdos-Renyi: every pair is an edge with the same probability."""

    p: float

    def counts_for(self, n):
        return np.array([n], dtype=int), np.array([[float(self.p)]])

    def label(self):
        return "gnp"


@dataclass(frozen=True)
class BlockFamily:
    """Block models with counts apportioned from fixed block fractions."""

    alpha: tuple
    p: tuple  # nested tuple, symmetric

    def counts_for(self, n):
        pm = np.asarray(self.p, dtype=float)
        return apportion_counts(n, np.asarray(self.alpha, dtype=float)), pm

    def label(self):
        return "block"


@dataclass(frozen=True)
class WRandomFamily:
    """Step-graphon random graphs: vertex types drawn from the part weights."""

    u: StepGraphon

    def label(self):
        return "wrandom"


# ---------------------------------------------------------------------------
# exact density laws via binomial tails and log-space convolution


def _binomial_logpmf(m, p):
    """Vector of log P(Bin(m, p) = k) for k = 0..m, exact at p in {0, 1}."""
    k = np.arange(m + 1)
    if p <= 0.0:
        out = np.full(m + 1, -np.inf)
        out[0] = 0.0
        return out
    if p >= 1.0:
        out = np.full(m + 1, -np.inf)
        out[m] = 0.0
        return out
    return (
        gammaln(m + 1) - gammaln(k + 1) - gammaln(m - k + 1)
        + k * math.log(p) + (m - k) * math.log1p(-p)
    )


def binomial_tail_logprob(m, p, k_min):
    """log P(Bin(m, p) >= k_min); exact 0.0 when k_min <= 0, -inf past m."""
    if k_min <= 0:
        return 0.0
    if k_min > m:
        return -math.inf
    logpmf = _binomial_logpmf(m, p)
    tail = logpmf[k_min:]
    if np.all(np.isneginf(tail)):
        return -math.inf
    return float(logsumexp(tail))


def _log_convolve(la, lb):
    """Log-space convolution of two log-mass vectors."""
    out = np.full(la.size + lb.size - 1, -np.inf)
    for i in range(la.size):
        if np.isneginf(la[i]):
            continue
        seg = out[i : i + lb.size]
        np.logaddexp(seg, la[i] + lb, out=seg)
    return out


def _pair_classes(counts, p):
    """Pair probabilities grouped by value: list of (prob, multiplicity).

    Covers all n(n-1)/2 unordered pairs of a block layout: within-block
    pairs of block i have probability p[i,i], cross pairs p[i,j].
    """
    a = np.asarray(counts, dtype=int)
    k = a.size
    classes = {}
    for i in range(k):
        m_ii = a[i] * (a[i] - 1) // 2
        if m_ii:
            classes[float(p[i, i])] = classes.get(float(p[i, i]), 0) + int(m_ii)
        for j in range(i + 1, k):
            m_ij = a[i] * a[j]
            if m_ij:
                classes[float(p[i, j])] = classes.get(float(p[i, j]), 0) + int(m_ij)
    return sorted(classes.items())


def _edge_count_logdist(classes):
    """Log distribution of the total edge count across independent classes."""
    dist = np.zeros(1)
    cost = 0
    for prob, mult in classes:
        cost += dist.size * (mult + 1)
        if cost > _CONVOLVE_BUDGET:
            raise ValueError("edge-count distribution too large to convolve exactly")
        dist = _log_convolve(dist, _binomial_logpmf(mult, prob))
    return dist


def density_logprob_block(counts, p, event: EventSpec):
    """Exact log probability of a density event under a block model.

    The edge count is a sum of independent binomials (one per distinct pair
    probability); its distribution is convolved exactly in log space and the
    tail is summed over precisely the counts whose float density passes the
    event's comparison.
    """
    if not event.is_density:
        raise ValueError("density_logprob_block needs a density event")
    a = np.asarray(counts, dtype=int)
    n = int(a.sum())
    total_pairs = n * (n - 1) // 2
    if total_pairs == 0:
        raise ValueError("density events need at least two vertices")
    classes = _pair_classes(a, np.asarray(p, dtype=float))
    if len(classes) == 1:
        # single probability: plain binomial tail, no convolution
        prob, mult = classes[0]
        passing = [
            e for e in range(mult + 1) if event.check_density(e / total_pairs)
        ]
        if not passing:
            return -math.inf
        # density is monotone in e, so the passing set is a contiguous range
        logpmf = _binomial_logpmf(mult, prob)
        return float(logsumexp(logpmf[passing]))
    dist = _edge_count_logdist(classes)
    keep = [
        e for e in range(dist.size) if event.check_density(e / total_pairs)
    ]
    if not keep:
        return -math.inf
    vals = dist[keep]
    if np.all(np.isneginf(vals)):
        return -math.inf
    return float(logsumexp(vals))


# ---------------------------------------------------------------------------
# exact general events by enumerating edge subsets


def exact_event_logprob_block(counts, p, event: EventSpec):
    """Exact log probability of an event under a block model.

    Density events go through the closed-form edge-count distribution.  Any
    other event enumerates all subsets of the undetermined pairs (those with
    probability strictly between 0 and 1; pairs at 0 or 1 are fixed), so it
    is only usable while the undetermined pair count stays at most 21.
    """
    if event.is_density:
        return density_logprob_block(counts, p, event)
    a = np.asarray(counts, dtype=int)
    n = int(a.sum())
    types = np.repeat(np.arange(a.size), a)
    iu, ju = np.triu_indices(n, k=1)
    q = np.asarray(p, dtype=float)[types[iu], types[ju]]
    forced_on = q >= 1.0
    free = (q > 0.0) & (q < 1.0)
    f = int(free.sum())
    if f > ENUM_FREE_LIMIT:
        raise ValueError(
            "event enumeration needs at most %d undetermined pairs, got %d"
            % (ENUM_FREE_LIMIT, f)
        )
    base_edges = [(int(s), int(t)) for s, t in zip(iu[forced_on], ju[forced_on])]
    free_pairs = [(int(s), int(t)) for s, t in zip(iu[free], ju[free])]
    logq = np.log(q[free])
    log1mq = np.log1p(-q[free])

    total = -math.inf
    for start in range(0, 1 << f, _ENUM_CHUNK):
        stop = min(start + _ENUM_CHUNK, 1 << f)
        idx = np.arange(start, stop, dtype=np.int64)
        bits = (idx[:, None] >> np.arange(f)[None, :]) & 1
        logp_masks = bits @ logq + (1 - bits) @ log1mq
        for row in range(idx.size):
            edges = list(base_edges)
            edges.extend(fp for fp, bit in zip(free_pairs, bits[row]) if bit)
            if event.check_graph(LabeledGraph(n, edges)):
                total = np.logaddexp(total, logp_masks[row])
    return float(total)


def exact_event_logprob_wrandom(n, u: StepGraphon, event: EventSpec):
    """Exact log probability under the step-graphon law, by conditioning.

    The vertex-type vector is multinomial; conditioned on the per-part
    counts the graph is exactly the block model with those counts, so the
    law is the multinomial mixture of block laws and the probability is the
    corresponding convex combination, evaluated term by term.
    """
    w = u.parts.weights
    m = w.size
    logw = np.where(w > 0.0, np.log(np.where(w > 0.0, w, 1.0)), -np.inf)
    terms = []
    for comp in _simplex_grid(m, n):
        a = np.asarray(comp, dtype=int)
        if np.any((a > 0) & (w <= 0.0)):
            continue
        log_mult = float(gammaln(n + 1) - gammaln(a + 1).sum() + (a * np.where(a > 0, logw, 0.0)).sum())
        log_cond = exact_event_logprob_block(a, u.values, event)
        if log_cond != -math.inf:
            terms.append(log_mult + log_cond)
    if not terms:
        return -math.inf
    return float(logsumexp(np.asarray(terms)))


# ---------------------------------------------------------------------------
# sampling estimators


Estimate = dict  # alias kept for readability of return annotations


def _estimate(logprob, stderr_log, samples, hits, method):
    return {
        "logprob": logprob,
        "stderrLog": stderr_log,
        "samples": samples,
        "hits": hits,
        "method": method,
    }


def mc_event_logprob(draw, event: EventSpec, num_samples, seed):
    """Plain Monte Carlo: log of the hit fraction over num_samples draws.

    ``draw`` maps a numpy Generator to a LabeledGraph.  The standard error
    of the log estimate uses the delta method, sqrt((1 - f) / (f N)); with
    zero hits the log probability is -inf and the error infinite.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be positive")
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(num_samples):
        if event.check_graph(draw(rng)):
            hits += 1
    if hits == 0:
        return _estimate(-math.inf, math.inf, num_samples, 0, "mc")
    f = hits / num_samples
    stderr = math.sqrt((1.0 - f) / (f * num_samples))
    return _estimate(math.log(f), stderr, num_samples, hits, "mc")


def tilted_density_logprob_block(counts, p, event: EventSpec, num_samples, seed):
    """Importance sampling of a density event by tilting the edge coins.

    Every undetermined pair class is re-weighted to succeed with the target
    density r, which makes the event typical under the proposal; the
    estimator averages the likelihood ratios over proposal samples that hit.
    Only the per-class edge counts matter, so they are drawn directly as
    binomials (the likelihood ratio is a function of those counts alone,
    making this estimator identical in law to tilting individual edges).
    Returns the log estimate with a log-scale delta-method standard error.
    """
    if not event.is_density:
        raise ValueError("tilted sampling handles density events only")
    if num_samples < 1:
        raise ValueError("num_samples must be positive")
    a = np.asarray(counts, dtype=int)
    n = int(a.sum())
    total_pairs = n * (n - 1) // 2
    if total_pairs == 0:
        raise ValueError("density events need at least two vertices")
    r = float(event.r)
    classes = _pair_classes(a, np.asarray(p, dtype=float))
    forced_on = sum(mult for prob, mult in classes if prob >= 1.0)
    free = [(prob, mult) for prob, mult in classes if 0.0 < prob < 1.0]

    if not free or r <= 0.0 or r >= 1.0:
        # the edge count distribution is degenerate or the tilt target sits
        # on the boundary; fall back to the exact closed form
        val = density_logprob_block(a, p, event)
        return _estimate(val, 0.0, 0, 0, "exact")

    rng = np.random.default_rng(seed)
    logw = np.zeros(num_samples)
    total = np.full(num_samples, forced_on, dtype=np.int64)
    for prob, mult in free:
        e = rng.binomial(mult, r, size=num_samples)
        total += e
        logw += e * math.log(prob / r) + (mult - e) * (
            math.log1p(-prob) - math.log1p(-r)
        )
    dens = total / total_pairs
    hit = (dens >= r) if event.kind == "density-ge" else (dens <= r)
    hits = int(hit.sum())
    if hits == 0:
        return _estimate(-math.inf, math.inf, num_samples, 0, "tilted")
    lw = logw[hit]
    l1 = float(logsumexp(lw)) - math.log(num_samples)
    l2 = float(logsumexp(2.0 * lw)) - math.log(num_samples)
    rel_var = max(math.exp(l2 - 2.0 * l1) - 1.0, 0.0)
    stderr = math.sqrt(rel_var / num_samples)
    return _estimate(l1, stderr, num_samples, hits, "tilted")


# ---------------------------------------------------------------------------
# rate predictions and the size sweep


def gnp_density_rate(p, r, kind="density-ge"):
    """Limiting normalized decay rate of a density event: h_p(r) / 2.

    Zero when the event is typical (the threshold sits on the likely side
    of p); the relative-entropy cost halves because there are n^2 / 2
    pairs at speed n^2.
    """
    if kind == "density-ge":
        if r <= p:
            return 0.0
    elif kind == "density-le":
        if r >= p:
            return 0.0
    else:
        raise ValueError("rate predictions cover density events only")
    return 0.5 * rel_entropy(p, r)


def _free_pair_count(counts, p):
    a = np.asarray(counts, dtype=int)
    return sum(mult for prob, mult in _pair_classes(a, p) if 0.0 < prob < 1.0)


CurvePoint = dict


def _curve_point(n, speed, est):
    logprob = est["logprob"]
    normalized = (-logprob / speed) if speed > 0 else math.nan
    return {
        "n": int(n),
        "speed": int(speed),
        "logprob": logprob,
        "normalized": normalized,
        "stderrLog": est["stderrLog"],
        "samples": est["samples"],
        "hits": est["hits"],
        "method": est["method"],
    }


def ldp_curve(family, event: EventSpec, n_values, method="auto",
              num_samples=10000, seed=0):
    """Sweep graph sizes and measure -log P(event) / speed at each size.

    ``method`` is "auto", "exact", "enum", "tilted", or "mc".  Auto picks
    the exact closed form for density events whenever the convolution fits
    the budget, falling back to tilted importance sampling; ball events
    enumerate edge subsets while they fit and switch to Monte Carlo above
    that.  The speed is the squared vertex count.  Each point derives its
    own generator seed, so curves are reproducible end to end.
    """
    base = list(seed) if isinstance(seed, (list, tuple)) else [seed]
    points = []
    for idx, n in enumerate(n_values):
        n = int(n)
        point_seed = base + [idx]
        if isinstance(family, WRandomFamily):
            est = _wrandom_point(family.u, n, event, method, num_samples, point_seed)
            speed = n * n
        else:
            counts, pmat = family.counts_for(n)
            est = _block_point(counts, pmat, event, method, num_samples, point_seed)
            speed = int(counts.sum()) ** 2
        points.append(_curve_point(n, speed, est))
    return points


def _block_point(counts, pmat, event, method, num_samples, seed):
    if method == "auto":
        if event.is_density:
            try:
                return _estimate(density_logprob_block(counts, pmat, event), 0.0, 0, 0, "exact")
            except ValueError:
                return tilted_density_logprob_block(counts, pmat, event, num_samples, seed)
        if _free_pair_count(counts, pmat) <= 16:
            return _estimate(exact_event_logprob_block(counts, pmat, event), 0.0, 0, 0, "enum")
        draw = lambda rng: sample_block(counts, pmat, rng)
        return mc_event_logprob(draw, event, num_samples, seed)
    if method == "exact":
        return _estimate(density_logprob_block(counts, pmat, event), 0.0, 0, 0, "exact")
    if method == "enum":
        return _estimate(exact_event_logprob_block(counts, pmat, event), 0.0, 0, 0, "enum")
    if method == "tilted":
        return tilted_density_logprob_block(counts, pmat, event, num_samples, seed)
    if method == "mc":
        draw = lambda rng: sample_block(counts, pmat, rng)
        return mc_event_logprob(draw, event, num_samples, seed)
    raise ValueError("unknown method %r" % (method,))


def _wrandom_point(u, n, event, method, num_samples, seed):
    if method in ("exact", "enum"):
        return _estimate(exact_event_logprob_wrandom(n, u, event), 0.0, 0, 0, "exact")
    if method == "tilted":
        raise ValueError("tilted sampling requires a fixed block layout")
    if method in ("auto", "mc"):
        if method == "auto" and event.is_density and _wrandom_exact_ok(u, n, event):
            return _estimate(exact_event_logprob_wrandom(n, u, event), 0.0, 0, 0, "exact")
        draw = lambda rng: sample_wrandom(n, u, rng).graph
        return mc_event_logprob(draw, event, num_samples, seed)
    raise ValueError("unknown method %r" % (method,))


def _wrandom_exact_ok(u, n, event):
    m = u.parts.size
    mixture_terms = math.comb(n + m - 1, m - 1)
    return mixture_terms <= 3000 and n <= 40
