"""Random graph samplers for block models and step graphons.

Both samplers draw edges independently with blockwise probabilities; the
coupled sampler additionally shares the edge coins between two block models
with slightly different block counts, so that the samples agree on a large
common vertex set.  All randomness flows through numpy generators seeded
explicitly; a fixed seed reproduces the exact same graphs.
"""

from collections import namedtuple

import numpy as np

from .graphon import LabeledGraph, StepGraphon

__all__ = [
    "apportion_counts",
    "sample_block",
    "sample_wrandom",
    "coupled_block_sample",
    "alignment_distance_bound",
    "WRandomSample",
    "CoupledPair",
]


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_counts(counts):
    a = np.asarray(counts)
    if a.ndim != 1 or a.size == 0:
        raise ValueError("block counts must form a nonempty vector")
    if not np.issubdtype(a.dtype, np.integer):
        if not np.all(a == np.floor(a)):
            raise ValueError("block counts must be integers")
        a = a.astype(int)
    if np.any(a < 0):
        raise ValueError("block counts must be nonnegative")
    return a.astype(int)


def _check_prob_square(p, k):
    p = np.asarray(p, dtype=float)
    if p.shape != (k, k):
        raise ValueError("probability matrix must be %d x %d" % (k, k))
    if np.abs(p - p.T).max() > 1e-12:
        raise ValueError("probability matrix must be symmetric")
    if p.min() < 0.0 or p.max() > 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    return p


def apportion_counts(n, weights):
    """Integer block counts summing to n, off from n*weights by less than 1.

    Largest-remainder rounding: floors first, then the leftover units go to
    the largest fractional parts (ties broken by block index).
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0 or np.any(w < 0.0) or w.sum() <= 0.0:
        raise ValueError("weights must be a nonnegative vector with positive sum")
    if n < 0:
        raise ValueError("n must be nonnegative")
    target = n * (w / w.sum())
    base = np.floor(target).astype(int)
    leftover = n - int(base.sum())
    if leftover > 0:
        remainders = target - base
        order = np.lexsort((np.arange(w.size), -remainders))
        base[order[:leftover]] += 1
    return base


def sample_block(counts, p, seed):
    """One sample of the block model with the given per-block vertex counts.

    Vertices are laid out block by block (all of block 0 first, then block 1,
    and so on).  Each unordered pair {u, v} gets an independent uniform coin
    and the edge is present iff the coin is strictly below the blockwise
    probability, so probabilities 0 and 1 are exact.
    """
    a = _check_counts(counts)
    k = a.size
    p = _check_prob_square(p, k)
    rng = _as_rng(seed)
    n = int(a.sum())
    types = np.repeat(np.arange(k), a)
    iu, ju = np.triu_indices(n, k=1)
    coins = rng.random(iu.size)
    probs = p[types[iu], types[ju]]
    hit = coins < probs
    edges = [(int(s), int(t)) for s, t in zip(iu[hit], ju[hit])]
    return LabeledGraph(n, edges)


WRandomSample = namedtuple("WRandomSample", ["graph", "counts"])


def sample_wrandom(n, u: StepGraphon, seed):
    """One n-vertex sample of the step-graphon random graph.

    Each vertex first draws a uniform position that selects its part (the
    dividing points belong to the part on their right); each unordered pair
    then draws an independent coin and the edge appears iff the coin is
    strictly below the value of the graphon at the two parts.  Returns the
    graph together with the per-part vertex counts.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = _as_rng(seed)
    m = u.parts.size
    boundaries = np.cumsum(u.parts.weights)
    x = rng.random(n)
    types = np.minimum(np.searchsorted(boundaries, x, side="right"), m - 1)
    iu, ju = np.triu_indices(n, k=1)
    coins = rng.random(iu.size)
    probs = u.values[types[iu], types[ju]]
    hit = coins < probs
    edges = [(int(s), int(t)) for s, t in zip(iu[hit], ju[hit])]
    counts = np.bincount(types, minlength=m)
    return WRandomSample(LabeledGraph(n, edges), counts)


def alignment_distance_bound(counts_a, counts_b):
    """Cut-distance bound certified by aligning two block-count vectors.

    With A the aligned share of the first graph's vertices and B of the
    second, the two empirical graphons each sit within 2(1/share - 1) of the
    common aligned pattern, giving the bound
    2(1/s_a - 1) + 2(1/s_b - 1).  Infinite when nothing aligns.
    """
    a = _check_counts(counts_a)
    b = _check_counts(counts_b)
    if a.size != b.size:
        raise ValueError("count vectors must have the same number of blocks")
    na, nb = int(a.sum()), int(b.sum())
    common = int(np.minimum(a, b).sum())
    if common == 0 or na == 0 or nb == 0:
        return float("inf")
    s_a = common / na
    s_b = common / nb
    return 2.0 * (1.0 / s_a - 1.0) + 2.0 * (1.0 / s_b - 1.0)


CoupledPair = namedtuple(
    "CoupledPair",
    ["graph_a", "graph_b", "aligned_a", "aligned_b", "epsilon", "bound"],
)


def coupled_block_sample(counts_a, counts_b, p, seed):
    """Sample two block models so they agree on a large common vertex set.

    Within each block, the first min(a_i, b_i) vertices of the two graphs are
    paired off in index order; every pair of aligned vertices uses one shared
    coin in both graphs, and since paired vertices carry the same block label
    the two edge indicators coincide, making the induced subgraphs on the
    aligned sets equal under the pairing (this is verified before returning).
    All remaining pairs draw independent coins per graph.

    epsilon is the count discrepancy |a - b|_1 / min(|a|_1, |b|_1); bound is
    the certified cut-distance bound between the two empirical graphons from
    the aligned shares (at most 4 eps / (1 - eps) when eps < 1).
    """
    a = _check_counts(counts_a)
    b = _check_counts(counts_b)
    if a.size != b.size:
        raise ValueError("count vectors must have the same number of blocks")
    k = a.size
    p = _check_prob_square(p, k)
    na, nb = int(a.sum()), int(b.sum())
    if na == 0 or nb == 0:
        raise ValueError("both graphs need at least one vertex")

    off_a = np.concatenate([[0], np.cumsum(a)])
    off_b = np.concatenate([[0], np.cumsum(b)])
    common = np.minimum(a, b)
    aligned_a = np.concatenate(
        [np.arange(off_a[i], off_a[i] + common[i]) for i in range(k)]
    ).astype(int)
    aligned_b = np.concatenate(
        [np.arange(off_b[i], off_b[i] + common[i]) for i in range(k)]
    ).astype(int)
    c = aligned_a.size

    ss = np.random.SeedSequence(seed)
    s_shared, s_a, s_b = ss.spawn(3)
    rng_shared = np.random.default_rng(s_shared)

    def build(counts, aligned, rng):
        n = int(counts.sum())
        types = np.repeat(np.arange(k), counts)
        iu, ju = np.triu_indices(n, k=1)
        coins = rng.random(iu.size)
        if c > 1:
            # overwrite the aligned-pair coins with the shared draw; the
            # shared coins are indexed by aligned positions in row-major
            # upper-triangular order, identical for both graphs
            pos = np.full(n, -1, dtype=int)
            pos[aligned] = np.arange(c)
            pi, pj = pos[iu], pos[ju]
            both = (pi >= 0) & (pj >= 0)
            # row-major rank of the pair (s, t), s < t, among c(c-1)/2 pairs
            s_idx = pi[both]
            t_idx = pj[both]
            rank = s_idx * (2 * c - s_idx - 1) // 2 + (t_idx - s_idx - 1)
            coins[both] = shared_coins[rank]
        probs = p[types[iu], types[ju]]
        hit = coins < probs
        edges = [(int(s), int(t)) for s, t in zip(iu[hit], ju[hit])]
        return LabeledGraph(n, edges)

    shared_coins = rng_shared.random(c * (c - 1) // 2) if c > 1 else np.empty(0)
    g_a = build(a, aligned_a, np.random.default_rng(s_a))
    g_b = build(b, aligned_b, np.random.default_rng(s_b))

    if c > 1:
        sub_a = g_a.adjacency()[np.ix_(aligned_a, aligned_a)]
        sub_b = g_b.adjacency()[np.ix_(aligned_b, aligned_b)]
        if not np.array_equal(sub_a, sub_b):
            raise RuntimeError("aligned subgraphs disagree; coupling is broken")

    diff = int(np.abs(a - b).sum())
    epsilon = diff / min(na, nb)
    bound = alignment_distance_bound(a, b)
    return CoupledPair(
        graph_a=g_a,
        graph_b=g_b,
        aligned_a=aligned_a,
        aligned_b=aligned_b,
        epsilon=epsilon,
        bound=bound,
    )
