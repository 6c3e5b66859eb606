"""Cut norms and cut distances between step graphons.

The cut norm of a signed step function is the largest absolute integral
over a product of measurable sets; the cut distance between two graphons
is the cut norm of their difference, minimized over measure-preserving
rearrangements.  The library computes the norm exactly (enumeration over
part subsets), cheaply (alternating heuristic), and searches couplings
for the distance.
"""

import numpy as np

from stepldp import (
    PartWeights,
    SignedStepFn,
    aligned_cut_distance,
    cut_distance_search,
    cut_norm_alternating,
    cut_norm_exact,
    graph_cut_distance_exact,
    make_step_graphon,
    sample_block,
)

# the checkerboard function: +1 and -1 on the four quadrants.  Its cut
# norm is 1/4, witnessed by taking one quadrant as the box; any larger
# box starts absorbing mass of the opposite sign.
checker = SignedStepFn(PartWeights([0.5, 0.5]),
                       np.array([[1.0, -1.0], [-1.0, 1.0]]))
print("checkerboard cut norm (exact):      ", cut_norm_exact(checker))
print("checkerboard cut norm (alternating):",
      cut_norm_alternating(checker, restarts=32, seed=0))

# the heuristic hits the exact value on random instances too
rng = np.random.default_rng(1)
worst = 0.0
for trial in range(50):
    m = int(rng.integers(1, 8))
    vals = rng.uniform(-1, 1, (m, m))
    f = SignedStepFn(PartWeights(rng.dirichlet(np.ones(m))), (vals + vals.T) / 2)
    worst = max(worst, abs(cut_norm_exact(f)
                           - cut_norm_alternating(f, restarts=32, seed=trial)))
print("worst gap over 50 random functions: %.2e" % worst)

# cut distance: relabelling the blocks moves a graphon far in the aligned
# metric but nowhere in the rearrangement-invariant one
u = make_step_graphon([0.5, 0.5], [[0.9, 0.1], [0.1, 0.6]])
v = make_step_graphon([0.5, 0.5], [[0.6, 0.1], [0.1, 0.9]])  # blocks swapped
print("\naligned distance (identity overlay):", aligned_cut_distance(u, v))
est = cut_distance_search(u, v, restarts=32, seed=0)
print("searched distance upper bound:       %.3g" % est.upper)
print("coupling witness (rows: parts of u, cols: parts of v):")
print(np.array(est.to_json()["witness"]))

# for small graphs the distance minimized over vertex bijections is
# computable outright; it upper-bounds the graphon distance, where
# fractional overlaps are also allowed
g = sample_block([3, 3], np.array([[1.0, 0.0], [0.0, 1.0]]), seed=0)
h = sample_block([6], np.array([[0.0]]), seed=0)
print("\ntwo triangles vs empty graph, exact over permutations:",
      "%.4f" % graph_cut_distance_exact(g, h))
