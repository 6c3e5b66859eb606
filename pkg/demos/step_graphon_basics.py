"""Step graphons: construction, refinement, stretching, and sampling.

A step graphon is a symmetric [0,1]-valued step function on the unit
square: part weights cut [0,1] into intervals, and a symmetric matrix
assigns one value per pair of intervals.  This walk-through builds a
two-block community model and pokes at the basic operations.
"""

import numpy as np

from stepldp import (
    PartWeights,
    common_refinement,
    edge_density,
    graphon_to_json,
    make_step_graphon,
    overlay_partitions,
    sample_wrandom,
    stretch_pullback,
)

# an assortative two-community model: dense inside, sparse across
u = make_step_graphon([0.3, 0.7], [[0.9, 0.1], [0.1, 0.6]])
print("graphon:", u)
print("part boundaries:", u.parts.boundaries())
print("edge density:", edge_density(u))

# overlaying two partitions yields the coarsest common refinement; each
# piece remembers which source part it came from on both sides
other = PartWeights([0.5, 0.5])
weights, src, tgt = overlay_partitions(u.parts, other)
print("\noverlay with a 50/50 split:")
for w, i, j in zip(weights, src, tgt):
    print("  piece weight %.2f  from part %d and part %d" % (w, i, j))

# the same graphon expressed on the refined partition is the same
# function on the square, so every whole-square statistic survives
v = make_step_graphon([0.5, 0.5], [[0.2, 0.5], [0.5, 0.8]])
parts, vals_u, vals_v = common_refinement(u, v)
refined_u = make_step_graphon(parts, vals_u)
print("refined parts:", parts.weights)
print("edge density preserved:", np.isclose(edge_density(refined_u),
                                            edge_density(u)))

# the stretch pull-back composes the graphon with x -> s*x: only the
# first s-fraction of the square survives, dilated to full size; nearby
# stretch factors give provably nearby graphons, which the distance
# demo exploits
s = stretch_pullback(u, 0.8)
print("\npulled back along x -> 0.8 x:", s.parts.weights)

# drawing a random graph: each vertex gets a uniform position, positions
# pick parts, and pairs become edges by the block value
draw = sample_wrandom(12, u, seed=7)
print("\n12-vertex sample: counts per part", draw.counts,
      "edges", draw.graph.edge_count())
print("adjacency:")
print(draw.graph.adjacency().astype(int))

# everything serializes to plain JSON
print("\nJSON form:", graphon_to_json(u))
