#!/usr/bin/env python3
# Cone complexes and the subdivision engine: stellar insertion, hyperplane
# arrangements, common refinements, and the union-of-cones test that decides
# when a conical subset needs a subdivision at all.

from tropgeom import (
    ConicalSubset,
    cone_from_generators,
    complex_from_fan,
    common_refinement,
    hyperplane_refine,
    is_union_of_cones,
    stellar_subdivide,
)
from tropgeom.linalg import identity_matrix

# the positive orthant in rank 3 as a complex (all faces, identity gluing)
orthant = cone_from_generators(identity_matrix(3), 3)
cx, ids = complex_from_fan([orthant], 3)
top = ids[orthant.rays]
print("cones in the orthant complex:", len(cx.cones))

# the diagonal ray is a conical subset but not a union of cones: the witness
# is a relative interior point covered only by the big cell
diag = cone_from_generators([(1, 1, 1)], 3)
subset = ConicalSubset(cx, ((top, diag),))
check = is_union_of_cones(cx, subset)
print("diagonal is a union of cones:", check.ok)
print("witness point:", check.witnesses[0][2])

# stellar subdivision at the diagonal fixes it: the three cells around the
# new ray replace the orthant
sub = stellar_subdivide(cx, top, (1, 1, 1))
print("maximal cells after stellar:",
      [c.cone.rays for c in sub.max_cells_over(top)])
moved = sub.transport(subset)
print("diagonal after subdivision:", is_union_of_cones(sub.refined, moved).ok)

# hyperplane refinement slices by an arrangement; the three covectors below
# cut the orthant into the six orderings of the coordinates
braid = hyperplane_refine(cx, {top: [(1, -1, 0), (0, 1, -1), (1, 0, -1)]})
print("chambers of the ordering arrangement:", len(braid.max_cells_over(top)))

# common refinement of two subdivisions intersects their cells
quad = cone_from_generators(identity_matrix(2), 2)
cx2, ids2 = complex_from_fan([quad], 2)
top2 = ids2[quad.rays]
s1 = hyperplane_refine(cx2, {top2: [(1, -1)]})
s2 = hyperplane_refine(cx2, {top2: [(1, -2)]})
both = common_refinement(s1, s2)
print("common refinement cells:",
      [c.cone.rays for c in both.max_cells_over(top2)])
