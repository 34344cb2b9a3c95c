import random
from fractions import Fraction

import pytest

from conftest import moduli_cached
from tropgeom import exactgeom as eg
from tropgeom import linalg as la
from tropgeom.complexes import validate_complex, validate_morphism
from tropgeom.curves import DualGraph
from tropgeom.tropmaps import (
    ContactData,
    IncompatibleStabilizations,
    RubberMapType,
    build_map_complex,
    canonical_type,
    cycle_equations,
    enumerate_rubber_types,
    enumerate_rubber_types_bruteforce,
    fiber_product_cone,
    forgetful_image,
    has_consistent_heights,
    is_balanced,
    moduli_cone,
    superimpose,
)

THETA22 = DualGraph((0, 0), ((0, 1), (0, 1), (0, 1)), (0, 1))
FIG1 = RubberMapType(THETA22, ((-1, -1, -1),), ContactData(2, ((3, -3),)))


class TestContactData:
    def test_degree(self):
        c = ContactData(1, ((2, -1, -1), (1, -1, 0)))
        assert c.degree(0) == 2 and c.degree(1) == 1

    def test_rejects_nonzero_sum(self):
        with pytest.raises(ValueError):
            ContactData(0, ((1, 1),))


class TestBalancingAndHeights:
    def test_figure_one_type_balanced(self):
        assert is_balanced(FIG1)
        assert has_consistent_heights(FIG1)

    def test_unbalanced(self):
        t = RubberMapType(THETA22, ((1, 1, -1),), ContactData(2, ((3, -3),)))
        assert not is_balanced(t)

    def test_positive_loop_is_inconsistent(self):
        loop = DualGraph((1,), ((0, 0),), (0, 0))
        t = RubberMapType(loop, ((1,),), ContactData(2, ((0, 0),)))
        assert not has_consistent_heights(t)
        assert moduli_cone(t).degenerate

    def test_opposite_banana_cycle_is_inconsistent(self):
        banana = DualGraph((0, 0), ((0, 1), (0, 1)), (0, 0))
        t = RubberMapType(banana, ((1, -1),), ContactData(1, ((1, -1),)))
        assert is_balanced(t)
        assert not has_consistent_heights(t)


class TestCycleEquations:
    def test_tree_has_no_equations(self):
        tree = DualGraph((1, 1), ((0, 1),), (0, 1))
        t = RubberMapType(tree, ((0,),), ContactData(2, ((0, 0),)))
        assert cycle_equations(t) == ()

    def test_theta_forces_equal_lengths(self):
        mc = moduli_cone(FIG1)
        assert mc.cone.rays == ((1, 1, 1),)
        assert mc.cone.dim == 1

    def test_banana_weighted_lengths(self):
        banana = DualGraph((0, 0), ((0, 1), (0, 1)), (0, 1))
        t = RubberMapType(banana, ((-1, -3),), ContactData(1, ((4, -4),)))
        assert is_balanced(t)
        rows = cycle_equations(t)
        assert len(rows) == 1
        mc = moduli_cone(t)
        assert mc.cone.rays == ((3, 1),)

    def test_dimension_formula(self):
        for contact in [ContactData(1, ((2, -2),)), ContactData(1, ((1, -1, 0),))]:
            for t in enumerate_rubber_types(contact):
                mc = moduli_cone(t)
                assert mc.cone.dim == t.graph.num_edges - la.rank(mc.equations)

    def test_heights_path_independent_on_samples(self, rng):
        # rebuild heights from a root along two spanning trees and compare
        for t in enumerate_rubber_types(ContactData(1, ((2, -2),))):
            mc = moduli_cone(t)
            for p in eg.sample_points(mc.cone, 5, rng):
                heights = _heights_from_lengths(t, p)
                assert heights is not None


def _heights_from_lengths(t, lengths):
    """BFS height reconstruction; None when any cycle disagrees."""
    k = t.graph.num_vertices
    heights = {0: Fraction(0)}
    queue = [0]
    adj = {}
    for i, (u, v) in enumerate(t.graph.edges):
        adj.setdefault(u, []).append((v, i, 1))
        adj.setdefault(v, []).append((u, i, -1))
    while queue:
        x = queue.pop()
        for y, i, d in adj.get(x, ()):  # displacement = slope * length
            disp = d * t.slopes[0][i] * lengths[i]
            if y in heights:
                if heights[y] != heights[x] + disp:
                    return None
            else:
                heights[y] = heights[x] + disp
                queue.append(y)
    return heights


class TestEnumeration:
    @pytest.mark.parametrize(
        "g,n,a",
        [
            (0, 3, (1, -1, 0)),
            (0, 4, (1, -1, 0, 0)),
            (0, 4, (2, -1, -1, 0)),
            (1, 1, (0,)),
            (1, 2, (1, -1)),
            (1, 2, (2, -2)),
            (1, 2, (3, -3)),
        ],
    )
    def test_matches_bruteforce_oracle(self, g, n, a):
        contact = ContactData(g, (a,))
        main = enumerate_rubber_types(contact)
        oracle = enumerate_rubber_types_bruteforce(contact)
        assert len(main) == len(oracle)
        keys = {
            (t.graph.genera, t.graph.edges, t.graph.legs, t.slopes) for t in main
        }
        for t in oracle:
            ct, _, _, _ = canonical_type(t)
            assert (ct.graph.genera, ct.graph.edges, ct.graph.legs, ct.slopes) in keys

    def test_smooth_only_on_minimal_marked_rational_curve(self):
        contact = ContactData(0, ((1, -1, 0),))
        types = enumerate_rubber_types(contact)
        assert len(types) == 1
        assert types[0].graph.num_edges == 0

    def test_figure_one_type_is_enumerated(self):
        contact = ContactData(2, ((3, -3),))
        from tropgeom.tropmaps import balanced_slope_assignments

        found = []
        for slopes in balanced_slope_assignments(THETA22, (3, -3), 3):
            t = RubberMapType(THETA22, (slopes,), contact)
            if has_consistent_heights(t):
                ct, _, _, _ = canonical_type(t)
                if ct not in found:
                    found.append(ct)
        assert len(found) == 1
        assert found[0].slopes == ((-1, -1, -1),)

    def test_balancing_holds_for_everything_enumerated(self):
        for contact in [ContactData(1, ((2, -2),)), ContactData(0, ((2, -1, -1, 0),))]:
            for t in enumerate_rubber_types(contact):
                assert is_balanced(t)
                assert has_consistent_heights(t)


class TestForgetfulImage:
    def test_figure_one_diagonal_ray(self):
        stable, img = forgetful_image(FIG1)
        assert stable == THETA22
        assert img.rays == ((1, 1, 1),)

    def test_smooth_type_zero_cone(self):
        smooth = RubberMapType(
            DualGraph((1,), (), (0, 0)), ((),), ContactData(1, ((1, -1),))
        )
        _, img = forgetful_image(smooth)
        assert img.is_zero()

    def test_banana_ray_in_banana_cone(self):
        banana = DualGraph((0, 0), ((0, 1), (0, 1)), (0, 1))
        t = RubberMapType(banana, ((-1, -3),), ContactData(1, ((4, -4),)))
        stable, img = forgetful_image(t)
        assert stable == banana
        assert img.rays == ((3, 1),)


class TestSuperimpose:
    EDGE = DualGraph((1, 1), ((0, 1),), (0, 1))
    CHAIN = DualGraph((1, 0, 1), ((0, 1), (1, 2)), (0, 2))
    A = ContactData(3, ((1, -1),))
    ZERO = ContactData(3, ((0, 0),))

    def test_trivial_second_factor(self):
        tx = RubberMapType(self.EDGE, ((-1,),), self.A)
        ty = RubberMapType(self.EDGE, ((0,),), self.ZERO)
        prods = superimpose(tx, ty)
        assert len(prods) == 1
        assert prods[0].map_type.graph == self.EDGE
        assert prods[0].map_type.slopes == ((-1,), (0,))

    def test_same_single_edge_type(self):
        tx = RubberMapType(self.EDGE, ((-1,),), self.A)
        prods = superimpose(tx, tx)
        assert len(prods) == 1
        assert prods[0].map_type.graph.num_vertices == 2

    def test_chain_against_edge_distributes_slope(self):
        tx = RubberMapType(self.CHAIN, ((-1, -1),), self.A)
        ty = RubberMapType(self.EDGE, ((-2,),), ContactData(3, ((2, -2),)))
        prods = superimpose(tx, ty)
        assert len(prods) == 1
        p = prods[0]
        assert p.map_type.graph.num_edges == 2
        assert sorted(map(abs, p.map_type.slopes[1])) == [2, 2]

    def test_union_is_fiber_product_with_disjoint_interiors(self, rng):
        tx = RubberMapType(self.CHAIN, ((-1, -1),), self.A)
        ty = RubberMapType(self.CHAIN, ((0, 0),), self.ZERO)
        prods = superimpose(tx, ty)
        assert len(prods) == 2
        fiber = fiber_product_cone(tx, ty)
        images = [eg.image_cone(p.embed, p.cone) for p in prods]
        for img in images:
            assert fiber.contains_cone(img)
        from tropgeom.subdivision import cones_cover_exactly

        ok, _ = cones_cover_exactly(fiber, images)
        assert ok
        for i in range(len(images)):
            for j in range(i + 1, len(images)):
                assert not eg.relints_intersect(images[i], images[j])

    def test_incompatible_stabilizations(self):
        tx = RubberMapType(self.EDGE, ((-1,),), self.A)
        other = RubberMapType(
            DualGraph((1, 2), ((0, 1),), (0, 1)), ((-1,),), self.A
        )
        with pytest.raises(IncompatibleStabilizations):
            superimpose(tx, other)


class TestMapComplex:
    def test_single_tree_type_orthant(self):
        base = moduli_cached(1, 2)
        contact = ContactData(1, ((0, 0),))
        bridge = DualGraph((0, 1), ((0, 1),), (0, 0))
        t = RubberMapType(bridge, ((0,),), contact)
        mx = build_map_complex([t], base)
        assert validate_complex(mx.complex, deep=True) == []
        top = [cid for cid in mx.complex.ids() if mx.complex.cones[cid].dim == 1]
        assert top

    def test_figure_one_closure(self):
        from tropgeom.curves import build_complex_from_graphs

        base = build_complex_from_graphs([THETA22])
        mx = build_map_complex([FIG1], base)
        assert validate_complex(mx.complex, deep=True) == []
        assert validate_morphism(mx.forgetful) == []
        ray_ids = [
            cid for cid in mx.complex.ids() if mx.complex.cones[cid].dim == 1
        ]
        assert any(
            mx.complex.cones[cid].rays == ((1, 1, 1),) for cid in ray_ids
        )

    def test_full_contact_family_validates(self):
        base = moduli_cached(1, 2)
        contact = ContactData(1, ((2, -2),))
        mx = build_map_complex(enumerate_rubber_types(contact), base)
        assert validate_complex(mx.complex, deep=True) == []
        assert validate_morphism(mx.forgetful) == []

    def test_face_compatible_with_contraction(self):
        # contracting an edge then taking the moduli cone equals the face
        contact = ContactData(1, ((2, -2),))
        for t in enumerate_rubber_types(contact):
            mc = moduli_cone(t)
            for e in range(t.graph.num_edges):
                from tropgeom.tropmaps import _contract_type

                contracted, survivors = _contract_type(t, [e])
                sub_mc = moduli_cone(contracted)
                face = mc.cone.face_at(
                    [tuple(1 if i == e else 0 for i in range(t.graph.num_edges))]
                )
                rows = [[0] * contracted.graph.num_edges for _ in range(t.graph.num_edges)]
                for pos, (orig, _) in enumerate(survivors):
                    rows[orig][pos] = 1
                m = eg.LinearMap(
                    tuple(tuple(r) for r in rows),
                    contracted.graph.num_edges,
                    t.graph.num_edges,
                )
                assert eg.image_cone(m, sub_mc.cone) == face
