import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_cone
from tropgeom import exactgeom as eg
from tropgeom import linalg as la


class TestConeFromGenerators:
    def test_gcd_reduction_of_orthant(self):
        c = eg.cone_from_generators([(2, 0), (0, 4)])
        assert c.rays == ((0, 1), (1, 0))

    def test_diagonal_ray_in_rank_3(self):
        c = eg.cone_from_generators([(1, 1, 1)], 3)
        assert c.rays == ((1, 1, 1),)
        assert c.dim == 1

    def test_redundant_middle_generator(self):
        c = eg.cone_from_generators([(1, 0), (1, 1), (0, 1)])
        assert c.rays == ((0, 1), (1, 0))

    def test_not_pointed(self):
        with pytest.raises(eg.NotPointed):
            eg.cone_from_generators([(1, 0), (-1, 0)])

    def test_rank_mismatch(self):
        with pytest.raises(eg.RankMismatch):
            eg.cone_from_generators([(1, 0), (1, 1, 0)])

    def test_roundtrip_random(self, rng):
        for _ in range(80):
            c = random_cone(rng, rng.randint(1, 4), rng.randint(1, 5))
            assert eg.cone_from_generators(c.rays, c.ambient_rank) == c


class TestDualDescription:
    def test_orthant(self):
        c = eg.cone_from_generators([(1, 0), (0, 1)])
        assert eg.dual_description(c) == [(0, 1), (1, 0)]

    def test_one_dimensional_cone(self):
        c = eg.cone_from_generators([(1, 2)], 2)
        assert c.span_eqs == ((2, -1),)
        assert len(c.facets) == 1
        r = c.rays[0]
        assert la.dot(c.facets[0], r) > 0

    def test_three_dim_against_oracle(self):
        c = eg.cone_from_generators([(1, 0, 0), (0, 1, 0), (1, 1, 1)])
        assert sorted(c.facets) == eg.facets_bruteforce(c)

    def test_random_against_oracle(self, rng):
        for _ in range(60):
            c = random_cone(rng, rng.randint(1, 4), rng.randint(1, 5))
            assert sorted(c.facets) == eg.facets_bruteforce(c)


class TestMembership:
    def test_duality_on_samples(self, rng):
        for _ in range(40):
            c = random_cone(rng, rng.randint(1, 4), rng.randint(1, 4))
            for p in eg.sample_points(c, 6, rng):
                assert c.contains(p)
            for _ in range(6):
                x = tuple(rng.randint(-5, 5) for _ in range(c.ambient_rank))
                assert c.contains(x) == eg.contains_bruteforce(c, x)

    def test_zero_cone(self):
        z = eg.zero_cone(3)
        assert z.contains((0, 0, 0))
        assert not z.contains((1, 0, 0))
        assert z.is_face_of(eg.cone_from_generators([(1, 0, 0)], 3))


class TestIntersect:
    def test_idempotent_on_orthant(self):
        c = eg.cone_from_generators([(1, 0), (0, 1)])
        assert eg.intersect(c, c) == c

    def test_diagonal_meets_face_in_zero(self):
        diag = eg.cone_from_generators([(1, 1, 1)], 3)
        face = eg.cone_from_generators([(1, 0, 0), (0, 1, 0)], 3)
        assert eg.intersect(diag, face).is_zero()

    def test_two_wedges_share_a_ray(self):
        a = eg.cone_from_generators([(1, 0), (1, 1)])
        b = eg.cone_from_generators([(1, 1), (0, 1)])
        assert eg.intersect(a, b).rays == ((1, 1),)

    def test_commutative_associative(self, rng):
        for _ in range(40):
            n = rng.randint(1, 4)
            a = random_cone(rng, n, rng.randint(1, 4))
            b = random_cone(rng, n, rng.randint(1, 4))
            c = random_cone(rng, n, rng.randint(1, 4))
            assert eg.intersect(a, b) == eg.intersect(b, a)
            assert eg.intersect(eg.intersect(a, b), c) == eg.intersect(
                a, eg.intersect(b, c)
            )


class TestImageCone:
    def test_identity(self):
        c = eg.cone_from_generators([(1, 0), (0, 1)])
        assert eg.image_cone(eg.LinearMap.identity(2), c) == c

    def test_projection_of_orthant(self):
        c = eg.cone_from_generators(la.identity_matrix(3), 3)
        f = eg.LinearMap(((1, 0, 0), (0, 1, 0)), 3, 2)
        assert eg.image_cone(f, c) == eg.cone_from_generators([(1, 0), (0, 1)])

    def test_chain_merge_map(self):
        f = eg.LinearMap(((1, 1),), 2, 1)
        c = eg.cone_from_generators([(1, 0), (0, 1)])
        assert eg.image_cone(f, c).rays == ((1,),)

    def test_set_image_on_samples(self, rng):
        for _ in range(30):
            n, m = rng.randint(1, 4), rng.randint(1, 4)
            c = random_cone(rng, n, rng.randint(1, 4))
            mat = tuple(tuple(rng.randint(-2, 2) for _ in range(n)) for _ in range(m))
            f = eg.LinearMap(mat, n, m)
            try:
                img = eg.image_cone(f, c)
            except eg.NotPointed:
                continue
            for p in eg.sample_points(c, 5, rng):
                assert img.contains(f.apply(p))


class TestUnimodular:
    def test_orthant(self):
        assert eg.is_unimodular(eg.cone_from_generators(la.identity_matrix(3), 3))

    def test_index_two(self):
        assert not eg.is_unimodular(eg.cone_from_generators([(1, 0), (1, 2)]))

    def test_zero_cone(self):
        assert eg.is_unimodular(eg.zero_cone(4))

    def test_matches_determinant_on_full_rank_simplicial(self, rng):
        for _ in range(50):
            n = rng.randint(1, 4)
            c = random_cone(rng, n, n)
            if len(c.rays) != n or c.dim != n:
                continue
            assert eg.is_unimodular(c) == (abs(la.det(c.rays)) == 1)


class TestLatticeSurjective:
    def test_identity(self):
        c = eg.cone_from_generators([(1, 0), (0, 1)])
        assert eg.lattice_surjective(eg.LinearMap.identity(2), c, c)

    def test_multiplication_by_two(self):
        r = eg.cone_from_generators([(1,)], 1)
        assert not eg.lattice_surjective(eg.LinearMap(((2,),), 1, 1), r, r)

    def test_sum_map_on_orthant(self):
        c = eg.cone_from_generators(la.identity_matrix(3), 3)
        r = eg.cone_from_generators([(1,)], 1)
        assert eg.lattice_surjective(eg.LinearMap(((1, 1, 1),), 3, 1), c, r)

    def test_against_smith_form_oracle(self, rng):
        import sympy
        from sympy.matrices.normalforms import smith_normal_form as sympy_snf

        for _ in range(40):
            n, m = rng.randint(1, 3), rng.randint(1, 3)
            c = random_cone(rng, n, rng.randint(1, 3))
            mat = tuple(tuple(rng.randint(-2, 2) for _ in range(n)) for _ in range(m))
            f = eg.LinearMap(mat, n, m)
            try:
                img = eg.image_cone(f, c)
            except eg.NotPointed:
                continue
            got = eg.lattice_surjective(f, c, img)
            # oracle: the map between span lattices in sympy's smith form
            b1, b2 = c.span_basis, img.span_basis
            if not b2:
                assert got
                continue
            cols = [la.lattice_coords(b2, f.apply(v)) for v in b1]
            sm = sympy.Matrix([list(col) for col in cols]).T
            d = sympy_snf(sm)
            diag = [abs(d[i, i]) for i in range(min(d.shape))]
            nonzero = [x for x in diag if x != 0]
            assert got == (len(nonzero) == len(b2) and all(x == 1 for x in nonzero))


@st.composite
def small_cones(draw):
    rank = draw(st.integers(min_value=1, max_value=3))
    gens = draw(
        st.lists(
            st.tuples(*[st.integers(min_value=-3, max_value=3)] * rank),
            min_size=1,
            max_size=4,
        )
    )
    return rank, gens


@settings(max_examples=120, deadline=None)
@given(small_cones())
def test_duality_property(data):
    rank, gens = data
    try:
        c = eg.cone_from_generators(gens, rank)
    except eg.NotPointed:
        return
    assert sorted(c.facets) == eg.facets_bruteforce(c)
    assert eg.cone_from_generators(c.rays, rank) == c
    for g in gens:
        assert c.contains(g)
