"""Pointed rational polyhedral cones with exact dual descriptions.

Cones carry both extremal primitive rays and a canonical facet description,
computed by incremental double description (Motzkin style insertion with a
combinatorial adjacency test).  All values are immutable after construction
and all arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from . import linalg as la
from .linalg import Mat, Vec


class GeometryError(Exception):
    pass


class RankMismatch(GeometryError):
    pass


class NotPointed(GeometryError):
    pass


@dataclass(frozen=True)
class LinearMap:
    """Integer-linear map between lattices, rows indexed by target coordinates."""

    matrix: Mat
    source_rank: int
    target_rank: int

    def __post_init__(self):
        if len(self.matrix) != self.target_rank or any(
            len(row) != self.source_rank for row in self.matrix
        ):
            raise RankMismatch(
                f"matrix shape {len(self.matrix)} rows does not match "
                f"{self.target_rank}x{self.source_rank}"
            )

    @staticmethod
    def identity(n: int) -> "LinearMap":
        return LinearMap(la.identity_matrix(n), n, n)

    @staticmethod
    def from_rows(rows, source_rank: int) -> "LinearMap":
        rows = tuple(tuple(r) for r in rows)
        return LinearMap(rows, source_rank, len(rows))

    def apply(self, v) -> Vec:
        if len(v) != self.source_rank:
            raise RankMismatch(f"vector rank {len(v)} != {self.source_rank}")
        return la.mat_vec(self.matrix, v)

    def compose(self, other: "LinearMap") -> "LinearMap":
        """self after other."""
        if other.target_rank != self.source_rank:
            raise RankMismatch("composition rank mismatch")
        return LinearMap(
            la.mat_mul(self.matrix, other.matrix), other.source_rank, self.target_rank
        )

    def __call__(self, v):
        return self.apply(v)

    def to_json(self) -> dict:
        return {
            "matrix": [list(r) for r in self.matrix],
            "source_rank": self.source_rank,
            "target_rank": self.target_rank,
        }

    @staticmethod
    def from_json(data: dict) -> "LinearMap":
        return LinearMap(
            tuple(tuple(int(x) for x in r) for r in data["matrix"]),
            int(data["source_rank"]),
            int(data["target_rank"]),
        )


def _insert_halfspace(lin, rays, a, index, n_inserted):
    """One double description step: intersect (lin, rays) with {a >= 0}.

    lin is a list of lineality basis vectors, rays a list of [vector, zeroset]
    pairs.  Returns the updated pair.
    """
    vals = [la.dot(a, b) for b in lin]
    pivot = next((i for i, v in enumerate(vals) if v != 0), None)
    if pivot is not None:
        b = lin[pivot]
        vb = vals[pivot]
        if vb < 0:
            b = la.vscale(-1, b)
            vb = -vb
        new_lin = []
        for i, l in enumerate(lin):
            if i == pivot:
                continue
            proj = tuple(Fraction(x) - Fraction(vals[i], vb) * y for x, y in zip(l, b))
            new_lin.append(la.clear_denominators(proj))
        new_rays = []
        for r, zs in rays:
            vr = la.dot(a, r)
            proj = tuple(Fraction(x) - Fraction(vr, vb) * y for x, y in zip(r, b))
            projv = la.clear_denominators(proj)
            if any(projv):
                new_rays.append([projv, zs | {index}])
        # the pivot lineality direction survives as an extreme ray on the >= 0 side
        new_rays.append([la.primitive(b), frozenset(range(n_inserted))])
        return new_lin, new_rays

    pos, zero, neg = [], [], []
    for r, zs in rays:
        v = la.dot(a, r)
        if v > 0:
            pos.append([r, zs, v])
        elif v < 0:
            neg.append([r, zs, v])
        else:
            zero.append([r, zs | {index}])
    if not neg:
        return lin, [[r, zs] for r, zs, _ in pos] + zero
    if not pos and not zero and not lin:
        return lin, []
    kept = [[r, zs] for r, zs, _ in pos] + zero
    all_zerosets = [zs for _, zs, _ in pos] + [zs for _, zs in zero] + [
        zs for _, zs, _ in neg
    ]
    for (rp, zp, vp), (rn, zn, vn) in [(p, n) for p in pos for n in neg]:
        common = zp & zn
        adjacent = not any(
            zs >= common for zs in all_zerosets if zs is not zp and zs is not zn
        )
        if not adjacent:
            continue
        comb = la.vsub(la.vscale(vp, rn), la.vscale(vn, rp))
        comb = la.primitive(comb)
        if any(comb):
            kept.append([comb, common | {index}])
    # dedupe rays that coincide after combination
    seen = {}
    for r, zs in kept:
        if r in seen:
            seen[r] = seen[r] | zs
        else:
            seen[r] = zs
    return lin, [[r, zs] for r, zs in seen.items()]


def extreme_rays_of_system(ineqs, eqns, rank: int):
    """Extreme rays and lineality of {x : a.x >= 0, e.x = 0} in R^rank."""
    lin = [tuple(la.identity_matrix(rank)[i]) for i in range(rank)]
    rays = []
    constraints = []
    for e in eqns:
        constraints.append(tuple(e))
        constraints.append(tuple(-x for x in e))
    constraints.extend(tuple(a) for a in ineqs)
    inserted = 0
    for c in constraints:
        if not any(c):
            continue
        lin, rays = _insert_halfspace(lin, rays, c, inserted, inserted)
        inserted += 1
    return lin, [r for r, _ in rays]


class RationalCone:
    """A pointed rational polyhedral cone, canonically represented.

    Attributes:
        ambient_rank: dimension of the ambient lattice.
        rays: lex-sorted tuple of primitive extremal ray generators.
        dim: dimension of the linear span.
        facets: canonical primitive integer covectors, one per facet,
            nonnegative exactly on the cone within its span.
        span_eqs: HNF basis of the annihilator of the span (x is in the span
            iff all of these vanish).
    """

    __slots__ = (
        "ambient_rank", "rays", "dim", "facets", "span_eqs", "_span_basis", "_faces"
    )

    def __init__(self, ambient_rank, rays, dim, facets, span_eqs, span_basis):
        object.__setattr__(self, "ambient_rank", ambient_rank)
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "facets", facets)
        object.__setattr__(self, "span_eqs", span_eqs)
        object.__setattr__(self, "_span_basis", span_basis)
        object.__setattr__(self, "_faces", None)

    def __setattr__(self, *args):
        raise AttributeError("RationalCone is immutable")

    def __eq__(self, other):
        return (
            isinstance(other, RationalCone)
            and self.ambient_rank == other.ambient_rank
            and self.rays == other.rays
        )

    def __hash__(self):
        return hash((self.ambient_rank, self.rays))

    def __repr__(self):
        return f"RationalCone(rank={self.ambient_rank}, dim={self.dim}, rays={list(self.rays)})"

    @property
    def span_basis(self):
        """Saturated lattice basis of the linear span (rows)."""
        return self._span_basis

    def is_zero(self) -> bool:
        return not self.rays

    def contains(self, x) -> bool:
        if len(x) != self.ambient_rank:
            raise RankMismatch("point rank mismatch")
        return all(la.dot(e, x) == 0 for e in self.span_eqs) and all(
            la.dot(f, x) >= 0 for f in self.facets
        )

    def contains_in_relint(self, x) -> bool:
        return (
            all(la.dot(e, x) == 0 for e in self.span_eqs)
            and all(la.dot(f, x) > 0 for f in self.facets)
        )

    def contains_cone(self, other: "RationalCone") -> bool:
        return all(self.contains(r) for r in other.rays)

    def relint_point(self) -> Vec:
        """Deterministic integral point of the relative interior (0 for the zero cone)."""
        if not self.rays:
            return la.zero_vec(self.ambient_rank)
        p = la.zero_vec(self.ambient_rank)
        for r in self.rays:
            p = la.vadd(p, r)
        return p

    def face_at(self, covectors) -> "RationalCone":
        """The face where the given cone-nonnegative covectors vanish."""
        kept = [
            r for r in self.rays if all(la.dot(c, r) == 0 for c in covectors)
        ]
        return cone_from_generators(kept, self.ambient_rank)

    def minimal_face_containing(self, sub: "RationalCone") -> "RationalCone":
        active = [
            f for f in self.facets if all(la.dot(f, r) == 0 for r in sub.rays)
        ]
        return self.face_at(active)

    def all_faces(self):
        """Every face of the cone, including itself and the zero cone."""
        if self._faces is not None:
            return list(self._faces)
        seen = {self.rays: self}
        queue = [self]
        while queue:
            c = queue.pop()
            for f in c.facets:
                face = c.face_at([f])
                if face.rays not in seen:
                    seen[face.rays] = face
                    queue.append(face)
        if () not in seen:
            seen[()] = zero_cone(self.ambient_rank)
        result = sorted(seen.values(), key=lambda c: (c.dim, c.rays))
        object.__setattr__(self, "_faces", tuple(result))
        return result

    def proper_faces(self):
        return [f for f in self.all_faces() if f.rays != self.rays]

    def is_face_of(self, other: "RationalCone") -> bool:
        if not other.contains_cone(self):
            return False
        return other.minimal_face_containing(self) == self

    def is_simplicial(self) -> bool:
        return len(self.rays) == self.dim

    def lattice_index(self) -> int:
        """Index of the ray lattice inside the saturated span lattice (simplicial only)."""
        if not self.is_simplicial():
            raise GeometryError("lattice index is defined for simplicial cones")
        if self.dim == 0:
            return 1
        coords = [la.lattice_coords(self._span_basis, r) for r in self.rays]
        return abs(la.det(tuple(coords)))

    def to_json(self) -> dict:
        return {"rank": self.ambient_rank, "rays": [list(r) for r in self.rays]}

    @staticmethod
    def from_json(data: dict) -> "RationalCone":
        return cone_from_generators(
            [tuple(int(x) for x in r) for r in data["rays"]], int(data["rank"])
        )


def zero_cone(ambient_rank: int) -> RationalCone:
    span_eqs = tuple(tuple(r) for r in la.identity_matrix(ambient_rank))
    return RationalCone(ambient_rank, (), 0, (), span_eqs, ())


_cone_cache: dict = {}


def cone_from_generators(vectors, ambient_rank: int | None = None) -> RationalCone:
    """Canonical pointed cone spanned by the given integer vectors.

    Redundant generators are dropped and every ray is reduced to its primitive
    representative; raises NotPointed if the generators span a line.  Results
    are cached (cones are immutable).
    """
    vectors = [tuple(v) for v in vectors]
    if ambient_rank is None:
        if not vectors:
            raise RankMismatch("ambient rank required for the zero cone")
        ambient_rank = len(vectors[0])
    if any(len(v) != ambient_rank for v in vectors):
        raise RankMismatch("generators have inconsistent ranks")
    gens = []
    for v in vectors:
        p = la.primitive(v)
        if any(p) and p not in gens:
            gens.append(p)
    if not gens:
        return zero_cone(ambient_rank)
    key = (ambient_rank, tuple(sorted(gens)))
    cached = _cone_cache.get(key)
    if cached is not None:
        return cached

    if la.rank(gens) == ambient_rank:
        span_basis = tuple(la.identity_matrix(ambient_rank))
        d = ambient_rank
        coords = list(gens)
    else:
        span_basis = tuple(la.row_saturation_basis(gens, ambient_rank))
        d = len(span_basis)
        coords = [la.lattice_coords(span_basis, g) for g in gens]
    # facets of the cone = extreme rays of the dual cone inside the span
    lin, dual_rays = extreme_rays_of_system(coords, [], d)
    assert not lin, "dual cone of a spanning set is pointed"
    if la.rank(dual_rays) < d:
        raise NotPointed("generated cone contains a line")

    extremal = []
    for g, gc in zip(gens, coords):
        active = [w for w in dual_rays if la.dot(w, gc) == 0]
        if la.rank(active) == d - 1:
            extremal.append(g)
    rays = tuple(sorted(extremal))

    if d == ambient_rank:
        facets = list(dual_rays)
        span_eqs = []
    else:
        ann = la.kernel_basis(span_basis, ambient_rank)
        span_eqs, ann_pivots = la.hnf_rows(ann)
        facets = []
        smat = tuple(span_basis)
        for w in dual_rays:
            c = la.solve_integer(smat, w)
            c = la.reduce_mod_lattice(c, span_eqs, ann_pivots)
            facets.append(tuple(c))
    cone = RationalCone(
        ambient_rank,
        rays,
        d,
        tuple(sorted(facets)),
        tuple(span_eqs),
        span_basis,
    )
    _cone_cache[key] = cone
    _cone_cache[(ambient_rank, rays)] = cone
    return cone


def cone_from_inequalities(ineqs, eqns, ambient_rank: int) -> RationalCone:
    """The pointed cone {x : a.x >= 0 for a in ineqs, e.x = 0 for e in eqns}."""
    lin, rays = extreme_rays_of_system(ineqs, eqns, ambient_rank)
    if lin:
        raise NotPointed("inequality system has a nontrivial lineality space")
    return cone_from_generators(rays, ambient_rank)


def dual_description(cone: RationalCone):
    """Facet covectors of the cone (canonical, sorted)."""
    return list(cone.facets)


_intersect_cache: dict = {}


def intersect(a: RationalCone, b: RationalCone) -> RationalCone:
    if a.ambient_rank != b.ambient_rank:
        raise RankMismatch("cones live in different ambient ranks")
    key = (a.ambient_rank, a.rays, b.rays) if a.rays <= b.rays else (
        a.ambient_rank, b.rays, a.rays
    )
    cached = _intersect_cache.get(key)
    if cached is None:
        ineqs = list(a.facets) + list(b.facets)
        eqns = list(a.span_eqs) + list(b.span_eqs)
        cached = cone_from_inequalities(ineqs, eqns, a.ambient_rank)
        _intersect_cache[key] = cached
    return cached


def image_cone(f: LinearMap, c: RationalCone) -> RationalCone:
    if f.source_rank != c.ambient_rank:
        raise RankMismatch("map source does not match cone ambient")
    return cone_from_generators([f.apply(r) for r in c.rays], f.target_rank)


def preimage_cone(f: LinearMap, c: RationalCone, domain: RationalCone) -> RationalCone:
    """The subcone of ``domain`` mapping into ``c`` under ``f``."""
    if f.source_rank != domain.ambient_rank or f.target_rank != c.ambient_rank:
        raise RankMismatch("preimage rank mismatch")
    ineqs = [la.mat_vec(la.transpose(f.matrix), w) for w in c.facets]
    eqns = [la.mat_vec(la.transpose(f.matrix), e) for e in c.span_eqs]
    ineqs += list(domain.facets)
    eqns += list(domain.span_eqs)
    return cone_from_inequalities(ineqs, eqns, domain.ambient_rank)


def is_unimodular(c: RationalCone) -> bool:
    """Whether c is simplicial with rays extending to a basis of its span lattice."""
    if len(c.rays) != c.dim:
        return False
    return c.lattice_index() == 1


def lattice_surjective(f: LinearMap, c: RationalCone, target: RationalCone) -> bool:
    """Whether f maps lattice points of span(c) onto lattice points of span(f(c))."""
    for r in c.rays:
        if not target.contains(f.apply(r)):
            raise GeometryError("map does not send the cone into the target")
    img = image_cone(f, c)
    if img.dim == 0:
        return True
    b1 = c.span_basis
    b2 = img.span_basis
    cols = []
    for v in b1:
        coords = la.lattice_coords(b2, f.apply(v))
        assert coords is not None
        cols.append(coords)
    m = la.transpose(tuple(cols))
    diag, *_ = la.smith_normal_form(m, len(b1))
    nonzero = [d for d in diag if d != 0]
    return len(nonzero) == len(b2) and all(d == 1 for d in nonzero)


def relints_intersect(a: RationalCone, b: RationalCone) -> bool:
    """Exact test for whether two cones have intersecting relative interiors."""
    i = intersect(a, b)
    p = i.relint_point()
    return a.contains_in_relint(p) and b.contains_in_relint(p)


def sample_points(cone: RationalCone, count: int, rng):
    """Deterministic rational sample points of the cone (exact arithmetic)."""
    pts = []
    if cone.is_zero():
        return [la.zero_vec(cone.ambient_rank)] * min(count, 1)
    for _ in range(count):
        coeffs = [Fraction(rng.randint(0, 12), rng.randint(1, 5)) for _ in cone.rays]
        if not any(coeffs):
            coeffs[rng.randrange(len(coeffs))] = Fraction(1)
        p = tuple(
            sum(c * r[i] for c, r in zip(coeffs, cone.rays))
            for i in range(cone.ambient_rank)
        )
        pts.append(p)
    return pts


# ---------------------------------------------------------------------------
# brute force oracles, used by the test suite and the acceptance gate


def facets_bruteforce(cone: RationalCone):
    """Facets by subset enumeration over rays (independent of the DD path)."""
    d = cone.dim
    if d == 0:
        return []
    smat = tuple(cone.span_basis)
    coords = [la.lattice_coords(cone.span_basis, r) for r in cone.rays]
    found = set()
    if d == 1:
        # single facet: the functional positive on the unique ray direction
        w = (1,)
        cands = [w]
    else:
        cands = []
        for sub in combinations(coords, d - 1):
            if la.rank(sub) != d - 1:
                continue
            ker = la.kernel_basis(tuple(sub), d)
            if len(ker) != 1:
                continue
            cands.append(la.primitive(ker[0]))
    for w in cands:
        for orient in (w, la.vscale(-1, w)):
            vals = [la.dot(orient, rc) for rc in coords]
            if all(v >= 0 for v in vals) and any(v > 0 for v in vals):
                if la.rank([rc for rc, v in zip(coords, vals) if v == 0]) == d - 1 or d == 1:
                    found.add(tuple(orient))
    # lift to canonical ambient covectors exactly as the main path does
    ann = la.kernel_basis(cone.span_basis, cone.ambient_rank)
    hnf, pivots = la.hnf_rows(ann)
    lifted = set()
    for w in found:
        c = la.solve_integer(smat, w)
        lifted.add(tuple(la.reduce_mod_lattice(c, hnf, pivots)))
    return sorted(lifted)


def contains_bruteforce(cone: RationalCone, x) -> bool:
    """Membership via Caratheodory subsets of rays (independent of facets)."""
    if all(v == 0 for v in x):
        return True
    n = cone.ambient_rank
    for size in range(1, cone.dim + 1):
        for sub in combinations(cone.rays, size):
            if la.rank(sub) != size:
                continue
            m = la.transpose(sub)
            sol = la.solve(m, x)
            if sol is None:
                continue
            if all(c >= 0 for c in sol):
                return True
    return False
