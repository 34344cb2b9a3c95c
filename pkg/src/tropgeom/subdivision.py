"""The subdivision engine for cone complexes.

All refinement operations (stellar, hyperplane arrangement, common
refinement, pullback) produce per-cone fans and hand them to a single
assembler that resolves cell ownership across face gluings, collapses
automorphism orbits, and rebuilds a valid glued complex together with the
projection morphism.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from . import linalg as la
from .exactgeom import (
    GeometryError,
    LinearMap,
    RationalCone,
    cone_from_generators,
    cone_from_inequalities,
    image_cone,
    intersect,
    is_unimodular,
    preimage_cone,
    sample_points,
)
from .complexes import (
    ComplexMorphism,
    ConeComplex,
    ConicalSubset,
    FaceMap,
    is_union_of_cones,
    pull_back_cone,
    validate_complex,
)


class RayOutside(GeometryError):
    pass


class CellOver(NamedTuple):
    """A refined cell embedded in an original cone's coordinates."""

    cone: RationalCone
    refined_id: str
    embed: LinearMap  # maps the refined cone onto this cell


@dataclass
class SubdivisionOf:
    """A subdivision: a refined complex with a projection to the original."""

    original: ConeComplex
    refined: ConeComplex
    projection: ComplexMorphism

    def __post_init__(self):
        self._cells_cache = {}

    def owned_by(self):
        out = {}
        for rid in self.refined.ids():
            tgt, _ = self.projection.assignments[rid]
            out.setdefault(tgt, []).append(rid)
        return out

    def cells_over(self, cid: str):
        """All embedded refined cells inside the original cone cid (orbit expanded)."""
        if cid in self._cells_cache:
            return list(self._cells_cache[cid])
        owned = self.owned_by()
        out = {}
        for emb in self.original.embeddings_into(cid):
            for rid in owned.get(emb.src, ()):
                _, pm = self.projection.assignments[rid]
                rep = self.refined.cones[rid]
                for h in self.original.auts[emb.src]:
                    full = emb.map.compose(h).compose(pm)
                    cell = image_cone(full, rep)
                    if cell.rays not in out:
                        out[cell.rays] = CellOver(cell, rid, full)
        result = sorted(out.values(), key=lambda c: (c.cone.dim, c.cone.rays))
        self._cells_cache[cid] = result
        return list(result)

    def max_cells_over(self, cid: str):
        d = self.original.cones[cid].dim
        return [c for c in self.cells_over(cid) if c.cone.dim == d]

    def is_identity(self) -> bool:
        if len(self.refined.cones) != len(self.original.cones):
            return False
        for rid in self.refined.ids():
            tgt, m = self.projection.assignments[rid]
            if image_cone(m, self.refined.cones[rid]) != self.original.cones[tgt]:
                return False
        return True

    def transport(self, subset: ConicalSubset) -> ConicalSubset:
        """Re-express a conical subset of the original complex in the refined one.

        Each piece is cut along the refined cells and every part is hosted at
        the smallest refined cell containing it.
        """
        pieces = []
        seen = set()
        for host, p in subset.pieces:
            cells = self.cells_over(host)
            if p.is_zero():
                zero_cell = next(c for c in cells if c.cone.is_zero())
                parts = [(zero_cell, p)]
            else:
                d = self.original.cones[host].dim
                parts = []
                for c in cells:
                    if c.cone.dim != d:
                        continue
                    q = intersect(c.cone, p)
                    if q.is_zero() and not p.is_zero():
                        continue
                    owner = next(cc for cc in cells if cc.cone.contains_cone(q))
                    parts.append((owner, q))
            for owner, q in parts:
                back = pull_back_cone(
                    owner.embed, self.refined.cones[owner.refined_id], q
                )
                key = (owner.refined_id, back.rays)
                if key not in seen:
                    seen.add(key)
                    pieces.append((owner.refined_id, back))
        return ConicalSubset(self.refined, tuple(pieces))

    def summary(self) -> dict:
        return {
            "original_cones": len(self.original.cones),
            "refined_cones": len(self.refined.cones),
        }

    def to_json(self) -> dict:
        return {
            "refined": self.refined.to_json(),
            "projection": self.projection.to_json(),
        }


def identity_subdivision(cx: ConeComplex) -> SubdivisionOf:
    assignments = {
        cid: (cid, LinearMap.identity(cone.ambient_rank))
        for cid, cone in cx.cones.items()
    }
    return SubdivisionOf(cx, cx, ComplexMorphism(cx, cx, assignments))


def compose_subdivisions(s1: SubdivisionOf, s2: SubdivisionOf) -> SubdivisionOf:
    """s2 must subdivide s1.refined; the composite subdivides s1.original."""
    proj = s1.projection.compose_subdivision(s2.projection)
    return SubdivisionOf(s1.original, s2.refined, proj)


# ---------------------------------------------------------------------------
# the assembler


def _closure_of_fans(cx: ConeComplex, fans: dict):
    """Face-close the given cells, then close under automorphisms and
    pullback along face maps until stable."""
    cells = {}
    for cid, cone in cx.cones.items():
        given = list(fans[cid]) if cid in fans else [cone]
        got = set()
        for c in given:
            for f in c.all_faces():
                got.add(f)
        cells[cid] = got
    face_images = {
        f: image_cone(f.map, cx.cones[f.sub]) for f in cx.faces
    }
    for _ in range(64):
        changed = False
        for cid in cx.ids():
            for g in cx.auts[cid]:
                for c in list(cells[cid]):
                    img = image_cone(g, c)
                    if img not in cells[cid]:
                        cells[cid].add(img)
                        changed = True
        for f in cx.faces:
            fimg = face_images[f]
            sub_cone = cx.cones[f.sub]
            for c in list(cells[f.sup]):
                if fimg.contains_cone(c):
                    back = pull_back_cone(f.map, sub_cone, c)
                    if back not in cells[f.sub]:
                        cells[f.sub].add(back)
                        changed = True
        if not changed:
            return cells
    raise GeometryError("cell closure did not stabilize")


def _assemble(cx: ConeComplex, fans: dict, strict: bool = True) -> SubdivisionOf:
    """Build the refined complex from per-cone fans of cells.

    Cells whose relative interior meets the relative interior of their host
    cone are owned by that host; every other cell is pulled back to the face
    that owns it.  One cone is stored per automorphism orbit of owned cells.
    """
    cells = _closure_of_fans(cx, fans)

    cell_info = {}
    owned = {cid: {} for cid in cx.cones}
    for cid in cx.ids():
        cone = cx.cones[cid]
        for c in sorted(cells[cid], key=lambda c: (c.dim, c.rays)):
            mf = cone.minimal_face_containing(c)
            if mf == cone:
                owner, emb_map, c_owner = cid, LinearMap.identity(cone.ambient_rank), c
            else:
                emb = next(
                    (e for e in cx.embeddings_into(cid) if e.cone == mf), None
                )
                if emb is None:
                    raise GeometryError(
                        f"face {mf.rays} of cone {cid} is not represented; "
                        "cannot resolve cell ownership"
                    )
                owner, emb_map = emb.src, emb.map
                c_owner = pull_back_cone(emb_map, cx.cones[owner], c)
            rep, h = min(
                ((image_cone(h, c_owner), h) for h in cx.auts[owner]),
                key=lambda t: t[0].rays,
            )
            hinv = LinearMap(
                la.invert_unimodular(h.matrix), h.source_rank, h.target_rank
            )
            cell_info[(cid, c.rays)] = (owner, rep, emb_map.compose(hinv))
            owned[owner][rep.rays] = rep

    ids = {}
    new_cones = {}
    for owner in cx.ids():
        reps = sorted(owned[owner].values(), key=lambda c: (c.dim, c.rays))
        for k, rep in enumerate(reps):
            nid = f"{owner}.{k}"
            ids[(owner, rep.rays)] = nid
            new_cones[nid] = rep

    new_auts = {}
    new_faces = set()
    assignments = {}
    for (owner, rays), nid in ids.items():
        rep = new_cones[nid]
        new_auts[nid] = [
            g for g in cx.auts[owner] if image_cone(g, rep) == rep
        ]
        assignments[nid] = (
            owner,
            LinearMap.identity(cx.cones[owner].ambient_rank),
        )
        for face in rep.proper_faces():
            sub_owner, sub_rep, sub_map = cell_info[(owner, face.rays)]
            sub_id = ids[(sub_owner, sub_rep.rays)]
            new_faces.add(FaceMap(sub_id, nid, sub_map))

    refined = ConeComplex(new_cones, new_faces, new_auts)
    sub = SubdivisionOf(cx, refined, ComplexMorphism(refined, cx, assignments))
    if strict:
        problems = validate_complex(refined, deep=False)
        problems += verify_subdivision(sub)
        if problems:
            raise GeometryError("subdivision is not well glued: " + "; ".join(problems))
    return sub


# ---------------------------------------------------------------------------
# structural verification of a subdivision


def verify_subdivision(sub: SubdivisionOf):
    """Check that the refined cells partition every original cone.

    Uses the wall criterion: inside each original cone the maximal cells must
    form a fan whose internal walls are shared by exactly two cells, whose
    boundary walls lie on the boundary of the cone, and whose dual graph is
    connected.
    """
    out = []
    for cid in sub.original.ids():
        cone = sub.original.cones[cid]
        cells = [c.cone for c in sub.cells_over(cid)]
        for a in cells:
            if not cone.contains_cone(a):
                out.append(f"cell {a.rays} pokes out of cone {cid}")
        for i, a in enumerate(cells):
            for b in cells[i + 1 :]:
                cut = intersect(a, b)
                if not (cut.is_face_of(a) and cut.is_face_of(b)):
                    out.append(
                        f"cells {a.rays} and {b.rays} in {cid} do not meet in a common face"
                    )
        if cone.dim == 0:
            continue
        maxima = [c for c in cells if c.dim == cone.dim]
        if not maxima:
            out.append(f"no maximal cells over cone {cid}")
            continue
        walls = {}
        for idx, m in enumerate(maxima):
            for f in m.facets:
                w = m.face_at([f])
                walls.setdefault(w.rays, []).append(idx)
        adj = {i: set() for i in range(len(maxima))}
        for wrays, incident in walls.items():
            wall = cone_from_generators(list(wrays), cone.ambient_rank)
            on_boundary = any(
                all(la.dot(g, r) == 0 for r in wrays) for g in cone.facets
            )
            if on_boundary:
                if len(incident) != 1:
                    out.append(f"boundary wall {wrays} in {cid} shared by {len(incident)} cells")
            else:
                if len(incident) != 2:
                    out.append(f"internal wall {wrays} in {cid} shared by {len(incident)} cells")
                else:
                    adj[incident[0]].add(incident[1])
                    adj[incident[1]].add(incident[0])
        seen = {0}
        stack = [0]
        while stack:
            for j in adj[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(seen) != len(maxima):
            out.append(f"maximal cells over {cid} are not wall connected")
    return out


def soundness_sample(sub: SubdivisionOf, rng, per_cone: int = 12):
    """Sampled exact membership check: every sampled point of an original cone
    lies in some maximal cell and in the relative interior of at most one."""
    for cid in sub.original.ids():
        cone = sub.original.cones[cid]
        maxima = [c.cone for c in sub.max_cells_over(cid)]
        for p in sample_points(cone, per_cone, rng):
            containing = [m for m in maxima if m.contains(p)]
            if not containing:
                raise GeometryError(f"sampled point {p} of {cid} not covered")
            strict = [m for m in maxima if m.contains_in_relint(p)]
            if len(strict) > 1:
                raise GeometryError(f"sampled point {p} of {cid} in two cell interiors")
    return True


# ---------------------------------------------------------------------------
# stellar subdivision


def _stellar_fan(cells, ray):
    """Insert a ray into a fan (list of cones, face closed)."""
    out = set()
    for c in cells:
        if not c.contains(ray):
            out.add(c)
            continue
        for f in c.all_faces():
            if not f.contains(ray):
                out.add(cone_from_generators(list(f.rays) + [ray], c.ambient_rank))
    return sorted(out, key=lambda c: (c.dim, c.rays))


def stellar_subdivide(cx: ConeComplex, cone_id: str, ray) -> SubdivisionOf:
    """Stellar subdivision at a ray given in the named cone's coordinates.

    The ray is inserted together with its automorphism orbit, and the
    insertion is propagated to every cone that shares the face of the ray.
    """
    cone = cx.cones[cone_id]
    ray = la.primitive(tuple(ray))
    if not any(ray) or not cone.contains(ray):
        raise RayOutside(f"ray {ray} is not in the support of cone {cone_id}")
    host_face = cone.minimal_face_containing(cone_from_generators([ray], cone.ambient_rank))
    emb = next(e for e in cx.embeddings_into(cone_id) if e.cone == host_face)
    from .complexes import preimage_in_span

    ray_owner = preimage_in_span(emb.map, cx.cones[emb.src], ray)
    orbit = sorted(
        {la.primitive(g.apply(ray_owner)) for g in cx.auts[emb.src]}
    )

    fans = {}
    for cid in cx.ids():
        copies = set()
        for e in cx.embeddings_into(cid):
            if e.src != emb.src:
                continue
            for r in orbit:
                copies.add(la.primitive(e.map.apply(r)))
        if not copies:
            continue
        cells = cx.cones[cid].all_faces()
        for r in sorted(copies):
            cells = _stellar_fan(cells, r)
        fans[cid] = cells
    return _assemble(cx, fans)


# ---------------------------------------------------------------------------
# hyperplane (arrangement) refinement


def _canon_covector(w):
    w = la.primitive(w)
    for x in w:
        if x != 0:
            return w if x > 0 else la.vscale(-1, w)
    return w


def _slices(cone: RationalCone, w) -> bool:
    vals = [la.dot(w, r) for r in cone.rays]
    return any(v > 0 for v in vals) and any(v < 0 for v in vals)


def _chambers(cone: RationalCone, covectors):
    cells = [cone]
    for w in covectors:
        nxt = []
        for c in cells:
            if not _slices(c, w):
                nxt.append(c)
                continue
            for side in (w, la.vscale(-1, w)):
                piece = cone_from_inequalities(
                    list(c.facets) + [side], list(c.span_eqs), c.ambient_rank
                )
                nxt.append(piece)
        cells = nxt
    seen = {}
    for c in cells:
        seen[c.rays] = c
    return sorted(seen.values(), key=lambda c: c.rays)


def hyperplane_refine(cx: ConeComplex, covectors_by_cone: dict) -> SubdivisionOf:
    """Slice each cone by an arrangement of covectors.

    Covector sets are first closed under automorphisms, restriction to faces,
    and transport across shared faces (fixpoint), so the sliced fans glue.
    """
    covs = {cid: set() for cid in cx.cones}
    for cid, ws in covectors_by_cone.items():
        for w in ws:
            w = _canon_covector(tuple(w))
            if _slices(cx.cones[cid], w):
                covs[cid].add(w)

    for _ in range(64):
        changed = False
        for cid in cx.ids():
            for g in cx.auts[cid]:
                gt = la.transpose(g.matrix)
                for w in list(covs[cid]):
                    w2 = _canon_covector(la.mat_vec(gt, w))
                    if _slices(cx.cones[cid], w2) and w2 not in covs[cid]:
                        covs[cid].add(w2)
                        changed = True
        for f in cx.faces:
            mt = la.transpose(f.map.matrix)
            sub_cone = cx.cones[f.sub]
            # restrict covectors of the big cone to the face
            for w in list(covs[f.sup]):
                w2 = _canon_covector(la.mat_vec(mt, w))
                if _slices(sub_cone, w2) and w2 not in covs[f.sub]:
                    covs[f.sub].add(w2)
                    changed = True
            # extend covectors of the face to the big cone
            for w in list(covs[f.sub]):
                if any(
                    _canon_covector(la.mat_vec(mt, u)) == w for u in covs[f.sup]
                ):
                    continue
                lifted = _extend_covector(f.map, sub_cone, w)
                lifted = _canon_covector(lifted)
                if lifted not in covs[f.sup]:
                    covs[f.sup].add(lifted)
                    changed = True
        if not changed:
            break
    else:
        raise GeometryError("covector transport did not stabilize")

    fans = {
        cid: _chambers(cx.cones[cid], sorted(covs[cid]))
        for cid in cx.ids()
        if covs[cid]
    }
    return _assemble(cx, fans)


def _extend_covector(m: LinearMap, sub_cone: RationalCone, w):
    """A covector on the big cone restricting to w on the embedded face."""
    basis = sub_cone.span_basis
    image_basis = tuple(m.apply(b) for b in basis)
    proj = la.projection_to_lattice(image_basis, m.target_rank)
    w_span = tuple(la.dot(w, b) for b in basis)
    return la.mat_vec(la.transpose(proj), w_span)


def cones_cover_exactly(target: RationalCone, cells):
    """Exact test that the cells cover the target cone.

    Slices the target by every supporting covector of every cell; each full
    dimensional chamber must lie inside some cell.  Returns (ok, witness).
    """
    cells = [c for c in cells if target.contains_cone(c)]
    covs = set()
    for c in cells:
        covs.update(map(_canon_covector, c.facets))
        covs.update(map(_canon_covector, c.span_eqs))
    covs = sorted(w for w in covs if _slices(target, w))
    for chamber in _chambers(target, covs):
        if chamber.dim != target.dim:
            continue
        if not any(c.contains_cone(chamber) for c in cells):
            return False, chamber.relint_point()
    return True, None


# ---------------------------------------------------------------------------
# common refinement and pullback


def common_refinement(s1: SubdivisionOf, s2: SubdivisionOf) -> SubdivisionOf:
    """Coarsest subdivision refining both (cells are pairwise intersections)."""
    if s1.original is not s2.original and s1.original.cones != s2.original.cones:
        raise GeometryError("subdivisions do not share an original complex")
    cx = s1.original
    fans = {}
    for cid in cx.ids():
        d = cx.cones[cid].dim
        cells = set()
        for a in s1.max_cells_over(cid):
            for b in s2.max_cells_over(cid):
                cut = intersect(a.cone, b.cone)
                if cut.dim == d:
                    cells.add(cut)
        fans[cid] = sorted(cells, key=lambda c: c.rays)
    return _assemble(cx, fans)


@dataclass
class PullbackResult:
    subdivision: SubdivisionOf  # of the morphism source
    refined_map: ComplexMorphism  # refined source -> refined target


def pullback_subdivision(phi: ComplexMorphism, s: SubdivisionOf) -> PullbackResult:
    """Refine the source of a morphism by preimages of refined target cells.

    The induced morphism from the refined source to the refined target maps
    each cone into a single cone.
    """
    if phi.target is not s.original and phi.target.cones != s.original.cones:
        raise GeometryError("subdivision does not refine the morphism target")
    cx = phi.source
    fans = {}
    for cid in cx.ids():
        tgt, m = phi.assignments[cid]
        dom = cx.cones[cid]
        cells = set()
        for c in s.max_cells_over(tgt):
            piece = preimage_cone(m, c.cone, dom)
            if piece.dim == dom.dim:
                cells.add(piece)
        fans[cid] = sorted(cells, key=lambda c: c.rays)
    sub_src = _assemble(cx, fans)

    assignments = {}
    for rid in sub_src.refined.ids():
        owner, pm = sub_src.projection.assignments[rid]
        rep = sub_src.refined.cones[rid]
        tgt, m = phi.assignments[owner]
        full = m.compose(pm)
        img = image_cone(full, rep)
        best = None
        for c in s.cells_over(tgt):
            if c.cone.contains_cone(img):
                if best is None or c.cone.dim < best.cone.dim:
                    best = c
        if best is None:
            raise GeometryError(f"image of refined cone {rid} is not in a refined cell")
        t_rep = s.refined.cones[best.refined_id]
        basis = t_rep.span_basis
        image_basis = tuple(best.embed.apply(b) for b in basis)
        if basis:
            proj = la.projection_to_lattice(image_basis, best.embed.target_rank)
            lift = la.mat_mul(la.transpose(basis), proj)
        else:
            lift = tuple(
                la.zero_vec(best.embed.target_rank) for _ in range(t_rep.ambient_rank)
            )
        n = LinearMap(
            la.mat_mul(lift, full.matrix) if basis else tuple(
                la.zero_vec(full.source_rank) for _ in range(t_rep.ambient_rank)
            ),
            full.source_rank,
            t_rep.ambient_rank,
        )
        if not all(t_rep.contains(n.apply(r)) for r in rep.rays):
            raise GeometryError(f"refined morphism does not land in its cell at {rid}")
        assignments[rid] = (best.refined_id, n)
    refined_map = ComplexMorphism(sub_src.refined, s.refined, assignments)
    return PullbackResult(sub_src, refined_map)


# ---------------------------------------------------------------------------
# making a conical subset a union of cones


def refine_until_conical(
    cx: ConeComplex, subset: ConicalSubset, unimodularize: bool = False
) -> SubdivisionOf:
    """A subdivision of the complex in which the subset is a union of cones.

    Uses the arrangement of all supporting covectors (facets and span
    equations) of the pieces; optionally unimodularizes afterwards by
    repeated stellar subdivision.
    """
    covs = {}
    for host, piece in subset.pieces:
        ws = covs.setdefault(host, set())
        ws.update(piece.facets)
        ws.update(piece.span_eqs)
    sub = hyperplane_refine(cx, covs)
    check = is_union_of_cones(sub.refined, sub.transport(subset))
    if not check.ok:
        raise GeometryError(f"refinement failed to make the subset conical: {check.witnesses}")
    if unimodularize:
        sub = _unimodularize(sub)
        check = is_union_of_cones(sub.refined, sub.transport(subset))
        if not check.ok:
            raise GeometryError("unimodularization broke the conical subset")
    return sub


def _parallelepiped_interior_point(cone: RationalCone):
    """A minimal interior lattice point of the fundamental cell of a simplicial cone."""
    from fractions import Fraction
    from itertools import product

    k = cone.lattice_index()
    d = len(cone.rays)
    best = None
    for combo in product(range(1, k), repeat=d):
        coords = [Fraction(a, k) for a in combo]
        pt = tuple(
            sum(c * r[i] for c, r in zip(coords, cone.rays))
            for i in range(cone.ambient_rank)
        )
        if all(x.denominator == 1 for x in pt):
            ipt = tuple(int(x) for x in pt)
            key = (sum(combo), ipt)
            if best is None or key < best:
                best = key
    return None if best is None else best[1]


def _unimodularize(sub: SubdivisionOf) -> SubdivisionOf:
    for _ in range(500):
        bad = None
        for rid in sorted(
            sub.refined.ids(), key=lambda r: (sub.refined.cones[r].dim, r)
        ):
            cone = sub.refined.cones[rid]
            if cone.dim > 0 and not is_unimodular(cone):
                bad = rid
                break
        if bad is None:
            return sub
        cone = sub.refined.cones[bad]
        if not cone.is_simplicial():
            ray = cone.rays[0]
        else:
            ray = _parallelepiped_interior_point(cone)
            assert ray is not None, "minimal non-unimodular cell has an interior box point"
        step = stellar_subdivide(sub.refined, bad, ray)
        sub = compose_subdivisions(sub, step)
    raise GeometryError("unimodularization did not terminate")
