"""End to end verification runs: subdivide the curve moduli complex along
forgetful images, pull the map complexes back, and check the polyhedral
hypotheses (cone onto cone, lattice surjectivity, and the degree one
comparison of the product complex with the fiber product).

The checks certify the combinatorial statements only; cycle level identities
on the algebraic moduli spaces are outside what a desk computation can see,
and every report says so.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field

from . import linalg as la
from .exactgeom import (
    LinearMap,
    image_cone,
    preimage_cone,
    relints_intersect,
)
from .complexes import (
    ComplexMorphism,
    ConicalSubset,
    check_weak_semistable,
    is_union_of_cones,
    validate_morphism,
)
from .curves import CurveModuliComplex, build_moduli_complex
from .subdivision import (
    PullbackResult,
    SubdivisionOf,
    cones_cover_exactly,
    pullback_subdivision,
    refine_until_conical,
    soundness_sample,
)
from .tropmaps import (
    ContactData,
    MapModuliComplex,
    build_map_complex,
    enumerate_rubber_types,
    forgetful_image,
    superimpose,
)

BOUNDARY_NOTE = (
    "checks cover the polyhedral hypotheses only: image families become "
    "unions of cones, forgetful maps send cones onto cones with surjective "
    "lattice maps, and the two factor complex matches the fiber product as a "
    "subdivision; cycle level identities are out of scope"
)


@dataclass
class CheckResult:
    name: str
    scope: str
    passed: bool
    witness: tuple | None = None

    def to_json(self):
        out = {"name": self.name, "scope": self.scope, "passed": self.passed}
        if self.witness is not None:
            out["witness"] = list(self.witness)
        return out


@dataclass
class Report:
    inputs: dict
    subdivision: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=lambda: [BOUNDARY_NOTE])
    elapsed: float = 0.0
    # the SubdivisionOf behind the run, for structural re-verification;
    # never serialized
    subdivision_data: object = field(default=None, repr=False, compare=False)

    def add(self, name, scope, passed, witness=None):
        self.checks.append(CheckResult(name, scope, bool(passed), witness))

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self, include_timing: bool = False) -> dict:
        out = {
            "inputs": self.inputs,
            "subdivision": self.subdivision,
            "checks": [c.to_json() for c in self.checks],
            "notes": list(self.notes),
            "all_passed": self.all_passed,
        }
        if include_timing:
            out["elapsed_seconds"] = round(self.elapsed, 3)
        return out

    def to_text(self) -> str:
        lines = []
        lines.append(f"inputs: {json.dumps(self.inputs, sort_keys=True)}")
        if self.subdivision:
            lines.append(f"subdivision: {json.dumps(self.subdivision, sort_keys=True)}")
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            extra = f"  witness={list(c.witness)}" if c.witness is not None else ""
            lines.append(f"[{mark}] {c.name} @ {c.scope}{extra}")
        for n in self.notes:
            lines.append(f"note: {n}")
        lines.append(f"result: {'all checks passed' if self.all_passed else 'FAILURES'}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# building blocks


def image_family(mx: MapModuliComplex) -> ConicalSubset:
    """Union of the forgetful images of all cones of a map complex."""
    pieces = {}
    for tid in mx.complex.ids():
        t = mx.types[tid]
        stable, img = forgetful_image(t)
        if img.is_zero():
            continue
        cid = mx.target.id_of(stable)
        pieces[(cid, img.rays)] = (cid, img)
    return ConicalSubset(mx.target.complex, tuple(pieces.values()))


def build_gamma_subdivision(
    base: CurveModuliComplex, images, unimodularize: bool = False
) -> SubdivisionOf:
    """Subdivide the curve moduli complex so every image family is conical.

    The union of all families drives the refinement; each family is then
    re-checked separately, which is what the simultaneous statement needs.
    """
    merged = {}
    for fam in images:
        for host, cone in fam.pieces:
            merged[(host, cone.rays)] = (host, cone)
    union = ConicalSubset(base.complex, tuple(merged.values()))
    sub = refine_until_conical(base.complex, union, unimodularize=unimodularize)
    for fam in images:
        chk = is_union_of_cones(sub.refined, sub.transport(fam))
        if not chk.ok:
            raise AssertionError(
                f"an image family is not a union of cones after refinement: {chk.witnesses}"
            )
    return sub


def pullback_map_complexes(complexes, sub: SubdivisionOf):
    """Pull the base refinement back to each map complex."""
    return {key: pullback_subdivision(mx.forgetful, sub) for key, mx in complexes.items()}


def two_factor_types(contact: ContactData, max_edges: int | None = None):
    """Product types for a two factor contact datum, organized by superimpose."""
    if contact.num_factors != 2:
        raise ValueError("two factor contact data required")
    txs = enumerate_rubber_types(contact, 0, max_edges=max_edges)
    tys = enumerate_rubber_types(contact, 1, max_edges=max_edges)
    products = []
    for tx in txs:
        for ty in tys:
            if tx.graph == ty.graph:
                products.extend(superimpose(tx, ty))
    return products


# ---------------------------------------------------------------------------
# the hypothesis checks


def _semistability_into(report: Report, label: str, pb: PullbackResult):
    problems = validate_morphism(pb.refined_map)
    report.add(f"{label} refined morphism valid", label, not problems)
    for r in check_weak_semistable(pb.refined_map):
        report.add(f"{label} cone onto cone", r.source, r.image_is_cone, r.witness)
        report.add(f"{label} lattice surjective", r.source, r.lattice_onto)


def _nu_check_pairs(report: Report, products, sub: SubdivisionOf, base: CurveModuliComplex):
    """Compare the two factor chambers with the fiber product, cell by cell.

    For each pair of single factor types over a shared stable graph and each
    refined cell of the base cone, the chamber images must cover the fiber
    piece exactly, with pairwise disjoint relative interiors.
    """
    by_pair = {}
    for p in products:
        key = (
            p.x_type.graph.genera,
            p.x_type.graph.edges,
            p.x_type.graph.legs,
            p.x_type.slopes,
            p.y_type.slopes,
        )
        by_pair.setdefault(key, []).append(p)

    from .tropmaps import fiber_product_cone
    from .curves import stabilize

    for key in sorted(by_pair):
        group = by_pair[key]
        tx, ty = group[0].x_type, group[0].y_type
        stable, mx_map, _ = stabilize(tx.graph)
        base_id = base.id_of(stable)
        fiber = fiber_product_cone(tx, ty)
        scope = f"{base_id}:{tx.slopes[0]}x{ty.slopes[0]}"
        # stabilized lengths read off the x side (the fiber condition makes
        # the y side agree)
        lift = LinearMap(
            tuple(
                tuple(row) + la.zero_vec(ty.graph.num_edges)
                for row in mx_map.matrix
            ),
            fiber.ambient_rank,
            stable.num_edges,
        )
        for cell in sub.max_cells_over(base_id):
            fiber_cell = preimage_cone(lift, cell.cone, fiber)
            if fiber_cell.dim < fiber.dim:
                continue
            chambers = []
            for p in group:
                stab_p, ms_p, _ = stabilize(p.map_type.graph)
                piece = preimage_cone(
                    ms_p, cell.cone, p.cone
                )
                img = image_cone(p.embed, piece)
                if img.dim == fiber_cell.dim:
                    chambers.append(img)
            for img in chambers:
                if not fiber_cell.contains_cone(img):
                    report.add("product chambers inside fiber product", scope, False, img.relint_point())
                    break
            ok, witness = cones_cover_exactly(fiber_cell, chambers)
            report.add("product chambers cover fiber product", scope, ok, witness)
            disjoint = True
            for i in range(len(chambers)):
                for j in range(i + 1, len(chambers)):
                    if chambers[i] != chambers[j] and relints_intersect(chambers[i], chambers[j]):
                        disjoint = False
            report.add("product chamber interiors disjoint", scope, disjoint)


def verify_theorem_hypotheses(
    pullbacks: dict,
    sub: SubdivisionOf,
    contact: ContactData,
    products=None,
    base: CurveModuliComplex | None = None,
    seed: int = 0,
) -> Report:
    """Run the full hypothesis suite on refined map complexes.

    pullbacks maps factor labels (X, Y, Z) to PullbackResult values; products
    are the superimpose chambers backing the Z factor when present.
    """
    t0 = time.time()
    report = Report(
        inputs={
            "genus": contact.genus,
            "markings": contact.num_markings,
            "contacts": [list(a) for a in contact.slopes],
        },
        subdivision=sub.summary(),
    )
    for label in sorted(pullbacks):
        _semistability_into(report, label, pullbacks[label])
    if products is not None and base is not None:
        _nu_check_pairs(report, products, sub, base)
    rng = random.Random(seed)
    try:
        soundness_sample(sub, rng, per_cone=6)
        report.add("subdivision soundness sample", "base", True)
    except Exception:
        report.add("subdivision soundness sample", "base", False)
    report.subdivision_data = sub
    report.elapsed = time.time() - t0
    return report


# ---------------------------------------------------------------------------
# top level runs


def single_factor_run(
    g: int, n: int, a, unimodularize: bool = False, seed: int = 0,
    base: CurveModuliComplex | None = None, max_edges: int | None = None,
) -> Report:
    """Subdivide along one contact vector's images and verify the hypotheses."""
    t0 = time.time()
    contact = ContactData(g, (tuple(a),))
    base = base or build_moduli_complex(g, n, max_edges)
    types = enumerate_rubber_types(contact, 0, max_edges=max_edges)
    mx = build_map_complex(types, base)
    fam = image_family(mx)
    sub = build_gamma_subdivision(base, [fam], unimodularize)
    pbs = pullback_map_complexes({"X": mx}, sub)
    report = verify_theorem_hypotheses(pbs, sub, contact, seed=seed)
    chk = is_union_of_cones(sub.refined, sub.transport(fam))
    report.add("image family union of cones", "X", chk.ok)
    report.inputs["types"] = len(types)
    if max_edges is not None:
        report.inputs["max_edges"] = max_edges
    report.subdivision_data = sub
    report.elapsed = time.time() - t0
    return report


def product_run(
    g: int, n: int, a1, a2, unimodularize: bool = False, seed: int = 0,
    base: CurveModuliComplex | None = None, max_edges: int | None = None,
) -> Report:
    """The two factor run: X, Y, and the superimposed Z family together."""
    t0 = time.time()
    contact = ContactData(g, (tuple(a1), tuple(a2)))
    base = base or build_moduli_complex(g, n, max_edges)
    tx_types = enumerate_rubber_types(contact, 0, max_edges=max_edges)
    ty_types = enumerate_rubber_types(contact, 1, max_edges=max_edges)
    products = two_factor_types(contact, max_edges=max_edges)
    mxs = {
        "X": build_map_complex(tx_types, base),
        "Y": build_map_complex(ty_types, base),
        "Z": build_map_complex([p.map_type for p in products], base),
    }
    families = {key: image_family(mx) for key, mx in mxs.items()}
    sub = build_gamma_subdivision(base, list(families.values()), unimodularize)
    pbs = pullback_map_complexes(mxs, sub)
    report = verify_theorem_hypotheses(
        pbs, sub, contact, products=products, base=base, seed=seed
    )
    for key in sorted(families):
        chk = is_union_of_cones(sub.refined, sub.transport(families[key]))
        report.add("image family union of cones", key, chk.ok)
    report.inputs["types"] = {k: len(m.types) for k, m in sorted(mxs.items())}
    if max_edges is not None:
        report.inputs["max_edges"] = max_edges
    report.subdivision_data = sub
    report.elapsed = time.time() - t0
    return report


@dataclass
class SupportResult:
    subset: ConicalSubset
    subdivision: SubdivisionOf
    strata: list  # per refined support cone: host, dims, codim
    report: Report


def dr_support(g: int, n: int, a, unimodularize: bool = False,
               base: CurveModuliComplex | None = None,
               max_edges: int | None = None) -> SupportResult:
    """The support of the ramification locus: union of all forgetful images,
    with a base subdivision making it a union of cones and a codimension
    table for the transverse intersection diagnostics."""
    t0 = time.time()
    contact = ContactData(g, (tuple(a),))
    base = base or build_moduli_complex(g, n, max_edges)
    types = enumerate_rubber_types(contact, 0, max_edges=max_edges)
    mx = build_map_complex(types, base)
    fam = image_family(mx)
    sub = build_gamma_subdivision(base, [fam], unimodularize)
    transported = sub.transport(fam)
    strata = []
    for host, piece in transported.pieces:
        host_dim = sub.refined.cones[host].dim
        strata.append(
            {
                "host": host,
                "support_dim": piece.dim,
                "host_dim": host_dim,
                "codim": host_dim - piece.dim,
            }
        )
    report = Report(
        inputs={"genus": g, "markings": n, "contacts": [list(a)], "types": len(types)},
        subdivision=sub.summary(),
    )
    chk = is_union_of_cones(sub.refined, transported)
    report.add("support is a union of cones", "base", chk.ok)
    report.elapsed = time.time() - t0
    return SupportResult(fam, sub, strata, report)


# ---------------------------------------------------------------------------
# the worked example: the degree three cover of the rubber line in genus two


def figure1_demo(seed: int = 0) -> Report:
    """The degree 3, genus 2, totally ramified cover over the three edge graph.

    Builds the unique balanced type on the two vertex graph with three
    parallel edges and one marking on each side, and follows it through the
    whole machinery: ray moduli cone, non conical image, stellar fix,
    pulled back morphism checks.
    """
    from .curves import DualGraph, build_complex_from_graphs, enumerate_stable_graphs
    from .tropmaps import RubberMapType, moduli_cone

    t0 = time.time()
    contact = ContactData(2, ((3, -3),))
    theta = DualGraph((0, 0), ((0, 1), (0, 1), (0, 1)), (0, 1))
    fig_type = RubberMapType(theta, ((-1, -1, -1),), contact)
    report = Report(
        inputs={"genus": 2, "markings": 2, "contacts": [[3, -3]], "degree": 3},
    )

    mc = moduli_cone(fig_type)
    report.add("moduli cone is a ray", "map type", mc.cone.dim == 1)
    report.add(
        "edge lengths forced equal",
        "map type",
        mc.cone.rays == ((1, 1, 1),),
    )

    base = build_complex_from_graphs([theta])
    host_id = base.id_of(theta)
    host_cone = base.complex.cones[host_id]
    report.add("host cone is three dimensional", host_id, host_cone.dim == 3)
    in_full = any(
        h == base.graphs[host_id] for h in enumerate_stable_graphs(2, 2)
    )
    report.add("host graph occurs in the full moduli complex", "(2,2)", in_full)

    stable, img = forgetful_image(fig_type)
    report.add("image is the diagonal ray", host_id, img.rays == ((1, 1, 1),))
    fam = ConicalSubset(base.complex, ((host_id, img),))
    before = is_union_of_cones(base.complex, fam)
    report.add("image union of cones before subdivision", host_id, not before.ok)

    from .subdivision import stellar_subdivide

    sub = stellar_subdivide(base.complex, host_id, (1, 1, 1))
    report.subdivision = sub.summary()
    after = is_union_of_cones(sub.refined, sub.transport(fam))
    report.add("image union of cones after stellar subdivision", host_id, after.ok)

    mx = build_map_complex([fig_type], base)
    pb = pullback_subdivision(mx.forgetful, sub)
    _semistability_into(report, "X", pb)
    report.subdivision_data = sub
    rng = random.Random(seed)
    try:
        soundness_sample(sub, rng, per_cone=6)
        report.add("subdivision soundness sample", "base", True)
    except Exception:
        report.add("subdivision soundness sample", "base", False)
    report.elapsed = time.time() - t0
    return report
