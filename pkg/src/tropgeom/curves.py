"""Stable marked dual graphs and the tropical moduli complex of curves.

A dual graph records vertex genera, an edge multiset (loops allowed) and the
placement of the numbered markings.  The moduli complex has one cone per
isomorphism class, the orthant of edge lengths, with edge contractions as
face maps and graph automorphisms acting on edge coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement, permutations, product

from . import linalg as la
from .exactgeom import LinearMap, RationalCone, cone_from_generators, zero_cone
from .complexes import ConeComplex, FaceMap


class Disconnected(Exception):
    pass


class NoSuchEdge(Exception):
    pass


class Unstable(Exception):
    pass


@dataclass(frozen=True)
class DualGraph:
    genera: tuple  # genus per vertex
    edges: tuple  # (u, v) pairs with u <= v, sorted
    legs: tuple  # legs[i] = vertex carrying marking i + 1

    def __post_init__(self):
        object.__setattr__(
            self, "edges", tuple(sorted(tuple(sorted(e)) for e in self.edges))
        )
        object.__setattr__(self, "genera", tuple(self.genera))
        object.__setattr__(self, "legs", tuple(self.legs))

    @property
    def num_vertices(self):
        return len(self.genera)

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def num_legs(self):
        return len(self.legs)

    def valence(self, v) -> int:
        """Edge ends at v (loops count twice) plus legs at v."""
        ends = sum((e[0] == v) + (e[1] == v) for e in self.edges)
        return ends + sum(1 for w in self.legs if w == v)

    def legs_at(self, v):
        return tuple(i + 1 for i, w in enumerate(self.legs) if w == v)

    def is_connected(self) -> bool:
        if self.num_vertices == 0:
            return False
        parent = list(range(self.num_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edges:
            parent[find(u)] = find(v)
        return len({find(v) for v in range(self.num_vertices)}) == 1

    def is_stable(self) -> bool:
        return self.is_connected() and all(
            2 * g - 2 + self.valence(v) > 0 for v, g in enumerate(self.genera)
        )

    def to_json(self) -> dict:
        return {
            "vertices": [{"genus": g} for g in self.genera],
            "edges": [list(e) for e in self.edges],
            "legs": {str(i + 1): v for i, v in enumerate(self.legs)},
        }

    @staticmethod
    def from_json(data: dict) -> "DualGraph":
        n = len(data.get("legs", {}))
        legs = tuple(int(data["legs"][str(i + 1)]) for i in range(n))
        return DualGraph(
            tuple(int(v["genus"]) for v in data["vertices"]),
            tuple(tuple(int(x) for x in e) for e in data["edges"]),
            legs,
        )

    def to_dot(self, name: str = "graph0") -> str:
        lines = [f"graph {name} {{"]
        for v, g in enumerate(self.genera):
            lines.append(f'  v{v} [label="g={g}"];')
        for i, (u, v) in enumerate(self.edges):
            lines.append(f'  v{u} -- v{v} [label="e{i}"];')
        for i, v in enumerate(self.legs):
            lines.append(f'  leg{i + 1} [shape=none, label="{i + 1}"];')
            lines.append(f"  v{v} -- leg{i + 1} [style=dashed];")
        lines.append("}")
        return "\n".join(lines)


def genus(graph: DualGraph) -> int:
    """First Betti number of the graph plus the sum of vertex genera."""
    if not graph.is_connected():
        raise Disconnected("genus is only defined for connected graphs")
    h1 = graph.num_edges - graph.num_vertices + 1
    return h1 + sum(graph.genera)


# ---------------------------------------------------------------------------
# canonical labeling and automorphisms, with optional edge decorations


def _no_flip(d):
    return d


def _relabel(graph: DualGraph, edge_data, flip, vperm):
    """Apply a vertex permutation; returns (graph, data, eperm old->new)."""
    genera = [0] * graph.num_vertices
    for v, g in enumerate(graph.genera):
        genera[vperm[v]] = g
    legs = tuple(vperm[v] for v in graph.legs)
    rows = []
    for i, (u, v) in enumerate(graph.edges):
        a, b = vperm[u], vperm[v]
        d = edge_data[i]
        if a > b:
            a, b = b, a
            d = flip(d)
        rows.append((a, b, d, i))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    eperm = [0] * len(rows)
    for new, (_, _, _, old) in enumerate(rows):
        eperm[old] = new
    new_graph = DualGraph(tuple(genera), tuple((a, b) for a, b, _, _ in rows), legs)
    return new_graph, tuple(d for _, _, d, _ in rows), tuple(eperm)


def _candidate_perms(graph: DualGraph):
    """Vertex permutations respecting the basic vertex invariant."""
    k = graph.num_vertices
    inv = [
        (graph.genera[v], graph.valence(v), graph.legs_at(v)) for v in range(k)
    ]
    classes = {}
    for v in range(k):
        classes.setdefault(inv[v], []).append(v)
    ordered = sorted(classes)
    blocks = [classes[key] for key in ordered]
    starts = []
    pos = 0
    for b in blocks:
        starts.append(pos)
        pos += len(b)
    for arrangement in product(*[permutations(b) for b in blocks]):
        vperm = [0] * k
        for block, start in zip(arrangement, starts):
            for off, old in enumerate(block):
                vperm[old] = start + off
        yield tuple(vperm)


def canonical_with_data(graph: DualGraph, edge_data=None, flip=None):
    """Canonical relabeling of a (decorated) graph plus its automorphisms.

    Returns (canonical graph, canonical data, vperm, eperm, aut_pairs) where
    vperm/eperm translate the input labeling to the canonical one and
    aut_pairs lists the (vertex perm, edge perm) automorphisms of the
    canonical object.  Parallel edges with equal decorations contribute all
    their matchings, so the theta graph has 2 x 3! = 12 pairs.
    """
    if edge_data is None:
        edge_data = tuple(None for _ in graph.edges)
        flip = _no_flip
    if flip is None:
        flip = _no_flip
    best = None
    for vperm in _candidate_perms(graph):
        g2, d2, eperm = _relabel(graph, edge_data, flip, vperm)
        key = (g2.genera, g2.edges, d2, g2.legs)
        if best is None or key < best[0]:
            best = (key, g2, d2, vperm, eperm)
    _, cgraph, cdata, vperm, eperm = best

    aut_pairs = []
    for vp in _candidate_perms(cgraph):
        g2, d2, ep = _relabel(cgraph, cdata, flip, vp)
        if (g2.genera, g2.edges, d2, g2.legs) != (
            cgraph.genera,
            cgraph.edges,
            cdata,
            cgraph.legs,
        ):
            continue
        # all matchings within groups of indistinguishable parallel edges
        groups = {}
        for i in range(len(cgraph.edges)):
            u, v = cgraph.edges[i]
            a, b = vp[u], vp[v]
            d = cdata[i]
            if a > b:
                a, b = b, a
                d = flip(d)
            groups.setdefault((a, b, d), []).append(i)
        slots = {}
        for i, (u, v) in enumerate(cgraph.edges):
            slots.setdefault((u, v, cdata[i]), []).append(i)
        keys = sorted(groups)
        choices = [permutations(slots[key]) for key in keys]
        for assignment in product(*choices):
            eperm2 = [0] * len(cgraph.edges)
            for key, targets in zip(keys, assignment):
                for src, dst in zip(groups[key], targets):
                    eperm2[src] = dst
            aut_pairs.append((vp, tuple(eperm2)))
    return cgraph, cdata, vperm, eperm, aut_pairs


def canonical_form(graph: DualGraph):
    """Canonical representative and automorphism pairs of a bare dual graph."""
    cgraph, _, vperm, eperm, auts = canonical_with_data(graph)
    return cgraph, vperm, eperm, auts


def edge_perm_matrices(n_edges: int, aut_pairs):
    """Deduplicated edge-coordinate permutation matrices of automorphism pairs."""
    mats = {}
    for _, eperm in aut_pairs:
        rows = tuple(
            tuple(1 if eperm[old] == new else 0 for old in range(n_edges))
            for new in range(n_edges)
        )
        mats[rows] = LinearMap(rows, n_edges, n_edges)
    return sorted(mats.values(), key=lambda m: m.matrix)


# ---------------------------------------------------------------------------
# contraction and stabilization


def _merge_vertices(graph: DualGraph, edge_index: int):
    """Contract a single edge (raw labels, no canonicalization)."""
    u, v = graph.edges[edge_index]
    genera = list(graph.genera)
    if u == v:
        genera[u] += 1
        keep = lambda w: w
        drop = None
    else:
        # merge v into u, relabel everything above v down by one
        genera[u] += genera[v]
        del genera[v]

        def keep(w):
            if w == v:
                return u
            return w - 1 if w > v else w

        drop = v
    items = []
    for i, (a, b) in enumerate(graph.edges):
        if i == edge_index:
            continue
        x, y = keep(a), keep(b)
        flip = x > y
        if flip:
            x, y = y, x
        items.append((x, y, i, flip))
    items.sort(key=lambda r: (r[0], r[1]))
    legs = tuple(keep(w) for w in graph.legs)
    # presorted, so the constructor's sort leaves positions in place
    graph2 = DualGraph(tuple(genera), tuple((x, y) for x, y, _, _ in items), legs)
    return graph2, [(i, -1 if flip else 1) for _, _, i, flip in items]


def contract_subset(graph: DualGraph, edge_indices):
    """Contract a set of edges.

    Returns (raw graph, survivors) where survivors[j] = (original index,
    orientation sign) of the edge now at position j; the sign is -1 when the
    stored orientation flipped during vertex merging, which matters for any
    oriented edge decoration.
    """
    g = graph
    survivors = [(i, 1) for i in range(graph.num_edges)]
    for idx in sorted(edge_indices, reverse=True):
        pos = next((p for p, (i, _) in enumerate(survivors) if i == idx), None)
        if pos is None:
            raise NoSuchEdge(f"edge {idx} out of range")
        g, kept = _merge_vertices(g, pos)
        survivors = [
            (survivors[p][0], survivors[p][1] * sign) for p, sign in kept
        ]
    return g, survivors


def contract_edge(graph: DualGraph, edge_index: int):
    """Contract one edge; returns the canonical graph and the face embedding.

    The linear map includes the contracted graph's orthant as the face
    {length of the contracted edge = 0} of the original orthant.
    """
    if not 0 <= edge_index < graph.num_edges:
        raise NoSuchEdge(f"edge {edge_index} out of range")
    raw, survivors = contract_subset(graph, [edge_index])
    cgraph, _, eperm, _ = canonical_form(raw)
    ne, nh = graph.num_edges, cgraph.num_edges
    rows = [[0] * nh for _ in range(ne)]
    for raw_pos, (orig_idx, _) in enumerate(survivors):
        rows[orig_idx][eperm[raw_pos]] = 1
    return cgraph, LinearMap(tuple(tuple(r) for r in rows), nh, ne)


def stabilize(graph: DualGraph):
    """Remove unmarked genus 0 vertices of valence at most 2.

    Valence 2 vertices concatenate their two edges; valence 1 vertices drop
    with their edge.  Returns (canonical stable graph, length map, chains)
    where the length map sends original edge lengths to the merged sums and
    chains[j] lists the (original edge, orientation) trail of stable edge j,
    oriented from the smaller canonical endpoint.
    """
    genera = list(graph.genera)
    alive = [True] * graph.num_vertices
    # internal edges as [endpoint a, endpoint b, trail a->b]
    edges = [[u, v, [(i, 1)]] for i, (u, v) in enumerate(graph.edges)]

    def incident(v):
        out = []
        for k, (a, b, _) in enumerate(e[:3] for e in edges):
            if a == v or b == v:
                out.append(k)
        return out

    changed = True
    while changed:
        changed = False
        for v in range(graph.num_vertices):
            if not alive[v] or genera[v] != 0 or v in graph.legs:
                continue
            inc = incident(v)
            ends = sum((edges[k][0] == v) + (edges[k][1] == v) for k in inc)
            if ends == 1:
                edges.pop(inc[0])
                alive[v] = False
                changed = True
                break
            if ends == 2 and len(inc) == 2:
                k1, k2 = inc
                a1, b1, t1 = edges[k1]
                a2, b2, t2 = edges[k2]
                # orient both trails away from v
                if a1 == v:
                    start1, t1 = b1, [(i, -s) for i, s in reversed(t1)]
                else:
                    start1 = a1
                if a2 == v:
                    far2, t2 = b2, t2
                else:
                    far2, t2 = a2, [(i, -s) for i, s in reversed(t2)]
                merged = [start1, far2, t1 + t2]
                for k in sorted((k1, k2), reverse=True):
                    edges.pop(k)
                edges.append(merged)
                alive[v] = False
                changed = True
                break

    if not any(alive):
        raise Unstable("stabilization removed every vertex")
    mapping = {}
    for v in range(graph.num_vertices):
        if alive[v]:
            mapping[v] = len(mapping)
    items = []
    for a, b, trail in edges:
        x, y = mapping[a], mapping[b]
        if x > y:
            x, y = y, x
            trail = [(i, -s) for i, s in reversed(trail)]
        items.append((x, y, trail))
    items.sort(key=lambda r: (r[0], r[1]))
    raw = DualGraph(
        tuple(genera[v] for v in sorted(mapping)),
        tuple((x, y) for x, y, _ in items),
        tuple(mapping[v] for v in graph.legs),
    )
    if not raw.is_stable():
        raise Unstable("graph does not stabilize to a stable graph")
    cgraph, vperm, eperm, _ = canonical_form(raw)
    trails = [None] * cgraph.num_edges
    for pos, (a, b, trail) in enumerate(items):
        na, nb = vperm[a], vperm[b]
        t = trail if na <= nb else [(i, -s) for i, s in reversed(trail)]
        trails[eperm[pos]] = tuple(t)
    rows = [[0] * graph.num_edges for _ in range(cgraph.num_edges)]
    for j, trail in enumerate(trails):
        for i, _ in trail:
            rows[j][i] = 1
    lmap = LinearMap(tuple(tuple(r) for r in rows), graph.num_edges, cgraph.num_edges)
    return cgraph, lmap, tuple(trails)


# ---------------------------------------------------------------------------
# enumeration


_enumeration_cache = {}


def enumerate_stable_graphs(g: int, n: int):
    """All isomorphism classes of stable genus g graphs with n legs.

    Results are cached; graphs are immutable so sharing is safe.
    """
    if 2 * g - 2 + n <= 0:
        raise Unstable(f"(g, n) = ({g}, {n}) is not in the stable range")
    if (g, n) in _enumeration_cache:
        return list(_enumeration_cache[(g, n)])
    found = {}
    max_vertices = max(1, 2 * g - 2 + n)
    for k in range(1, max_vertices + 1):
        for genera in _sorted_genus_tuples(k, g):
            e_count = g - sum(genera) + k - 1
            if e_count < 0:
                continue
            pairs = [(i, j) for i in range(k) for j in range(i, k)]
            for edges in combinations_with_replacement(pairs, e_count):
                ends = [0] * k
                for u, v in edges:
                    ends[u] += 1
                    ends[v] += 1
                if any(
                    2 * gv - 2 + ends[v] + n <= 0 for v, gv in enumerate(genera)
                ):
                    continue
                for legs in product(range(k), repeat=n):
                    graph = DualGraph(genera, edges, legs)
                    if not graph.is_stable():
                        continue
                    cgraph, _, _, _ = canonical_form(graph)
                    key = (cgraph.genera, cgraph.edges, cgraph.legs)
                    if key not in found:
                        found[key] = cgraph
    result = sorted(
        found.values(), key=lambda h: (h.num_edges, h.genera, h.edges, h.legs)
    )
    _enumeration_cache[(g, n)] = result
    return list(result)


def _sorted_genus_tuples(k: int, g: int):
    """Nondecreasing genus tuples of length k with sum at most g."""
    def rec(remaining, minimum, length):
        if length == 0:
            yield ()
            return
        for first in range(minimum, remaining + 1):
            for rest in rec(remaining - first, first, length - 1):
                yield (first,) + rest
    yield from rec(g, 0, k)


_oracle_cache = {}


def enumerate_stable_graphs_bruteforce(g: int, n: int):
    """Independent oracle: raw generation with pairwise isomorphism dedup."""
    if 2 * g - 2 + n <= 0:
        raise Unstable(f"(g, n) = ({g}, {n}) is not in the stable range")
    if (g, n) in _oracle_cache:
        return list(_oracle_cache[(g, n)])
    classes = []
    max_vertices = max(1, 2 * g - 2 + n)
    for k in range(1, max_vertices + 1):
        pairs = [(i, j) for i in range(k) for j in range(i, k)]
        for genera in product(range(g + 1), repeat=k):
            e_count = g - sum(genera) + k - 1
            if e_count < 0:
                continue
            for edges in combinations_with_replacement(pairs, e_count):
                for legs in product(range(k), repeat=n):
                    graph = DualGraph(genera, edges, legs)
                    if not graph.is_stable():
                        continue
                    if genus(graph) != g:
                        continue
                    if not any(_isomorphic(graph, other) for other in classes):
                        classes.append(graph)
    _oracle_cache[(g, n)] = classes
    return list(classes)


def _isomorphic(a: DualGraph, b: DualGraph) -> bool:
    """Direct isomorphism test by trying all vertex bijections."""
    if (
        a.num_vertices != b.num_vertices
        or a.num_edges != b.num_edges
        or sorted(a.genera) != sorted(b.genera)
    ):
        return False
    for vperm in permutations(range(a.num_vertices)):
        if any(a.genera[v] != b.genera[vperm[v]] for v in range(a.num_vertices)):
            continue
        if tuple(vperm[v] for v in a.legs) != b.legs:
            continue
        mapped = sorted(tuple(sorted((vperm[u], vperm[v]))) for u, v in a.edges)
        if tuple(mapped) == b.edges:
            return True
    return False


# ---------------------------------------------------------------------------
# the moduli complex


@dataclass
class CurveModuliComplex:
    complex: ConeComplex
    graphs: dict  # cone id -> canonical DualGraph

    def id_of(self, graph: DualGraph) -> str:
        cgraph, _, _, _ = canonical_form(graph)
        for cid, h in self.graphs.items():
            if h == cgraph:
                return cid
        raise KeyError("graph is not a cone of this complex")


def _orthant(n: int) -> RationalCone:
    if n == 0:
        return zero_cone(0)
    return cone_from_generators(la.identity_matrix(n), n)


def build_complex_from_graphs(seed_graphs) -> CurveModuliComplex:
    """The moduli complex generated by the given graphs under edge contraction."""
    canon = {}
    queue = []
    for graph in seed_graphs:
        cgraph, _, _, _ = canonical_form(graph)
        key = (cgraph.genera, cgraph.edges, cgraph.legs)
        if key not in canon:
            canon[key] = cgraph
            queue.append(cgraph)
    while queue:
        graph = queue.pop()
        for i in range(graph.num_edges):
            contracted, _ = contract_edge(graph, i)
            key = (contracted.genera, contracted.edges, contracted.legs)
            if key not in canon:
                canon[key] = contracted
                queue.append(contracted)

    ordered = sorted(
        canon.values(), key=lambda h: (h.num_edges, h.genera, h.edges, h.legs)
    )
    ids = {}
    graphs = {}
    cones = {}
    auts = {}
    for k, graph in enumerate(ordered):
        cid = f"G{k}"
        ids[(graph.genera, graph.edges, graph.legs)] = cid
        graphs[cid] = graph
        cones[cid] = _orthant(graph.num_edges)
        _, _, _, aut_pairs = canonical_form(graph)
        auts[cid] = edge_perm_matrices(graph.num_edges, aut_pairs)

    faces = set()
    for cid, graph in graphs.items():
        ne = graph.num_edges
        for size in range(1, ne + 1):
            for subset in combinations(range(ne), size):
                raw, survivors = contract_subset(graph, subset)
                cgraph, _, eperm, _ = canonical_form(raw)
                sub_id = ids[(cgraph.genera, cgraph.edges, cgraph.legs)]
                rows = [[0] * cgraph.num_edges for _ in range(ne)]
                for raw_pos, (orig_idx, _) in enumerate(survivors):
                    rows[orig_idx][eperm[raw_pos]] = 1
                m = LinearMap(tuple(tuple(r) for r in rows), cgraph.num_edges, ne)
                faces.add(FaceMap(sub_id, cid, m))
    cx = ConeComplex(cones, faces, auts)
    return CurveModuliComplex(cx, graphs)


def build_moduli_complex(g: int, n: int, max_edges: int | None = None) -> CurveModuliComplex:
    """The tropical moduli complex of stable genus g, n marked curves.

    With max_edges the complex is truncated to the contraction closed
    subcomplex of graphs with at most that many edges, which keeps large
    moduli spaces at desk scale.
    """
    graphs = enumerate_stable_graphs(g, n)
    if max_edges is not None:
        graphs = [h for h in graphs if h.num_edges <= max_edges]
    return build_complex_from_graphs(graphs)
