"""Closed flat 3-manifolds as glued cuboids or triangular prisms.

A complex is a finite set of copies of one model cell (a rectangular
cuboid or a right prism over an equilateral triangle) together with a
facet pairing.  Each pairing carries a symmetry label: crossing the
pairing from cell c to cell c' develops c' at the across-position
rho_f composed with the labeled model symmetry.  All geometry is exact.

Verification is the oracle used throughout: interior edges must close up
with total dihedral angle 2pi, vertex links must be 2-spheres, and the
holonomy of the development must be a torsion-free crystallographic
group with a rank-3 translation lattice.  First homology comes from the
dual spine (generators are facet pairings, relations are the edge
cycles) via integer Smith normal form, and the manifold is identified
against a reference table of invariants computed from standard
crystallographic generators.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .abelian import abelian_invariants, row_lattice_basis, solve_integer
from .euclid import Isometry, identity_isometry, kernel_basis, mat_det, vec
from .field import AlgNum, alg, make_algnum, sqrt_rational

__all__ = [
    "Model",
    "cuboid_model",
    "prism_model",
    "CellComplex3",
    "FlatVerdict",
    "NotAManifold",
    "NotFlat",
    "NotIdentified",
    "UnsupportedFamily",
    "BadParams",
    "NotProperWithin",
    "StructureError",
    "verify_flat_manifold",
    "verify_structure",
    "subdivide",
    "make_proper",
    "builtin_manifold",
    "write_complex",
    "read_complex",
]


class NotAManifold(ValueError):
    pass


class NotFlat(NotAManifold):
    pass


class NotIdentified(ValueError):
    pass


class UnsupportedFamily(ValueError):
    pass


class BadParams(ValueError):
    pass


class NotProperWithin(ValueError):
    pass


class StructureError(ValueError):
    pass


HALF = Fraction(1, 2)
THIRD = Fraction(1, 3)


class Model:
    """A model cell: exact vertex coordinates, facets, edges, symmetries."""

    def __init__(self, family, dims, vertices, facets, edge_angles):
        self.family = family
        self.dims = dims
        self.vertices = vertices  # list of coordinate tuples
        self.facets = facets  # name -> tuple of vertex ids
        self.facet_names = tuple(sorted(facets))
        # edges: frozenset of 2 vertex ids -> dihedral angle as Fraction of pi
        self.edge_angles = edge_angles
        self.edges = tuple(sorted(edge_angles, key=sorted))
        self._point_to_vid = {vertices[i]: i for i in range(len(vertices))}
        self._facet_points = {
            name: frozenset(vertices[v] for v in vs) for name, vs in facets.items()
        }
        self._points_to_facet = {v: k for k, v in self._facet_points.items()}
        self.across = {}  # facet -> Isometry placing the neighbor cell
        self.reflect = {}  # facet -> reflection in the facet's plane
        self.symmetries: list[Isometry] = []
        self.sym_facet_perm: list[dict] = []
        self.sym_vertex_perm: list[dict] = []
        self.opposite = {}  # facet -> facet the across-map carries onto it
        self._edge_facets = {
            e: tuple(
                name
                for name, pts in self._facet_points.items()
                if all(vertices[v] in pts for v in e)
            )
            for e in self.edges
        }

    # -- lookups ---------------------------------------------------------

    def vertex_id(self, point):
        vid = self._point_to_vid.get(tuple(point))
        if vid is None:
            raise NotAManifold(f"image point {point} is not a model vertex")
        return vid

    def facet_of_points(self, points) -> str:
        name = self._points_to_facet.get(frozenset(points))
        if name is None:
            raise NotAManifold("image polygon is not a model facet")
        return name

    def facets_of_edge(self, edge):
        return self._edge_facets[edge]

    def facets_of_vertex(self, vid):
        p = self.vertices[vid]
        return [name for name, pts in self._facet_points.items() if p in pts]

    def edges_of_vertex(self, vid):
        return [e for e in self.edges if vid in e]

    def map_edge(self, iso: Isometry, edge):
        a, b = tuple(edge)
        pa, pb = iso(self.vertices[a]), iso(self.vertices[b])
        return frozenset((self.vertex_id(pa), self.vertex_id(pb)))

    def map_facet(self, iso: Isometry, facet: str) -> str:
        pts = [iso(p) for p in self._facet_points[facet]]
        return self.facet_of_points(pts)

    def _register_symmetries(self, isos):
        # identity first, then a canonical deterministic order
        ident = [s for s in isos if s.is_identity()]
        rest = sorted(
            (s for s in isos if not s.is_identity()), key=lambda s: s.key()
        )
        self.symmetries = ident + rest
        for s in self.symmetries:
            self.sym_facet_perm.append(
                {f: self.map_facet(s, f) for f in self.facet_names}
            )
            self.sym_vertex_perm.append(
                {
                    v: self.vertex_id(s(self.vertices[v]))
                    for v in range(len(self.vertices))
                }
            )
        self._sym_index = {s.key(): i for i, s in enumerate(self.symmetries)}

    def sym_index(self, iso: Isometry) -> int | None:
        return self._sym_index.get(iso.key())

    def sym_name(self, idx: int) -> str:
        return f"g{idx}"

    def sym_by_name(self, name: str) -> int:
        if not name.startswith("g"):
            raise StructureError(f"unknown symmetry name {name!r}")
        idx = int(name[1:])
        if not 0 <= idx < len(self.symmetries):
            raise StructureError(f"symmetry index {idx} out of range")
        return idx


def cuboid_model(dx, dy, dz) -> Model:
    dims = (alg(dx), alg(dy), alg(dz))
    verts = []
    for z in (0, 1):
        for y in (0, 1):
            for x in (0, 1):
                verts.append(
                    (
                        dims[0] * x,
                        dims[1] * y,
                        dims[2] * z,
                    )
                )
    # vertex id = x + 2y + 4z
    facets = {
        "x0": tuple(v for v in range(8) if v % 2 == 0),
        "x1": tuple(v for v in range(8) if v % 2 == 1),
        "y0": tuple(v for v in range(8) if (v // 2) % 2 == 0),
        "y1": tuple(v for v in range(8) if (v // 2) % 2 == 1),
        "z0": tuple(v for v in range(8) if v < 4),
        "z1": tuple(v for v in range(8) if v >= 4),
    }
    edge_angles = {}
    for a in range(8):
        for b in range(a + 1, 8):
            if bin(a ^ b).count("1") == 1:
                edge_angles[frozenset((a, b))] = HALF
    m = Model("cuboid", dims, verts, facets, edge_angles)
    zero, one = alg(0), alg(1)
    axes = {"x": 0, "y": 1, "z": 2}
    for name in m.facet_names:
        ax, side = axes[name[0]], int(name[1])
        shift = [zero, zero, zero]
        shift[ax] = dims[ax] if side == 1 else -dims[ax]
        m.across[name] = Isometry(identity_isometry().m, shift)
        refl = [[one if i == j else zero for j in range(3)] for i in range(3)]
        refl[ax][ax] = alg(-1)
        toff = [zero, zero, zero]
        toff[ax] = 2 * dims[ax] if side == 1 else zero
        m.reflect[name] = Isometry(refl, toff)
        m.opposite[name] = f"{name[0]}{1 - side}"
    # symmetries: signed axis permutations compatible with the dimensions
    from itertools import permutations, product

    isos = []
    for perm in permutations(range(3)):
        if any(dims[perm[i]] != dims[i] for i in range(3)):
            continue
        for signs in product((1, -1), repeat=3):
            mat = [[zero] * 3 for _ in range(3)]
            t = [zero, zero, zero]
            for i in range(3):
                mat[perm[i]][i] = alg(signs[i])
                if signs[i] < 0:
                    t[perm[i]] = dims[perm[i]]
            isos.append(Isometry(mat, t))
    m._register_symmetries(isos)
    return m


def prism_model(side, height) -> Model:
    s, h = alg(side), alg(height)
    r3h = sqrt_rational(3) / 2
    tri = [
        (alg(0), alg(0)),
        (s, alg(0)),
        (s / 2, s * r3h),
    ]
    verts = [(p[0], p[1], alg(0)) for p in tri] + [(p[0], p[1], h) for p in tri]
    facets = {
        "t0": (0, 1, 2),
        "t1": (3, 4, 5),
        "s0": (0, 1, 4, 3),
        "s1": (1, 2, 5, 4),
        "s2": (2, 0, 3, 5),
    }
    edge_angles = {}
    for k in range(3):
        edge_angles[frozenset((k, (k + 1) % 3))] = HALF
        edge_angles[frozenset((k + 3, (k + 1) % 3 + 3))] = HALF
        edge_angles[frozenset((k, k + 3))] = THIRD
    m = Model("prism", (s, h), verts, facets, edge_angles)
    zero, one = alg(0), alg(1)
    ident3 = identity_isometry().m
    m.across["t0"] = Isometry(ident3, (zero, zero, -h))
    m.across["t1"] = Isometry(ident3, (zero, zero, h))
    m.reflect["t0"] = Isometry(
        ((one, zero, zero), (zero, one, zero), (zero, zero, alg(-1))),
        (zero, zero, zero),
    )
    m.reflect["t1"] = Isometry(
        ((one, zero, zero), (zero, one, zero), (zero, zero, alg(-1))),
        (zero, zero, 2 * h),
    )
    m.opposite["t0"] = "t1"
    m.opposite["t1"] = "t0"
    rot_pi = ((alg(-1), zero, zero), (zero, alg(-1), zero), (zero, zero, one))
    for k, name in enumerate(("s0", "s1", "s2")):
        a, b = tri[k], tri[(k + 1) % 3]
        m.across[name] = Isometry(rot_pi, (a[0] + b[0], a[1] + b[1], zero))
        # reflection in the vertical plane through the edge a-b
        ux, uy = b[0] - a[0], b[1] - a[1]
        nn = ux * ux + uy * uy
        rm = (
            ((ux * ux - uy * uy) / nn, 2 * ux * uy / nn, zero),
            (2 * ux * uy / nn, (uy * uy - ux * ux) / nn, zero),
            (zero, zero, one),
        )
        base = Isometry(rm, (zero, zero, zero))
        shift = Isometry(ident3, (a[0], a[1], zero))
        unshift = Isometry(ident3, (-a[0], -a[1], zero))
        m.reflect[name] = shift.compose(base.compose(unshift))
        m.opposite[name] = name
    # symmetries: dihedral group of the triangle times the height flip
    cx, cy = s / 2, s * sqrt_rational(3) / 6
    c = Isometry(ident3, (cx, cy, zero))
    cinv = Isometry(ident3, (-cx, -cy, zero))
    half = alg(Fraction(1, 2))
    rot120 = Isometry(
        ((-half, -r3h, zero), (r3h, -half, zero), (zero, zero, one)),
        (zero, zero, zero),
    )
    tri_syms = [identity_isometry()]
    tri_syms.append(c.compose(rot120.compose(cinv)))
    tri_syms.append(tri_syms[1].compose(tri_syms[1]))
    refl0 = m.reflect["s0"]  # plane y = 0: a triangle symmetry through vertex axis?
    # reflections of the triangle: through each vertex and the opposite
    # edge midpoint; the s0-plane reflection fixes the edge 0-1, which is
    # not a triangle symmetry -- build the median reflections directly
    refls = []
    for k in range(3):
        a = tri[k]
        mid = (
            (tri[(k + 1) % 3][0] + tri[(k + 2) % 3][0]) / 2,
            (tri[(k + 1) % 3][1] + tri[(k + 2) % 3][1]) / 2,
        )
        ux, uy = mid[0] - a[0], mid[1] - a[1]
        nn = ux * ux + uy * uy
        rm = (
            ((ux * ux - uy * uy) / nn, 2 * ux * uy / nn, zero),
            (2 * ux * uy / nn, (uy * uy - ux * ux) / nn, zero),
            (zero, zero, one),
        )
        shift = Isometry(ident3, (a[0], a[1], zero))
        unshift = Isometry(ident3, (-a[0], -a[1], zero))
        refls.append(shift.compose(Isometry(rm, (zero, zero, zero)).compose(unshift)))
    tri_syms.extend(refls)
    zflip = Isometry(
        ((one, zero, zero), (zero, one, zero), (zero, zero, alg(-1))),
        (zero, zero, h),
    )
    isos = list(tri_syms) + [zflip.compose(t) for t in tri_syms]
    m._register_symmetries(isos)
    return m


@dataclass
class Pairing:
    cell_a: int
    facet_a: str
    cell_b: int
    facet_b: str
    sym_ab: int  # model symmetry index labeling the crossing a -> b
    sym_ba: int


class CellComplex3:
    def __init__(self, model: Model, ncells: int, pairs, kind=None, special=None, colors=None):
        """pairs: iterable of ((cell, facet), (cell, facet), sym index)."""
        self.model = model
        self.ncells = ncells
        self.kind = kind
        self.special = dict(special or {})
        self.colors = dict(colors or {})
        self.pairings: dict[tuple, tuple] = {}
        self.pair_list: list[Pairing] = []
        for (ca, fa), (cb, fb), sym in pairs:
            if (ca, fa) == (cb, fb):
                raise NotAManifold(f"facet slot {(ca, fa)} glued to itself")
            if (ca, fa) in self.pairings or (cb, fb) in self.pairings:
                raise NotAManifold("facet slot glued twice")
            sym_ba = self._reverse_sym(fa, fb, sym)
            self._check_label(fa, fb, sym)
            self.pairings[(ca, fa)] = (cb, fb, sym)
            self.pairings[(cb, fb)] = (ca, fa, sym_ba)
            self.pair_list.append(Pairing(ca, fa, cb, fb, sym, sym_ba))
        for c in range(ncells):
            for f in model.facet_names:
                if (c, f) not in self.pairings:
                    raise NotAManifold(f"facet slot {(c, f)} is unglued")
        self._trans_cache: dict = {}
        self._trans_inv_cache: dict = {}
        self._edge_walks = None

    def _check_label(self, fa, fb, sym):
        # the transition rho_fa . sym must carry facet fb onto facet fa
        model = self.model
        image = model.sym_facet_perm[sym][fb]
        if image != model.opposite[fa]:
            raise NotAManifold(
                f"pairing label does not match facets: sym maps {fb} to {image},"
                f" expected {model.opposite[fa]}"
            )

    def _reverse_sym(self, fa, fb, sym):
        # T(b->a) = T(a->b)^{-1} = rho_fb . sym_ba
        model = self.model
        t = model.across[fa].compose(model.symmetries[sym])
        sym_ba_iso = model.across[fb].inverse().compose(t.inverse())
        idx = model.sym_index(sym_ba_iso)
        if idx is None:
            raise NotAManifold("reverse transition is not a model symmetry")
        return idx

    def transition(self, cell, facet) -> Isometry:
        """Develops the neighbor across (cell, facet) in this cell's frame."""
        _, _, sym = self.pairings[(cell, facet)]
        key = (facet, sym)
        t = self._trans_cache.get(key)
        if t is None:
            t = self.model.across[facet].compose(self.model.symmetries[sym])
            self._trans_cache[key] = t
        return t

    def transition_inverse(self, cell, facet) -> Isometry:
        _, _, sym = self.pairings[(cell, facet)]
        key = (facet, sym)
        t = self._trans_inv_cache.get(key)
        if t is None:
            t = self.transition(cell, facet).inverse()
            self._trans_inv_cache[key] = t
        return t

    def neighbor(self, cell, facet):
        cb, fb, _ = self.pairings[(cell, facet)]
        return cb, fb

    # -- edge and vertex classes ------------------------------------------

    def edge_walks(self):
        """One walk per edge class: list of (states, total angle/pi).

        A state is (cell, edge, facet entered through); consecutive states
        cross the other facet containing the edge.  The reverse orientation
        of each closed walk is marked visited as well, so every geometric
        edge class appears exactly once.
        """
        if self._edge_walks is not None:
            return self._edge_walks
        model = self.model
        visited = set()
        walks = []
        for c in range(self.ncells):
            for e in model.edges:
                for f_in in model.facets_of_edge(e):
                    state = (c, e, f_in)
                    if state in visited:
                        continue
                    states = []
                    total = Fraction(0)
                    cur = state
                    for _ in range(100000):
                        states.append(cur)
                        visited.add(cur)
                        cc, ce, cf_in = cur
                        total += model.edge_angles[ce]
                        f_out = next(
                            x for x in model.facets_of_edge(ce) if x != cf_in
                        )
                        t_inv = self.transition_inverse(cc, f_out)
                        cb, fb, _sym = self.pairings[(cc, f_out)]
                        e2 = model.map_edge(t_inv, ce)
                        cur = (cb, e2, fb)
                        if cur == state:
                            break
                    else:
                        raise NotAManifold("edge walk failed to close")
                    for cc, ce, cf_in in states:
                        f_out = next(
                            x for x in model.facets_of_edge(ce) if x != cf_in
                        )
                        visited.add((cc, ce, f_out))
                    walks.append((states, total))
        self._edge_walks = walks
        return walks

    def vertex_classes(self):
        """Union-find classes of (cell, vertex) slots."""
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        model = self.model
        for c in range(self.ncells):
            for v in range(len(model.vertices)):
                parent[(c, v)] = (c, v)
        for (c, f), (cb, fb, sym) in self.pairings.items():
            t_inv = model.across[f].compose(model.symmetries[sym]).inverse()
            for v in model.facets[f]:
                v2 = model.vertex_id(t_inv(model.vertices[v]))
                union((c, v), (cb, v2))
        classes: dict = {}
        for slot in parent:
            classes.setdefault(find(slot), []).append(slot)
        return list(classes.values())

    def edge_classes(self):
        """Classes of (cell, edge) slots with their walk data."""
        walks = self.edge_walks()
        seen = {}
        out = []
        for states, total in walks:
            key = frozenset((c, e) for c, e, _ in states)
            if key not in seen:
                seen[key] = True
                out.append((sorted(key, key=lambda s: (s[0], sorted(s[1]))), total))
        return out


# -- oracle ---------------------------------------------------------------


@dataclass
class FlatVerdict:
    is_flat_manifold: bool
    orientable: bool
    holonomy_order: int
    holonomy_tag: str
    h1: tuple  # (free rank, torsion tuple)
    name: str

    def __str__(self):
        r, tors = self.h1
        h1 = " + ".join(["Z"] * r + [f"Z{t}" for t in tors]) or "0"
        return (
            f"{self.name}: orientable={self.orientable}, "
            f"holonomy={self.holonomy_tag}, H1={h1}"
        )


def _holonomy_tag(group) -> str:
    order = len(group)
    if order == 1:
        return "trivial"

    def elt_order(m):
        acc = m
        for k in range(1, 13):
            if acc.is_identity():
                return k
            acc = acc.compose(m)
        raise NotFlat("point group element of order > 12")

    rotations = [Isometry(g, (alg(0),) * 3) for g in group]
    orders = sorted(elt_order(g) for g in rotations)
    mx = orders[-1]
    if order == 2:
        return "Z2"
    if order == 3:
        return "Z3"
    if order == 4:
        return "Z4" if mx == 4 else "Z2xZ2"
    if order == 6:
        return "Z6" if mx == 6 else "S3"
    return f"order{order}"


def _vector_to_q24(v) -> list[Fraction]:
    out = []
    for x in v:
        out.extend(x.coords)
    return out


def _q24_rows_to_int(rows):
    denom = 1
    for row in rows:
        for x in row:
            denom = denom * x.denominator // gcd(denom, x.denominator)
    return [[int(x * denom) for x in row] for row in rows], denom


def develop(complex: CellComplex3):
    """Spanning-tree placements and the holonomy generators (one per
    non-tree pairing, plus identity markers for tree pairings)."""
    place = {0: identity_isometry()}
    tree_pairs = set()
    order = [0]
    queue = [0]
    while queue:
        c = queue.pop(0)
        for f in complex.model.facet_names:
            cb, fb, sym = complex.pairings[(c, f)]
            if cb not in place:
                place[cb] = place[c].compose(complex.transition(c, f))
                tree_pairs.add(frozenset(((c, f), (cb, fb))))
                order.append(cb)
                queue.append(cb)
    if len(place) != complex.ncells:
        raise NotAManifold("complex is not connected")
    gens = []
    for p in complex.pair_list:
        key = frozenset(((p.cell_a, p.facet_a), (p.cell_b, p.facet_b)))
        if key in tree_pairs:
            gens.append(None)
            continue
        hol = (
            place[p.cell_a]
            .compose(complex.transition(p.cell_a, p.facet_a))
            .compose(place[p.cell_b].inverse())
        )
        gens.append(hol)
    return place, gens, tree_pairs


def _point_group(gens):
    zero3 = (alg(0),) * 3
    ident = identity_isometry()
    group = {ident.key(): ident}
    frontier = [ident]
    rot_gens = [Isometry(g.m, zero3) for g in gens if g is not None]
    while frontier:
        nxt = []
        for g in frontier:
            for r in rot_gens:
                cand = g.compose(r)
                if cand.key() not in group:
                    group[cand.key()] = cand
                    nxt.append(cand)
        frontier = nxt
        if len(group) > 48:
            raise NotFlat("holonomy point group exceeds crystallographic bounds")
    return list(group.values())


def _homology_from_spine(complex: CellComplex3, tree_pairs) -> tuple:
    gen_index = {}
    for i, p in enumerate(complex.pair_list):
        gen_index[(p.cell_a, p.facet_a)] = (i, 1)
        gen_index[(p.cell_b, p.facet_b)] = (i, -1)
    rows = []
    for states, _total in complex.edge_walks():
        row = [0] * len(complex.pair_list)
        seen_key = None
        for c, e, f_in in states:
            f_out = next(
                x for x in complex.model.facets_of_edge(e) if x != f_in
            )
            i, sgn = gen_index[(c, f_out)]
            row[i] += sgn
        if any(row):
            rows.append(row)
    for i, p in enumerate(complex.pair_list):
        key = frozenset(((p.cell_a, p.facet_a), (p.cell_b, p.facet_b)))
        if key in tree_pairs:
            row = [0] * len(complex.pair_list)
            row[i] = 1
            rows.append(row)
    return abelian_invariants(rows, len(complex.pair_list))


def verify_flat_manifold(complex: CellComplex3) -> FlatVerdict:
    # local flatness: edges close at 2pi
    for states, total in complex.edge_walks():
        if total != 2:
            raise NotFlat(
                f"edge class at {states[0][:2]} has total angle {total}*pi"
            )
    # vertex links are 2-spheres: chi = V - E + F with E = 3F/2
    link_vertices: dict = {}
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    model = complex.model
    for c in range(complex.ncells):
        for v in range(len(model.vertices)):
            for e in model.edges_of_vertex(v):
                parent[(c, v, e)] = (c, v, e)
    for (c, f), (cb, fb, sym) in complex.pairings.items():
        t_inv = model.across[f].compose(model.symmetries[sym]).inverse()
        fverts = set(model.facets[f])
        for e in model.edges:
            a, b = tuple(e)
            if a in fverts and b in fverts:
                e2 = model.map_edge(t_inv, e)
                for v in e:
                    v2 = model.vertex_id(t_inv(model.vertices[v]))
                    union((c, v, e), (cb, v2, e2))
    vclasses = complex.vertex_classes()
    ends_by_vclass: dict = {}
    slot_to_vclass = {}
    for i, cls in enumerate(vclasses):
        for slot in cls:
            slot_to_vclass[slot] = i
    for (c, v, e) in parent:
        ends_by_vclass.setdefault(slot_to_vclass[(c, v)], set()).add(
            find((c, v, e))
        )
    for i, cls in enumerate(vclasses):
        f_count = len(cls)
        v_count = len(ends_by_vclass[i])
        chi = v_count - Fraction(3 * f_count, 2) + f_count
        if chi != 2:
            raise NotAManifold(
                f"vertex link at {cls[0]} has Euler characteristic {chi}"
            )
    # holonomy development
    place, gens, tree_pairs = develop(complex)
    hol_gens = [g for g in gens if g is not None]
    group = _point_group(hol_gens)
    # coset representatives as affine maps
    reps = {identity_isometry().m: identity_isometry()}
    frontier = [identity_isometry()]
    while frontier:
        nxt = []
        for r in frontier:
            for g in hol_gens:
                cand = r.compose(g)
                if cand.m not in reps:
                    reps[cand.m] = cand
                    nxt.append(cand)
        frontier = nxt
    if len(reps) != len(group):
        raise NotFlat("holonomy image is not the closure of its rotations")
    # kernel translations via Schreier generators
    trans_vectors = []
    for r in reps.values():
        for g in hol_gens:
            prod = r.compose(g)
            k = prod.compose(reps[prod.m].inverse())
            if any(
                k.m[i][j] != (alg(1) if i == j else alg(0))
                for i in range(3)
                for j in range(3)
            ):
                raise AssertionError("Schreier element has nontrivial rotation")
            if any(not x.is_zero() for x in k.t):
                trans_vectors.append(k.t)
    # rank over the field must be 3 (cocompact) and the Z-module must be
    # discrete: its Q-rank equals its real rank
    q_rows = [_vector_to_q24(v) for v in trans_vectors]
    int_rows, _ = _q24_rows_to_int(q_rows)
    basis24 = row_lattice_basis(int_rows)
    if len(basis24) != 3:
        raise NotFlat(
            f"translation lattice has Z-rank {len(basis24)}, expected 3"
        )
    mat = [list(v) for v in trans_vectors]
    rank = _field_rank(mat)
    if rank != 3:
        raise NotFlat(f"translations span a {rank}-dimensional space")
    # torsion freeness: no coset contains an element with a fixed point
    lattice_cols = [list(map(int, b)) for b in basis24]
    for r in reps.values():
        if r.is_identity():
            continue
        if _coset_has_fixed_point(r, lattice_cols):
            raise NotFlat("holonomy contains a torsion element")
    orientable = all(mat_det(g.m) == alg(1) for g in group)
    h1 = _homology_from_spine(complex, tree_pairs)
    tag = _holonomy_tag([g.m for g in group])
    from .bieberbach import identify_invariants

    name = identify_invariants(orientable, tag, h1)
    return FlatVerdict(True, orientable, len(group), tag, h1, name)


def _field_rank(rows) -> int:
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if not rows[i][c].is_zero()), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        d = rows[r][c]
        rows[r] = [x / d for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        r += 1
        rank += 1
    return rank


def _coset_has_fixed_point(rep: Isometry, lattice_cols) -> bool:
    """Whether some element (rotation of rep, rep.t + lattice) fixes a point.

    The elements over this coset are (M, t + l) for l in the lattice; one
    of them has a fixed point iff t + l lies in Im(I - M) for some l.
    Functionals vanishing on Im(I - M) reduce this to an integer
    membership problem.
    """
    one, zero = alg(1), alg(0)
    imat = [
        [(one if i == j else zero) - rep.m[i][j] for j in range(3)]
        for i in range(3)
    ]
    # kernel of the transpose = functionals vanishing on the image
    imat_t = [list(col) for col in zip(*imat)]
    w = kernel_basis(imat_t)
    if not w:
        return True  # I - M invertible: a fixed point always exists
    # condition: W t in W (Z-lattice)
    proj_t = [sum((wi * ti for wi, ti in zip(wrow, rep.t)), alg(0)) for wrow in w]
    proj_basis = []
    for vec24 in lattice_cols:
        v = _q24_to_vector(vec24)
        proj_basis.append(
            [sum((wi * vi for wi, vi in zip(wrow, v)), alg(0)) for wrow in w]
        )
    # integer solvability in 8*k rational coordinates
    target_q = _vector_to_q24(proj_t)
    cols_q = [_vector_to_q24(pb) for pb in proj_basis]
    denom = 1
    for row in cols_q + [target_q]:
        for x in row:
            denom = denom * x.denominator // gcd(denom, x.denominator)
    cols_i = [[int(x * denom) for x in row] for row in cols_q]
    target_i = [int(x * denom) for x in target_q]
    return solve_integer(cols_i, target_i) is not None


def _q24_to_vector(row24):
    out = []
    for k in range(3):
        coords = row24[8 * k : 8 * k + 8]
        out.append(AlgNum(coords))
    return tuple(out)


# -- structures -----------------------------------------------------------


def verify_structure(complex: CellComplex3, kind: str) -> bool:
    model = complex.model
    if kind == "layered":
        if model.family != "cuboid":
            raise StructureError("layered structures live on cuboid complexes")
        for c in range(complex.ncells):
            sp = complex.special.get(c)
            if not sp or len(sp) != 2:
                raise StructureError(f"cell {c} lacks a special facet pair")
            f1, f2 = sorted(sp)
            if model.opposite[f1] != f2:
                raise StructureError(
                    f"cell {c}: special facets {f1},{f2} are not opposite"
                )
        for p in complex.pair_list:
            mirror = (
                complex.model.across[p.facet_a]
                .compose(model.symmetries[p.sym_ab])
                .inverse()
                .compose(model.reflect[p.facet_a])
            )
            image = {model.map_facet(mirror, f) for f in complex.special[p.cell_a]}
            if image != set(complex.special[p.cell_b]):
                raise StructureError(
                    f"pairing {(p.cell_a, p.facet_a)}—{(p.cell_b, p.facet_b)}:"
                    " reflection does not match special facets"
                )
        return True
    if kind == "marked":
        if model.family != "prism":
            raise StructureError("marked structures live on prism complexes")
        swap = {"R": "R", "Y": "B", "B": "Y"}
        for c in range(complex.ncells):
            cols = [complex.colors.get((c, v)) for v in range(6)]
            if None in cols:
                raise StructureError(f"cell {c} has uncolored vertices")
            if set(cols[:3]) != {"R", "Y", "B"}:
                raise StructureError(f"cell {c}: bottom colors are not R,Y,B")
            for v in range(3):
                if cols[v + 3] != swap[cols[v]]:
                    raise StructureError(
                        f"cell {c}: top color above {cols[v]} must be"
                        f" {swap[cols[v]]}, got {cols[v + 3]}"
                    )
        for p in complex.pair_list:
            mirror = (
                complex.model.across[p.facet_a]
                .compose(model.symmetries[p.sym_ab])
                .inverse()
                .compose(model.reflect[p.facet_a])
            )
            for v in range(6):
                v2 = model.vertex_id(mirror(model.vertices[v]))
                if complex.colors[(p.cell_a, v)] != complex.colors[(p.cell_b, v2)]:
                    raise StructureError(
                        f"pairing {(p.cell_a, p.facet_a)}: colors are not"
                        " mirror-symmetric"
                    )
        return True
    raise StructureError(f"unknown structure kind {kind!r}")


def cell_mirror_map(complex: CellComplex3, pairing: Pairing) -> Isometry:
    """The reflection-through-the-shared-facet map model(a) -> model(b)."""
    model = complex.model
    return (
        model.across[pairing.facet_a]
        .compose(model.symmetries[pairing.sym_ab])
        .inverse()
        .compose(model.reflect[pairing.facet_a])
    )


# -- subdivision -----------------------------------------------------------


def _sub_placements(model: Model, params):
    """Placements of the refined cells inside the model, plus the refined model."""
    if model.family == "cuboid":
        n = params
        if not isinstance(n, int) or n < 1:
            raise BadParams("cuboid subdivision takes an integer n >= 1")
        a, b, c = model.dims
        sub = cuboid_model(a / n, b / n, c / n)
        out = []
        ident3 = identity_isometry().m
        for k in range(n):
            for j in range(n):
                for i in range(n):
                    out.append(
                        Isometry(ident3, (a * i / n, b * j / n, c * k / n))
                    )
        return sub, out
    if model.family == "prism":
        try:
            a, b = params
        except TypeError:
            raise BadParams("prism subdivision takes a pair (a, b)")
        if a < 1 or b < 1 or a % 3 != 1 or b % 2 != 1:
            raise BadParams(
                f"prism subdivision needs a = 1 mod 3 and odd b, got {(a, b)}"
            )
        s, h = model.dims
        sub = prism_model(s / a, h / b)
        ident3 = identity_isometry().m
        zero, one = alg(0), alg(1)
        u = (s / a, alg(0))
        v = (s / (2 * a), s * sqrt_rational(3) / (2 * a))
        rot_pi = ((alg(-1), zero, zero), (zero, alg(-1), zero), (zero, zero, one))
        out = []
        for layer in range(b):
            z = h * layer / b
            for j in range(a):
                for i in range(a - j):
                    base = (u[0] * i + v[0] * j, u[1] * i + v[1] * j, z)
                    out.append(Isometry(ident3, base))
                    if i + j <= a - 2:
                        shift = (
                            base[0] + u[0] + v[0],
                            base[1] + u[1] + v[1],
                            z,
                        )
                        out.append(Isometry(rot_pi, shift))
        return sub, out
    raise BadParams(f"no subdivision for family {model.family!r}")


def subdivide(complex: CellComplex3, params) -> CellComplex3:
    model = complex.model
    sub, placements = _sub_placements(model, params)
    nsub = len(placements)
    cell_of = {}
    for big in range(complex.ncells):
        for k, pl in enumerate(placements):
            cell_of[(big, k)] = big * nsub + k

    # sub-facet centers: the geometry inside one big cell is the same for
    # every big cell, so interior matches and the boundary index are
    # computed once
    def facet_center(pl: Isometry, fname):
        pts = [pl(sub.vertices[v]) for v in sub.facets[fname]]
        n = len(pts)
        return tuple(sum((p[i] for p in pts), alg(0)) / n for i in range(3))

    center_map: dict = {}
    for k, pl in enumerate(placements):
        for fname in sub.facet_names:
            center_map.setdefault(facet_center(pl, fname), []).append((k, fname))
    interior_template = []
    boundary_slots = {}  # center -> (k, f)
    for key, slots in center_map.items():
        if len(slots) == 2:
            (k1, f1), (k2, f2) = slots
            t = placements[k1].inverse().compose(placements[k2])
            sym_iso = sub.across[f1].inverse().compose(t)
            sym = sub.sym_index(sym_iso)
            if sym is None:
                raise AssertionError("interior refinement label missing")
            interior_template.append(((k1, f1), (k2, f2), sym))
        elif len(slots) == 1:
            boundary_slots[key] = slots[0]
        else:
            raise AssertionError("three sub-facets share a center")
    by_big_facet: dict = {}
    for key, slot in boundary_slots.items():
        by_big_facet.setdefault(_containing_facet(model, key), []).append(
            (key, slot)
        )

    pairs = []
    for big in range(complex.ncells):
        for (k1, f1), (k2, f2), sym in interior_template:
            pairs.append(
                ((cell_of[(big, k1)], f1), (cell_of[(big, k2)], f2), sym)
            )
    for p in complex.pair_list:
        big, bigf = p.cell_a, p.facet_a
        cb = p.cell_b
        t_big = complex.transition(big, bigf)
        t_big_inv = t_big.inverse()
        label_cache: dict = {}
        for key, (k1, f1) in by_big_facet.get(bigf, []):
            target = t_big_inv(key)
            partner = boundary_slots.get(target)
            if partner is None:
                raise AssertionError("boundary refinement has no partner")
            k2, f2 = partner
            lab_key = (k1, f1, k2, f2)
            sidx = label_cache.get(lab_key)
            if sidx is None:
                t_sub = (
                    placements[k1].inverse().compose(t_big).compose(placements[k2])
                )
                sym_iso = sub.across[f1].inverse().compose(t_sub)
                sidx = sub.sym_index(sym_iso)
                if sidx is None:
                    raise AssertionError("boundary refinement label missing")
                label_cache[lab_key] = sidx
            pairs.append(((cell_of[(big, k1)], f1), (cell_of[(cb, k2)], f2), sidx))
    special = None
    colors = None
    kind = complex.kind
    if complex.kind == "layered":
        special = {}
        for big in range(complex.ncells):
            axis = sorted(complex.special[big])[0][0]
            for k in range(nsub):
                special[cell_of[(big, k)]] = frozenset((f"{axis}0", f"{axis}1"))
    elif complex.kind == "marked":
        colors = _subdivided_colors(complex, sub, placements, cell_of, params)
    out = CellComplex3(
        sub, complex.ncells * nsub, pairs, kind=kind, special=special, colors=colors
    )
    return out


def _containing_facet(model: Model, point) -> str:
    for name in model.facet_names:
        pts = list(model._facet_points[name])
        if _on_facet(model, name, point):
            return name
    raise AssertionError(f"point {point} is not on a model facet")


def _on_facet(model: Model, name: str, point) -> bool:
    # all model facets are axis planes (cuboid), horizontal planes or
    # vertical planes through a triangle edge (prism)
    pts = list(model._facet_points[name])
    p0 = pts[0]
    # plane through p0, p1-p0, p2-p0: use a normal via cross product
    p1, p2 = pts[1], pts[2]
    u = tuple(a - b for a, b in zip(p1, p0))
    v = tuple(a - b for a, b in zip(p2, p0))
    n = (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )
    w = tuple(a - b for a, b in zip(point, p0))
    dot = sum((a * b for a, b in zip(n, w)), alg(0))
    return dot.is_zero()


def _subdivided_colors(complex, sub, placements, cell_of, params):
    a, b = params
    model = complex.model
    s, h = model.dims
    colors = {}
    order = ("R", "Y", "B")
    swap = {"R": "R", "Y": "B", "B": "Y"}
    inv_order = {c: i for i, c in enumerate(order)}
    u = (s / a, alg(0))
    v = (s / (2 * a), s * sqrt_rational(3) / (2 * a))
    for big in range(complex.ncells):
        c0 = complex.colors[(big, 0)]
        c1 = complex.colors[(big, 1)]
        c2 = complex.colors[(big, 2)]
        k0 = inv_order[c0]
        d1 = (inv_order[c1] - k0) % 3
        d2 = (inv_order[c2] - k0) % 3
        # with a = 1 mod 3 the corner conditions pin the lattice coloring
        def grid_color(i, j, layer):
            base = order[(k0 + i * d1 + j * d2) % 3]
            return base if layer % 2 == 0 else swap[base]

        for k, pl in enumerate(placements):
            for vv in range(6):
                pt = pl(sub.vertices[vv])
                # recover lattice coordinates (i, j, layer) of the point
                layer_val = pt[2] / (h / b)
                j_val = pt[1] / v[1]
                i_val = (pt[0] - j_val * v[0]) / u[0]
                i_f, j_f, l_f = (
                    i_val.as_rational(),
                    j_val.as_rational(),
                    layer_val.as_rational(),
                )
                if any(x.denominator != 1 for x in (i_f, j_f, l_f)):
                    raise AssertionError("sub-vertex off the refinement grid")
                colors[(cell_of[(big, k)], vv)] = grid_color(
                    int(i_f), int(j_f), int(l_f)
                )
    return colors


# -- properness -------------------------------------------------------------


def _cube_neighbors_distinct(complex: CellComplex3) -> bool:
    for c in range(complex.ncells):
        nbrs = [complex.neighbor(c, f)[0] for f in complex.model.facet_names]
        if c in nbrs or len(set(nbrs)) != len(nbrs):
            return False
    return True


def _vertex_neighbors_distinct(complex: CellComplex3) -> bool:
    vclasses = complex.vertex_classes()
    slot_to_class = {}
    for i, cls in enumerate(vclasses):
        for slot in cls:
            slot_to_class[slot] = i
    # each edge class joins two vertex classes; neighbors of a vertex are
    # the classes at the other end of its incident edge classes
    incident: dict[int, list] = {i: [] for i in range(len(vclasses))}
    for slots, _total in complex.edge_classes():
        c, e = slots[0]
        a, b = tuple(e)
        va = slot_to_class[(c, a)]
        vb = slot_to_class[(c, b)]
        incident[va].append(vb)
        incident[vb].append(va)
    for i, nbrs in incident.items():
        if len(nbrs) != 6:
            return False
        if i in nbrs or len(set(nbrs)) != 6:
            return False
    return True


def make_proper(complex: CellComplex3, n_max: int = 16):
    """Smallest refinement making cells and vertices properly separated."""
    if complex.kind != "layered":
        raise StructureError("properness applies to layered complexes")
    verify_structure(complex, "layered")
    for n in range(1, n_max + 1):
        cand = complex if n == 1 else subdivide(complex, n)
        if _cube_neighbors_distinct(cand) and _vertex_neighbors_distinct(cand):
            return cand, n
    raise NotProperWithin(f"no proper refinement with n <= {n_max}")


# -- builtins ----------------------------------------------------------------


def builtin_manifold(name: str, family: str) -> CellComplex3:
    """A verified fundamental gluing template for one of the ten manifolds."""
    from .bieberbach import builtin_complex

    return builtin_complex(name, family)


# -- file format --------------------------------------------------------------


def write_complex(complex: CellComplex3) -> str:
    model = complex.model
    lines = [f"family {'cube' if model.family == 'cuboid' else 'prism'}"]
    dims = " ".join(d.literal() for d in model.dims)
    lines.append(f"dims {dims}")
    if complex.kind:
        lines.append(f"kind {complex.kind}")
    for c in range(complex.ncells):
        lines.append(f"cell {c}")
    for p in sorted(
        complex.pair_list, key=lambda p: (p.cell_a, p.facet_a)
    ):
        lines.append(
            f"pair ({p.cell_a},{p.facet_a}) ({p.cell_b},{p.facet_b})"
            f" {model.sym_name(p.sym_ab)}"
        )
    for c in sorted(complex.special):
        f1, f2 = sorted(complex.special[c])
        lines.append(f"special {c} {f1} {f2}")
    for (c, v) in sorted(complex.colors):
        lines.append(f"color {c} v{v} {complex.colors[(c, v)]}")
    return "\n".join(lines) + "\n"


def read_complex(text: str) -> CellComplex3:
    family = None
    dims = None
    kind = None
    cells = []
    pairs = []
    special = {}
    colors = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "family":
            family = parts[1]
        elif parts[0] == "dims":
            dims = [make_algnum(x) for x in parts[1:]]
        elif parts[0] == "kind":
            kind = parts[1]
        elif parts[0] == "cell":
            cells.append(int(parts[1]))
        elif parts[0] == "pair":
            a = parts[1].strip("()").split(",")
            b = parts[2].strip("()").split(",")
            pairs.append(((int(a[0]), a[1]), (int(b[0]), b[1]), parts[3]))
        elif parts[0] == "special":
            special[int(parts[1])] = frozenset((parts[2], parts[3]))
        elif parts[0] == "color":
            colors[(int(parts[1]), int(parts[2][1:]))] = parts[3]
        else:
            raise StructureError(f"line {ln}: unknown directive {parts[0]!r}")
    if family == "cube":
        model = cuboid_model(*dims)
    elif family == "prism":
        model = prism_model(*dims)
    else:
        raise StructureError(f"unknown family {family!r}")
    resolved = [
        (a, b, model.sym_by_name(sname)) for a, b, sname in pairs
    ]
    return CellComplex3(
        model,
        len(cells),
        resolved,
        kind=kind,
        special=special or None,
        colors=colors or None,
    )
