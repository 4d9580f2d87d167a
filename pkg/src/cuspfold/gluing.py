"""Gluing polytope copies along facets inside one cusp.

Given a diagram D and a vertex subset S spanning a finite (spherical)
group W_S, the glued polytope is the orbit of the base polytope under
W_S acting by reflections in the facets of S.  Everything is computed in
the geometric (Tits) representation over the exact field: chambers are
the |W_S| representation matrices, facet copies are the vectors g.e_i
for i outside S, and two copies lie in a common supporting hyperplane
exactly when those vectors coincide.  The Gram matrix of the glued
polytope is then the matrix of inner products of class representatives.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .diagram import (
    Angle,
    Dashed,
    Diagram,
    INFINITY,
    classify_subdiagram,
    diagram_automorphisms,
    gram_matrix,
)
from .field import AlgNum, alg, cos_pi_over

__all__ = [
    "GluedPolytope",
    "GluedSymmetry",
    "NonSphericalSubset",
    "NotLocallyCoxeter",
    "basic_construction_over_subset",
    "angle_over_pi",
]


class NonSphericalSubset(ValueError):
    pass


class NotLocallyCoxeter(ValueError):
    """An angle not of the recognized finite list appeared where one must."""


def _matvec(m, v):
    zero = alg(0)
    out = []
    for row in m:
        acc = zero
        for a, b in zip(row, v):
            if not (a.is_zero() or b.is_zero()):
                acc = acc + a * b
        out.append(acc)
    return tuple(out)


def _matmul(a, b):
    n = len(a)
    cols = list(zip(*b))
    zero = alg(0)
    out = []
    for row in a:
        orow = []
        for col in cols:
            acc = zero
            for x, y in zip(row, col):
                if not (x.is_zero() or y.is_zero()):
                    acc = acc + x * y
            orow.append(acc)
        out.append(tuple(orow))
    return tuple(out)


def _identity(n):
    one, zero = alg(1), alg(0)
    return tuple(
        tuple(one if i == j else zero for j in range(n)) for i in range(n)
    )


_ANGLE_TABLE = None


def _angle_table():
    global _ANGLE_TABLE
    if _ANGLE_TABLE is None:
        _ANGLE_TABLE = {
            alg(0): Fraction(1, 2),
            alg(Fraction(-1, 2)): Fraction(1, 3),
            -cos_pi_over(4): Fraction(1, 4),
            -cos_pi_over(6): Fraction(1, 6),
            alg(Fraction(1, 2)): Fraction(2, 3),
            cos_pi_over(4): Fraction(3, 4),
            cos_pi_over(6): Fraction(5, 6),
        }
    return _ANGLE_TABLE


def angle_over_pi(entry: AlgNum) -> Fraction | None:
    """Dihedral angle (as a fraction of pi) from a Gram entry, or None when
    the hyperplanes do not meet (entry <= -1)."""
    table = _angle_table()
    if entry in table:
        return table[entry]
    if entry.sign() <= 0 and (entry + 1).sign() <= 0:
        return None
    raise NotLocallyCoxeter(f"unrecognized Gram entry {entry}")


@dataclass
class FacetClass:
    index: int
    base_facet: int
    bounded: bool
    normal: tuple
    slots: tuple  # (chamber index, base facet) pairs


@dataclass
class GluedSymmetry:
    """A symmetry of the glued polytope: chamber element times diagram
    automorphism, acting on facet normals by one exact matrix."""

    matrix: tuple
    class_perm: tuple  # class_perm[c] = image class index
    word: str

    def inverse_perm(self):
        inv = [0] * len(self.class_perm)
        for i, j in enumerate(self.class_perm):
            inv[j] = i
        return tuple(inv)


class GluedPolytope:
    def __init__(
        self, base: Diagram, subset, chambers, words, classes, gram, mirror_moves
    ):
        self.base = base
        self.subset = tuple(sorted(subset))
        self.chambers = chambers  # list of matrices
        self.chamber_words = words
        self.classes: list[FacetClass] = classes
        self.gram = gram  # tuple of tuples of AlgNum over classes
        self.mirror_moves = mirror_moves  # (chamber, mirror facet) -> chamber
        self._diagram = None
        self._symmetries = None
        self._ridges = None
        self.slot_class = {
            slot: c.index for c in classes for slot in c.slots
        }

    @property
    def chamber_count(self) -> int:
        return len(self.chambers)

    @property
    def bounded_classes(self):
        return [c for c in self.classes if c.bounded]

    @property
    def wall_classes(self):
        return [c for c in self.classes if not c.bounded]

    def entry(self, i: int, j: int) -> AlgNum:
        return self.gram[i][j]

    def angle(self, i: int, j: int) -> Fraction | None:
        return angle_over_pi(self.gram[i][j])

    def ridge_pairs(self) -> set:
        """Facet-class pairs sharing an actual ridge of the glued polytope.

        Gram entries alone over-count adjacency, since hyperplanes can
        cross outside the polytope (the hexagonal link has distance-2
        walls with crossing supports but no shared ridge).  A true ridge
        is carried either by a base ridge between two facets outside the
        gluing subset, or by a base ridge against a mirror facet, where
        the two boundary copies on either side of the mirror meet.
        """
        if self._ridges is not None:
            return self._ridges
        out = set()
        outside = [v for v in self.base.vertices if v not in self.subset]
        direct = [
            (i, j)
            for a, i in enumerate(outside)
            for j in outside[a + 1 :]
            if self.base.angle_m(i, j) is not None
        ]
        mirrored = [
            (i, s)
            for i in outside
            for s in self.subset
            if (self.base.angle_m(i, s) or 2) > 2
        ]
        for gi in range(len(self.chambers)):
            for i, j in direct:
                ci = self.slot_class[(gi, i)]
                cj = self.slot_class[(gi, j)]
                if ci == cj:
                    raise AssertionError("facet class adjacent to itself")
                out.add(frozenset((ci, cj)))
            for i, s in mirrored:
                ci = self.slot_class[(gi, i)]
                cj = self.slot_class[(self.mirror_moves[(gi, s)], i)]
                if ci != cj:
                    out.add(frozenset((ci, cj)))
        self._ridges = out
        return out

    def adjacent(self, i: int, j: int) -> bool:
        return frozenset((i, j)) in self.ridge_pairs()

    # -- diagram view (only valid when all angles are pi/m) -------------

    def diagram(self) -> Diagram:
        """The glued polytope's own Coxeter diagram.

        Raises NotLocallyCoxeter when some dihedral angle is not an integer
        submultiple of pi (the hexagonal-link gluing has 2pi/3 angles and
        has no diagram; its Gram matrix is still available).
        """
        if self._diagram is not None:
            return self._diagram
        k = len(self.classes)
        edges = {}
        for i in range(k):
            for j in range(i + 1, k):
                e = self.gram[i][j]
                if e.is_zero():
                    continue
                q = angle_over_pi(e)
                pair = frozenset((i + 1, j + 1))
                if q is None:
                    if e == alg(-1):
                        edges[pair] = INFINITY
                    else:
                        edges[pair] = Dashed(-e)
                elif q == Fraction(1, 2):
                    continue
                elif q.numerator == 1:
                    edges[pair] = Angle(q.denominator)
                else:
                    raise NotLocallyCoxeter(
                        f"angle {q}*pi between classes {i + 1},{j + 1}"
                    )
        self._diagram = Diagram(range(1, k + 1), edges)
        return self._diagram

    def class_of_vertex(self, v: int) -> FacetClass:
        return self.classes[v - 1]

    # -- symmetries ------------------------------------------------------

    def symmetries(self) -> list[GluedSymmetry]:
        """All products (chamber element) x (diagram automorphism fixing the
        gluing subset), as exact matrices with their facet-class action."""
        if self._symmetries is not None:
            return self._symmetries
        n = len(self.base.vertices)
        normal_to_class = {c.normal: c.index for c in self.classes}
        reps = [c.normal for c in self.classes]
        autos = [
            a
            for a in diagram_automorphisms(self.base)
            if {a[s] for s in self.subset} == set(self.subset)
        ]
        out = []
        seen = set()
        verts = self.base.vertices
        zero, one = alg(0), alg(1)
        for ai, auto in enumerate(autos):
            p = [[zero] * n for _ in range(n)]
            for i, v in enumerate(verts):
                p[verts.index(auto[v])][i] = one
            p = tuple(tuple(row) for row in p)
            for gi, g in enumerate(self.chambers):
                m = _matmul(g, p)
                if m in seen:
                    continue
                seen.add(m)
                perm = []
                for rep in reps:
                    img = _matvec(m, rep)
                    cls = normal_to_class.get(img)
                    if cls is None:
                        raise AssertionError(
                            "symmetry candidate does not permute facet classes"
                        )
                    perm.append(cls)
                out.append(
                    GluedSymmetry(
                        m,
                        tuple(perm),
                        f"{self.chamber_words[gi]}|auto{ai}",
                    )
                )
        self._symmetries = out
        return out

    def symmetry_by_wall_perm(self) -> dict:
        """Map from wall-class permutation (as a tuple over wall indices in
        class order) to the inducing symmetry."""
        walls = [c.index for c in self.wall_classes]
        table = {}
        for sym in self.symmetries():
            key = tuple(sym.class_perm[w] for w in walls)
            table.setdefault(key, sym)
        return table


def basic_construction_over_subset(diagram: Diagram, subset) -> GluedPolytope:
    subset = tuple(sorted(subset))
    if subset:
        cls = classify_subdiagram(diagram, subset)
        if cls.verdict != "spherical":
            raise NonSphericalSubset(
                f"subset {subset} spans a non-finite group ({cls.verdict})"
            )
    verts = diagram.vertices
    n = len(verts)
    g = gram_matrix(diagram)
    one, zero = alg(1), alg(0)

    def reflection(i):
        rows = []
        for r in range(n):
            if r != i:
                rows.append(
                    tuple(one if c == r else zero for c in range(n))
                )
            else:
                rows.append(
                    tuple(
                        (one if c == i else zero) - 2 * g.entries[i][c]
                        for c in range(n)
                    )
                )
        return tuple(rows)

    gens = {s: reflection(verts.index(s)) for s in subset}
    ident = _identity(n)
    chambers = [ident]
    words = [""]
    seen = {ident: 0}
    queue = [0]
    mirror_moves: dict[tuple, int] = {}
    while queue:
        idx = queue.pop(0)
        m = chambers[idx]
        for s, r in gens.items():
            nm = _matmul(m, r)
            if nm not in seen:
                seen[nm] = len(chambers)
                chambers.append(nm)
                words.append(words[idx] + f"s{s}")
                queue.append(len(chambers) - 1)
            mirror_moves[(idx, s)] = seen[nm]
        if len(chambers) > 14400:
            raise AssertionError("chamber enumeration runaway")
    # facet copies: normals g.e_i for i outside the gluing subset
    ideal = _ideal_facets(diagram)
    normal_to_class: dict[tuple, int] = {}
    classes: list[FacetClass] = []
    slots: dict[int, list] = {}
    outside = [v for v in verts if v not in subset]
    for gi, m in enumerate(chambers):
        for v in outside:
            i = verts.index(v)
            normal = tuple(row[i] for row in m)
            c = normal_to_class.get(normal)
            if c is None:
                c = len(classes)
                normal_to_class[normal] = c
                classes.append(
                    FacetClass(c, v, v not in ideal, normal, ())
                )
                slots[c] = []
            else:
                if classes[c].base_facet != v and (
                    (classes[c].base_facet in ideal) != (v in ideal)
                ):
                    raise AssertionError("facet class mixes bounded and unbounded")
            slots[c].append((gi, v))
    # order classes: bounded first by (base facet, first slot), then walls
    order = sorted(
        range(len(classes)),
        key=lambda c: (not classes[c].bounded, classes[c].base_facet, slots[c][0]),
    )
    remap = {old: new for new, old in enumerate(order)}
    final = []
    for old in order:
        fc = classes[old]
        final.append(
            FacetClass(
                remap[old], fc.base_facet, fc.bounded, fc.normal, tuple(slots[old])
            )
        )
    # Gram matrix of the glued polytope
    k = len(final)
    ge = g.entries

    def inner(u, v):
        acc = zero
        for i, ui in enumerate(u):
            if ui.is_zero():
                continue
            row = ge[i]
            for j, vj in enumerate(v):
                if not (vj.is_zero() or row[j].is_zero()):
                    acc = acc + ui * row[j] * vj
        return acc

    grows = []
    for a in range(k):
        row = []
        for b in range(k):
            if b < a:
                row.append(grows[b][a])
            else:
                row.append(inner(final[a].normal, final[b].normal))
        grows.append(row)
    for a in range(k):
        if grows[a][a] != alg(1):
            raise AssertionError("facet normal not unit under the form")
    return GluedPolytope(
        diagram, subset, chambers, words, final, tuple(map(tuple, grows)), mirror_moves
    )


def _ideal_facets(diagram: Diagram) -> set:
    """Facets through the (unique) ideal vertex; empty set if none."""
    from .polytope import ideal_vertices

    n_guess = None
    # infer the dimension from the Gram signature (p,1,z) -> dimension p
    from .diagram import signature

    sig = signature(gram_matrix(diagram))
    n_guess = sig[0]
    ivs = ideal_vertices(diagram, n_guess)
    if not ivs:
        return set()
    if len(ivs) > 1:
        raise AssertionError("basic construction expects at most one ideal vertex")
    return set(ivs[0].subset)
