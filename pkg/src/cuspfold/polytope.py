"""Face lattice, cusp and arithmeticity analysis of a verified diagram.

For an acute-angled finite-volume polytope the combinatorics are fully
encoded in the diagram: codimension-k faces correspond to the positive
definite (spherical) vertex subsets of size k, and ideal vertices to the
maximal affine subsets of rank n-1.  All the operations below work on
that dictionary and stay in exact arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .diagram import (
    Angle,
    Dashed,
    Diagram,
    INFINITY,
    classify_subdiagram,
    gram_matrix,
    signature,
    vinberg_check,
)
from .field import AlgNum, alg

__all__ = [
    "FaceLattice",
    "IdealVertex",
    "LinkComplex",
    "CuspConditionReport",
    "NotApplicable",
    "OddDimension",
    "CompactNotSupported",
    "enumerate_faces",
    "ideal_vertices",
    "volume_flags",
    "cusp_conditions",
    "link_projection",
    "link_box_ratios",
    "euler_and_volume",
    "arithmeticity",
    "analysis_report",
]


class NotApplicable(ValueError):
    pass


class OddDimension(ValueError):
    pass


class CompactNotSupported(ValueError):
    pass


@dataclass
class FaceLattice:
    """Spherical subsets by rank; rank k subsets are the codim-k faces."""

    dimension: int
    by_rank: dict[int, list[tuple[int, ...]]]
    orders: dict[tuple[int, ...], int]

    def faces(self, rank: int) -> list[tuple[int, ...]]:
        return self.by_rank.get(rank, [])

    def contains(self, subset) -> bool:
        return tuple(sorted(subset)) in self.orders

    @property
    def ordinary_vertices(self) -> list[tuple[int, ...]]:
        return self.faces(self.dimension)


def enumerate_faces(diagram: Diagram, n: int) -> FaceLattice:
    """All spherical subsets of rank <= n, grown rank by rank."""
    by_rank: dict[int, list[tuple[int, ...]]] = {0: [()]}
    orders: dict[tuple[int, ...], int] = {(): 1}
    current = [()]
    for rank in range(1, n + 1):
        nxt = []
        seen = set()
        for base in current:
            start = base[-1] if base else 0
            for v in diagram.vertices:
                if v <= start or v in base:
                    continue
                cand = tuple(sorted(base + (v,)))
                if cand in seen:
                    continue
                seen.add(cand)
                cls = classify_subdiagram(diagram, cand)
                if cls.verdict == "spherical":
                    nxt.append(cand)
                    orders[cand] = cls.order
        # growing by one vertex is complete: every spherical set's subsets
        # are spherical, so each rank-k face extends some rank-(k-1) face
        by_rank[rank] = sorted(nxt)
        current = nxt
        if not nxt:
            break
    return FaceLattice(n, by_rank, orders)


@dataclass
class IdealVertex:
    subset: tuple[int, ...]
    components: tuple
    rank: int

    @property
    def type_tag(self) -> str:
        return "x".join(tag for tag, _ in self.components)


def ideal_vertices(diagram: Diagram, n: int) -> list[IdealVertex]:
    """Maximal affine subdiagrams of rank n-1."""
    affine = {}
    verts = diagram.vertices
    for k in range(2, len(verts) + 1):
        for sub in combinations(verts, k):
            cls = classify_subdiagram(diagram, sub)
            if cls.verdict == "affine":
                affine[sub] = cls
    out = []
    for sub, cls in affine.items():
        if cls.rank != n - 1:
            continue
        if any(set(sub) < set(other) for other in affine):
            continue
        out.append(IdealVertex(sub, cls.components, cls.rank))
    return sorted(out, key=lambda iv: iv.subset)


def volume_flags(diagram: Diagram, n: int) -> str:
    """'compact', 'finite_volume' or 'neither'.

    Finite volume: every codim-(n-1) face (rank n-1 spherical subset) lies
    in exactly two vertices, each an ordinary vertex (rank-n spherical
    superset) or an ideal vertex containing it.
    """
    lattice = enumerate_faces(diagram, n)
    ideals = ideal_vertices(diagram, n)
    edges = lattice.faces(n - 1)
    if n >= 1 and not edges:
        return "neither"
    tops = lattice.faces(n)
    for e in edges:
        eset = set(e)
        count = sum(1 for t in tops if eset < set(t))
        count += sum(1 for iv in ideals if eset < set(iv.subset))
        if count != 2:
            return "neither"
    return "compact" if not ideals else "finite_volume"


@dataclass
class CuspConditionReport:
    single_ideal_vertex: bool
    ideal_subsets: list[tuple[int, ...]]
    bounded_facets: tuple[int, ...]
    unbounded_facets: tuple[int, ...]
    even_angles: bool
    violations: list[tuple[int, int, int]]  # (bounded, unbounded, m)

    @property
    def passed(self) -> bool:
        return self.single_ideal_vertex and self.even_angles


def cusp_conditions(diagram: Diagram, n: int) -> CuspConditionReport:
    ideals = ideal_vertices(diagram, n)
    subsets = [iv.subset for iv in ideals]
    if len(ideals) != 1:
        return CuspConditionReport(
            False, subsets, (), (), False, []
        )
    t = set(ideals[0].subset)
    unbounded = tuple(sorted(t))
    bounded = tuple(v for v in diagram.vertices if v not in t)
    violations = []
    for i in bounded:
        for j in unbounded:
            m = diagram.angle_m(i, j)
            if m is not None and m % 2 == 1:
                violations.append((i, j, m))
    return CuspConditionReport(
        True, subsets, bounded, unbounded, not violations, violations
    )


@dataclass
class LinkComplex:
    """Projection of the compact faces onto the link of the ideal vertex."""

    ideal: IdealVertex
    link_facets: tuple[int, ...]
    compact_faces_by_rank: dict[int, list[tuple[int, ...]]]
    # ridge pair -> (m, doubled, effective angle as Fraction of pi, color)
    two_face_labels: dict[tuple[int, int], tuple[int, bool, Fraction, str]]

    @property
    def regions(self) -> list[int]:
        return [s[0] for s in self.compact_faces_by_rank.get(1, [])]


def _angle_color(angle_over_pi: Fraction) -> str:
    if angle_over_pi == Fraction(1, 2):
        return "yellow"
    if angle_over_pi == Fraction(1, 3):
        return "red"
    if angle_over_pi == 1:
        return "transparent"
    return "other"


def link_projection(diagram: Diagram, n: int, ideal: IdealVertex) -> LinkComplex:
    t = set(ideal.subset)
    lattice = enumerate_faces(diagram, n)
    compact: dict[int, list[tuple[int, ...]]] = {}
    for rank, subs in lattice.by_rank.items():
        if rank == 0:
            continue
        keep = [s for s in subs if not set(s) <= t]
        if keep:
            compact[rank] = keep
    labels = {}
    for pair in lattice.faces(2):
        i, j = pair
        if i in t and j in t:
            continue
        m = diagram.angle_m(i, j)
        if m is None:
            raise AssertionError("spherical pair without an angle")
        doubled = (i in t) != (j in t)
        angle = Fraction(2, m) if doubled else Fraction(1, m)
        labels[pair] = (m, doubled, angle, _angle_color(angle))
    return LinkComplex(ideal, tuple(sorted(t)), compact, labels)


def link_box_ratios(diagram: Diagram, n: int, ideal: IdealVertex | None = None):
    """Edge ratios of a box-shaped link, as cosines of the wall angles.

    Applies when the ideal vertex link is combinatorially a box (affine
    type a product of three A~1 components) and a unique compact facet
    meets every unbounded facet at a proper angle.
    """
    if ideal is None:
        ideals = ideal_vertices(diagram, n)
        if len(ideals) != 1:
            raise NotApplicable("needs a unique ideal vertex")
        ideal = ideals[0]
    comps = ideal.components
    if len(comps) != 3 or any(tag != "A~1" for tag, _ in comps):
        raise NotApplicable("link is not combinatorially a box")
    t = set(ideal.subset)
    bounded = [v for v in diagram.vertices if v not in t]
    meeting = []
    for c in bounded:
        ms = {u: diagram.angle_m(c, u) for u in ideal.subset}
        if all(m is not None and m > 2 for m in ms.values()):
            meeting.append((c, ms))
    if len(meeting) != 1:
        raise NotApplicable(
            f"{len(meeting)} compact facets meet all unbounded facets, need 1"
        )
    _, ms = meeting[0]
    ratios = []
    from .field import cos_pi_over

    for tag, comp in comps:
        pair = list(comp)
        m0, m1 = ms[pair[0]], ms[pair[1]]
        if m0 != m1:
            raise NotApplicable("opposite walls meet the compact facet unequally")
        ratios.append(2 * cos_pi_over(m0))
    return ratios


def euler_and_volume(diagram: Diagram, n: int):
    """Orbifold Euler characteristic and (for n = 4) the volume in pi^2 units.

    chi = sum over spherical subsets S (with S = empty contributing +1) of
    (-1)^rank(S) / |W_S|; for n = 4 the volume is (4 pi^2 / 3) chi.
    """
    lattice = enumerate_faces(diagram, n)
    chi = Fraction(0)
    for rank, subs in lattice.by_rank.items():
        sign = -1 if rank % 2 else 1
        for s in subs:
            chi += Fraction(sign, lattice.orders[s])
    if n % 2 == 1:
        return chi, None
    if n == 4:
        return chi, Fraction(4, 3) * chi
    return chi, None


def volume_pi2(diagram: Diagram) -> Fraction:
    chi, vol = euler_and_volume(diagram, 4)
    return vol


@dataclass
class ArithmeticityReport:
    verdict: str  # "arithmetic" | "non_arithmetic"
    witness: object
    checked_pairs: int
    checked_cycles: int


def _simple_cycles(nbrs: dict[int, set[int]], cap: int = 200000):
    """All simple cycles (as vertex tuples) with smallest vertex first."""
    verts = sorted(nbrs)
    cycles = []
    count = 0
    for root in verts:
        stack = [(root, [root])]
        while stack:
            v, path = stack.pop()
            for w in sorted(nbrs[v]):
                if w == root and len(path) >= 3:
                    # canonical orientation: second vertex smaller than last
                    if path[1] < path[-1]:
                        cycles.append(tuple(path))
                        count += 1
                        if count > cap:
                            raise AssertionError("cycle enumeration cap exceeded")
                elif w > root and w not in path:
                    stack.append((w, path + [w]))
    return cycles


def arithmeticity(diagram: Diagram, n: int) -> ArithmeticityReport:
    """Non-cocompact criterion: 2G entries have integer squares and every
    simple cycle of the nonzero-entry graph has an integer 2G product."""
    if volume_flags(diagram, n) == "compact":
        raise CompactNotSupported("only the non-cocompact criterion is implemented")
    g = gram_matrix(diagram)
    verts = diagram.vertices
    k = len(verts)
    two_g = [[2 * g.entries[i][j] for j in range(k)] for i in range(k)]
    pairs = 0
    for i in range(k):
        for j in range(i + 1, k):
            v = two_g[i][j]
            if v.is_zero():
                continue
            pairs += 1
            if not (v * v).is_rational_integer():
                return ArithmeticityReport(
                    "non_arithmetic",
                    {"pair": (verts[i], verts[j]), "value": v * v},
                    pairs,
                    0,
                )
    nbrs = {v: set() for v in verts}
    for i in range(k):
        for j in range(k):
            if i != j and not two_g[i][j].is_zero():
                nbrs[verts[i]].add(verts[j])
    cycles = _simple_cycles(nbrs)
    for cyc in cycles:
        prod = alg(1)
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            prod = prod * two_g[verts.index(a)][verts.index(b)]
        if not prod.is_rational_integer():
            return ArithmeticityReport(
                "non_arithmetic",
                {"cycle": cyc, "value": prod},
                pairs,
                len(cycles),
            )
    return ArithmeticityReport("arithmetic", None, pairs, len(cycles))


def cycle_product(diagram: Diagram, cycle) -> AlgNum:
    """Product of 2*Gram entries along a closed vertex cycle."""
    g = gram_matrix(diagram)
    verts = diagram.vertices
    prod = alg(1)
    for a, b in zip(cycle, tuple(cycle[1:]) + (cycle[0],)):
        prod = prod * (2 * g.entries[verts.index(a)][verts.index(b)])
    return prod


def analysis_report(diagram: Diagram, n: int) -> dict:
    """Full nested report for the CLI; stable key order."""
    rep: dict = {}
    vin = vinberg_check(diagram, n)
    rep["dimension"] = n
    rep["facets"] = len(diagram.vertices)
    rep["connected"] = vin.connected
    rep["signature"] = "(%d,%d,%d)" % vin.signature
    rep["vinberg"] = "pass" if vin.passed else "fail: " + "; ".join(vin.failures())
    if not vin.passed:
        return rep
    rep["volume_class"] = volume_flags(diagram, n)
    ideals = ideal_vertices(diagram, n)
    rep["ideal_vertices"] = {
        f"vertex_{i}": {
            "subset": ",".join(map(str, iv.subset)),
            "type": iv.type_tag,
        }
        for i, iv in enumerate(ideals)
    }
    cusp = cusp_conditions(diagram, n)
    rep["condition_a"] = cusp.single_ideal_vertex
    rep["condition_b"] = cusp.even_angles
    if cusp.violations:
        rep["condition_b_violations"] = ", ".join(
            f"{i}-{j}(m={m})" for i, j, m in cusp.violations
        )
    rep["bounded_facets"] = ",".join(map(str, cusp.bounded_facets))
    rep["unbounded_facets"] = ",".join(map(str, cusp.unbounded_facets))
    chi, vol = euler_and_volume(diagram, n)
    rep["euler_characteristic"] = str(chi)
    if vol is not None:
        rep["volume"] = f"{vol}*pi^2"
    if rep["volume_class"] != "compact":
        arith = arithmeticity(diagram, n)
        rep["arithmeticity"] = arith.verdict
        if arith.witness is not None:
            w = arith.witness
            if "pair" in w:
                rep["arithmeticity_witness"] = (
                    f"pair {w['pair'][0]}-{w['pair'][1]}: (2G)^2 = {w['value']}"
                )
            else:
                rep["arithmeticity_witness"] = (
                    f"cycle {w['cycle']}: product = {w['value']}"
                )
    return rep
