"""Coxeter diagrams, Gram matrices, exact signatures and subdiagram types.

A diagram is a labeled graph on facet identifiers.  Edge labels:

* ``Angle(m)``  -- dihedral angle pi/m, m >= 3 (an absent edge means m = 2);
* ``INFINITY`` -- parallel supporting hyperplanes (Gram entry -1);
* ``Dashed(c)`` -- ultraparallel hyperplanes at distance d, c = cosh(d) > 1;
  the label may be omitted when no computation needs the value.

The Gram matrix has 1 on the diagonal, -cos(pi/m) for angles, -1 for
parallels and -cosh(d) for ultraparallels.  Signatures are computed by
symmetric elimination over the exact field, with 2x2 pivots when the
active diagonal vanishes, so the inertia triple is exact.

Subdiagram classification uses definiteness of the Gram submatrix as the
ground truth (positive definite = spherical, positive semidefinite with
kernel dimension equal to the component count = affine) and matches the
connected components against the finite/affine type catalog for tags and
group orders.  A definiteness/catalog mismatch is a hard internal error.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .field import AlgNum, alg, cos_pi_over

__all__ = [
    "Angle",
    "INFINITY",
    "Dashed",
    "Diagram",
    "GramMatrix",
    "SubdiagramClass",
    "VinbergReport",
    "ParseError",
    "DuplicateEdge",
    "SelfLoop",
    "MissingCoshValue",
    "parse_diagram",
    "builtin_diagram",
    "gram_matrix",
    "signature",
    "classify_subdiagram",
    "vinberg_check",
    "diagram_automorphisms",
]


class ParseError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class DuplicateEdge(ParseError):
    pass


class SelfLoop(ParseError):
    pass


class MissingCoshValue(ValueError):
    """A dashed edge without cosh label was used where the value matters."""


@dataclass(frozen=True)
class Angle:
    m: int

    def __post_init__(self):
        if self.m < 3:
            raise ValueError("explicit edges carry labels m >= 3")


class _Infinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"


INFINITY = _Infinity()


@dataclass(frozen=True)
class Dashed:
    coshd: AlgNum | None = None


class Diagram:
    """Vertices (positive integers) and labeled edges; immutable."""

    def __init__(self, vertices, edges):
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ParseError("duplicate vertex identifiers")
        seen = {}
        for pair, label in edges.items():
            i, j = tuple(pair)
            if i == j:
                raise SelfLoop(f"self edge at {i}")
            if i not in self.vertices or j not in self.vertices:
                raise ParseError(f"edge on unknown vertex in {pair}")
            key = frozenset((i, j))
            if key in seen:
                raise DuplicateEdge(f"edge {i}-{j} given twice")
            if isinstance(label, Dashed) and label.coshd is not None:
                if not (label.coshd > alg(1)):
                    raise ParseError(f"dashed label on {i}-{j} must exceed 1")
            seen[key] = label
        self.edges = seen

    def label(self, i, j):
        """Edge label; absent edges read as Angle-like m=2 (returned as None)."""
        return self.edges.get(frozenset((i, j)))

    def angle_m(self, i, j) -> int | None:
        """m for pairs meeting at angle pi/m; None for parallel/ultraparallel."""
        lab = self.label(i, j)
        if lab is None:
            return 2
        if isinstance(lab, Angle):
            return lab.m
        return None

    def restricted(self, subset) -> "Diagram":
        subset = tuple(sorted(subset))
        edges = {
            pair: lab
            for pair, lab in self.edges.items()
            if all(v in subset for v in pair)
        }
        return Diagram(subset, edges)

    def has_dashed(self) -> bool:
        return any(isinstance(lab, Dashed) for lab in self.edges.values())

    def adjacency(self, include_order2=False):
        """Neighbor map of the drawn graph (labels other than m=2)."""
        nbrs = {v: set() for v in self.vertices}
        for pair in self.edges:
            i, j = tuple(pair)
            nbrs[i].add(j)
            nbrs[j].add(i)
        if include_order2:
            for i in self.vertices:
                for j in self.vertices:
                    if i != j:
                        nbrs[i].add(j)
        return nbrs

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        nbrs = self.adjacency()
        seen = {self.vertices[0]}
        stack = [self.vertices[0]]
        while stack:
            v = stack.pop()
            for w in nbrs[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    def components(self, subset=None):
        verts = tuple(subset) if subset is not None else self.vertices
        vset = set(verts)
        nbrs = {v: set() for v in verts}
        for pair in self.edges:
            i, j = tuple(pair)
            if i in vset and j in vset:
                nbrs[i].add(j)
                nbrs[j].add(i)
        out = []
        left = set(verts)
        while left:
            v = min(left)
            comp = {v}
            stack = [v]
            while stack:
                x = stack.pop()
                for w in nbrs[x]:
                    if w not in comp:
                        comp.add(w)
                        stack.append(w)
            out.append(tuple(sorted(comp)))
            left -= comp
        return sorted(out)

    def to_dsl(self) -> str:
        lines = [f"vertex {v}" for v in self.vertices]
        for pair in sorted(self.edges, key=lambda p: tuple(sorted(p))):
            i, j = sorted(pair)
            lab = self.edges[pair]
            if isinstance(lab, Angle):
                lines.append(f"edge {i} {j} {lab.m}")
            elif lab is INFINITY:
                lines.append(f"edge {i} {j} inf")
            else:
                if lab.coshd is None:
                    lines.append(f"dashed {i} {j}")
                else:
                    lines.append(f"dashed {i} {j} {lab.coshd.literal()}")
        return "\n".join(lines) + "\n"

    def __repr__(self):
        return f"Diagram({len(self.vertices)} vertices, {len(self.edges)} edges)"


def parse_diagram(text: str) -> Diagram:
    """Parse the line-oriented diagram DSL (or a builtin name ``@D1``...)."""
    stripped = text.strip()
    if stripped.startswith("@"):
        return builtin_diagram(stripped[1:])
    vertices: list[int] = []
    edges: dict[frozenset, object] = {}

    def vert(tok, ln):
        try:
            v = int(tok)
        except ValueError:
            raise ParseError(f"bad vertex id {tok!r}", ln)
        if v <= 0:
            raise ParseError(f"vertex ids are positive integers, got {v}", ln)
        return v

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "vertex":
            if len(parts) != 2:
                raise ParseError("vertex takes one identifier", ln)
            v = vert(parts[1], ln)
            if v in vertices:
                raise ParseError(f"duplicate vertex {v}", ln)
            vertices.append(v)
        elif kind == "edge":
            if len(parts) != 4:
                raise ParseError("edge takes I J M", ln)
            i, j = vert(parts[1], ln), vert(parts[2], ln)
            if i == j:
                raise SelfLoop(f"self edge at {i}", ln)
            key = frozenset((i, j))
            if key in edges:
                raise DuplicateEdge(f"edge {i}-{j} given twice", ln)
            if parts[3] == "inf":
                edges[key] = INFINITY
            else:
                try:
                    m = int(parts[3])
                except ValueError:
                    raise ParseError(f"bad label {parts[3]!r}", ln)
                if m < 3:
                    raise ParseError("edge labels are >= 3 (omit m = 2 edges)", ln)
                edges[key] = Angle(m)
        elif kind == "dashed":
            if len(parts) not in (3, 4):
                raise ParseError("dashed takes I J [COSH]", ln)
            i, j = vert(parts[1], ln), vert(parts[2], ln)
            if i == j:
                raise SelfLoop(f"self edge at {i}", ln)
            key = frozenset((i, j))
            if key in edges:
                raise DuplicateEdge(f"edge {i}-{j} given twice", ln)
            coshd = alg(parts[3]) if len(parts) == 4 else None
            edges[key] = Dashed(coshd)
        else:
            raise ParseError(f"unknown directive {kind!r}", ln)
    try:
        return Diagram(vertices, edges)
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc))


_D1 = """
vertex 1
vertex 2
vertex 3
vertex 4
vertex 5
vertex 6
vertex 7
edge 1 2 inf
edge 2 3 4
edge 3 4 6
edge 4 5 4
edge 5 6 4
edge 6 7 6
edge 7 1 4
"""

_D2 = """
vertex 1
vertex 2
vertex 3
vertex 4
vertex 5
vertex 6
vertex 7
vertex 8
edge 1 2 inf
dashed 1 3 sqrt(7/3)
dashed 1 4 sqrt(7/3)
dashed 2 3 sqrt(7/3)
dashed 2 5 sqrt(7/3)
dashed 3 6 sqrt(2)
edge 4 5 3
edge 4 7 4
edge 5 8 4
edge 6 7 3
edge 6 8 3
edge 7 8 3
"""

_D3 = """
vertex 1
vertex 2
vertex 3
vertex 4
edge 1 2 4
edge 2 3 3
edge 2 4 3
edge 3 4 3
"""

_BUILTINS = {"D1": _D1, "D2": _D2, "D3": _D3}


def builtin_diagram(name: str) -> Diagram:
    if name not in _BUILTINS:
        raise ParseError(f"unknown builtin diagram {name!r}")
    return parse_diagram(_BUILTINS[name])


class GramMatrix:
    """Symmetric AlgNum matrix with the source diagram's vertex order."""

    def __init__(self, vertices, entries):
        self.vertices = tuple(vertices)
        self.entries = tuple(tuple(row) for row in entries)

    @property
    def size(self):
        return len(self.vertices)

    def __getitem__(self, ij):
        return self.entries[ij[0]][ij[1]]


def gram_matrix(diagram: Diagram) -> GramMatrix:
    verts = diagram.vertices
    n = len(verts)
    one = alg(1)
    zero = alg(0)
    rows = [[one if i == j else zero for j in range(n)] for i in range(n)]
    for pair, lab in diagram.edges.items():
        i, j = tuple(pair)
        a, b = verts.index(i), verts.index(j)
        if isinstance(lab, Angle):
            val = -cos_pi_over(lab.m)
        elif lab is INFINITY:
            val = alg(-1)
        else:
            if lab.coshd is None:
                raise MissingCoshValue(f"dashed edge {i}-{j} has no cosh label")
            val = -lab.coshd
        rows[a][b] = rows[b][a] = val
    return GramMatrix(verts, rows)


def signature(gram: GramMatrix) -> tuple[int, int, int]:
    """Exact inertia (positive, negative, zero) by symmetric elimination."""
    n = gram.size
    a = [[gram.entries[i][j] for j in range(n)] for i in range(n)]
    active = list(range(n))
    pos = neg = zero = 0
    while active:
        piv = next((i for i in active if not a[i][i].is_zero()), None)
        if piv is not None:
            d = a[piv][piv]
            if d.sign() > 0:
                pos += 1
            else:
                neg += 1
            active.remove(piv)
            rest = active
            col = {k: a[k][piv] for k in rest}
            for k in rest:
                ck = col[k]
                if ck.is_zero():
                    continue
                f = ck / d
                for l in rest:
                    cl = col[l]
                    if cl.is_zero():
                        continue
                    a[k][l] = a[k][l] - f * cl
            continue
        off = None
        for x in active:
            for y in active:
                if y > x and not a[x][y].is_zero():
                    off = (x, y)
                    break
            if off:
                break
        if off is None:
            zero += len(active)
            break
        # hyperbolic 2x2 pivot [[0, c], [c, 0]] contributes (+1, -1)
        x, y = off
        c = a[x][y]
        pos += 1
        neg += 1
        active.remove(x)
        active.remove(y)
        rest = active
        colx = {k: a[k][x] for k in rest}
        coly = {k: a[k][y] for k in rest}
        for k in rest:
            for l in rest:
                corr = (colx[k] * coly[l] + coly[k] * colx[l]) / c
                if not corr.is_zero():
                    a[k][l] = a[k][l] - corr
    return pos, neg, zero


# -- finite / affine type catalog ---------------------------------------

_SPHERICAL_ORDER = {
    "H3": 120,
    "H4": 14400,
    "F4": 1152,
    "E6": 51840,
    "E7": 2903040,
    "E8": 696729600,
}


def _component_shape(diagram: Diagram, comp):
    """(degree sequence data, edge labels) used by the catalog matcher."""
    edges = {}
    for pair, lab in diagram.edges.items():
        i, j = tuple(pair)
        if i in comp and j in comp:
            if lab is INFINITY:
                edges[frozenset(pair)] = "inf"
            elif isinstance(lab, Angle):
                edges[frozenset(pair)] = lab.m
            else:
                edges[frozenset(pair)] = "dashed"
    deg = {v: 0 for v in comp}
    for pair in edges:
        for v in pair:
            deg[v] += 1
    return edges, deg


def _path_labels(comp, edges, deg):
    """Labels along a path component, or None if not a path."""
    n = len(comp)
    if n == 1:
        return []
    ends = [v for v in comp if deg[v] == 1]
    if len(ends) != 2 or any(deg[v] > 2 for v in comp):
        return None
    if len(edges) != n - 1:
        return None
    labels = []
    prev = None
    cur = min(ends)
    for _ in range(n - 1):
        nxt = None
        for pair, lab in edges.items():
            if cur in pair:
                other = next(x for x in pair if x != cur)
                if other != prev:
                    nxt = other
                    labels.append(lab)
                    break
        if nxt is None:
            return None
        prev, cur = cur, nxt
    return labels


def _recognize_spherical(diagram: Diagram, comp) -> tuple[str, int] | None:
    """Type tag and group order of a connected spherical component."""
    edges, deg = _component_shape(diagram, comp)
    n = len(comp)
    if any(lab in ("inf", "dashed") for lab in edges.values()):
        return None
    if n == 1:
        return "A1", 2
    labels = _path_labels(comp, edges, deg)
    if labels is not None:
        if all(m == 3 for m in labels):
            return f"A{n}", factorial(n + 1)
        if n == 2:
            m = labels[0]
            return f"I2({m})", 2 * m
        ends_4 = (labels[0] == 4 and all(m == 3 for m in labels[1:])) or (
            labels[-1] == 4 and all(m == 3 for m in labels[:-1])
        )
        if ends_4:
            return f"B{n}", 2**n * factorial(n)
        if n == 4 and labels == [3, 4, 3]:
            return "F4", _SPHERICAL_ORDER["F4"]
        if n == 3 and labels in ([5, 3], [3, 5]):
            return "H3", _SPHERICAL_ORDER["H3"]
        if n == 4 and labels in ([5, 3, 3], [3, 3, 5]):
            return "H4", _SPHERICAL_ORDER["H4"]
        return None
    # trees with one branch vertex: D_n and E_n
    if len(edges) != n - 1 or any(lab != 3 for lab in edges.values()):
        return None
    branch = [v for v in comp if deg[v] == 3]
    if len(branch) != 1 or any(deg[v] > 3 for v in comp):
        return None
    # arm lengths from the branch vertex
    arms = []
    b = branch[0]
    for pair in edges:
        if b in pair:
            length = 1
            prev, cur = b, next(x for x in pair if x != b)
            while deg[cur] == 2:
                nxt = next(
                    x
                    for p2 in edges
                    if cur in p2
                    for x in p2
                    if x != cur and x != prev
                )
                prev, cur = cur, nxt
                length += 1
            arms.append(length)
    arms.sort()
    if arms == [1, 1, n - 3] or (n == 4 and arms == [1, 1, 1]):
        return f"D{n}", 2 ** (n - 1) * factorial(n)
    if n in (6, 7, 8) and arms == [1, 2, n - 4]:
        tag = f"E{n}"
        return tag, _SPHERICAL_ORDER[tag]
    return None


def _recognize_affine(diagram: Diagram, comp) -> str | None:
    """Type tag of a connected affine component."""
    edges, deg = _component_shape(diagram, comp)
    n = len(comp)
    if any(lab == "dashed" for lab in edges.values()):
        return None
    if n == 2 and list(edges.values()) == ["inf"]:
        return "A~1"
    if any(lab == "inf" for lab in edges.values()):
        return None
    # cycle with all labels 3: affine A_{n-1}
    if len(edges) == n and all(d == 2 for d in deg.values()):
        if all(lab == 3 for lab in edges.values()):
            return f"A~{n - 1}"
        return None
    labels = _path_labels(comp, edges, deg)
    if labels is not None:
        if n >= 3 and labels[0] == 4 and labels[-1] == 4 and all(
            m == 3 for m in labels[1:-1]
        ):
            return f"C~{n - 1}"
        if n == 3 and sorted(labels) == [3, 6]:
            return "G~2"
        if n == 5 and labels in ([3, 4, 3, 3], [3, 3, 4, 3]):
            return "F~4"
        return None
    # forked trees: affine B and D families and affine E
    if len(edges) != n - 1:
        return None
    branch = [v for v in comp if deg[v] >= 3]
    if any(deg[v] > 3 for v in comp):
        return None
    if len(branch) == 1:
        b = branch[0]
        arms = []
        arm_labels = []
        for pair in edges:
            if b in pair:
                length = 1
                labs = [edges[pair]]
                prev, cur = b, next(x for x in pair if x != b)
                while deg[cur] == 2:
                    nxt_pair = next(
                        p2 for p2 in edges if cur in p2 and prev not in p2
                    )
                    labs.append(edges[nxt_pair])
                    prev, cur = cur, next(x for x in nxt_pair if x != cur)
                    length += 1
                arms.append(length)
                arm_labels.append(labs)
        order = sorted(range(3), key=lambda k: arms[k])
        arms = [arms[k] for k in order]
        arm_labels = [arm_labels[k] for k in order]
        if arms[0] == arms[1] == 1:
            long_labels = arm_labels[2]
            if all(l == 3 for l in arm_labels[0] + arm_labels[1]):
                if all(l == 3 for l in long_labels[:-1]) and long_labels[-1] == 4:
                    return f"B~{n - 1}"
        if n in (7, 8, 9):
            shape = sorted(arms)
            if all(l == 3 for labs in arm_labels for l in labs):
                if n == 7 and shape == [2, 2, 2]:
                    return "E~6"
                if n == 8 and shape == [1, 3, 3]:
                    return "E~7"
                if n == 9 and shape == [1, 2, 5]:
                    return "E~8"
        return None
    if len(branch) == 2 and all(lab == 3 for lab in edges.values()):
        # two fork ends, all arms length 1 off a path: affine D
        ends = [v for v in comp if deg[v] == 1]
        if len(ends) == 4:
            return f"D~{n - 1}"
    # four arms of length 1 from one vertex (affine D_4)
    deg4 = [v for v in comp if deg[v] == 4]
    if len(deg4) == 1 and n == 5 and all(lab == 3 for lab in edges.values()):
        return "D~4"
    return None


@dataclass
class SubdiagramClass:
    verdict: str  # "spherical" | "affine" | "other"
    components: tuple
    rank: int
    order: int | None

    @property
    def type_tag(self) -> str:
        return "x".join(tag for tag, _ in self.components) if self.components else "-"


def classify_subdiagram(diagram: Diagram, subset) -> SubdiagramClass:
    subset = tuple(sorted(subset))
    if not subset:
        return SubdiagramClass("spherical", (), 0, 1)
    sub = diagram.restricted(subset)
    if sub.has_dashed():
        return SubdiagramClass("other", (), 0, None)
    comps = sub.components()
    pos, neg, zero = signature(gram_matrix(sub))
    n = len(subset)
    if neg == 0 and zero == 0:
        parts = []
        order = 1
        for comp in comps:
            rec = _recognize_spherical(sub, comp)
            if rec is None:
                raise AssertionError(
                    f"positive definite component {comp} missing from catalog"
                )
            parts.append((rec[0], comp))
            order *= rec[1]
        return SubdiagramClass("spherical", tuple(parts), n, order)
    if neg == 0 and zero == len(comps):
        parts = []
        for comp in comps:
            tag = _recognize_affine(sub, comp)
            if tag is None:
                raise AssertionError(
                    f"semidefinite component {comp} not recognized as affine"
                )
            parts.append((tag, comp))
        return SubdiagramClass("affine", tuple(parts), n - len(comps), None)
    return SubdiagramClass("other", (), 0, None)


@dataclass
class VinbergReport:
    dimension: int
    connected: bool
    signature: tuple[int, int, int]
    nonpositive_off_diagonal: bool

    @property
    def passed(self) -> bool:
        pos, neg, _ = self.signature
        return (
            self.connected
            and pos == self.dimension
            and neg == 1
            and self.nonpositive_off_diagonal
        )

    def failures(self) -> list[str]:
        out = []
        if not self.connected:
            out.append("diagram is not connected")
        pos, neg, _ = self.signature
        if not (pos == self.dimension and neg == 1):
            out.append(
                f"signature {self.signature} is not ({self.dimension},1,*)"
            )
        if not self.nonpositive_off_diagonal:
            out.append("some off-diagonal Gram entry is positive")
        return out


def vinberg_check(diagram: Diagram, n: int) -> VinbergReport:
    g = gram_matrix(diagram)
    sig = signature(g)
    k = g.size
    nonpos = all(
        g.entries[i][j].sign() <= 0 for i in range(k) for j in range(k) if i != j
    )
    return VinbergReport(n, diagram.is_connected(), sig, nonpos)


def diagram_automorphisms(diagram: Diagram) -> list[dict]:
    """All label-preserving vertex permutations, as dicts."""
    verts = diagram.vertices
    n = len(verts)

    def key(i, j):
        lab = diagram.label(i, j)
        if lab is None:
            return 2
        if isinstance(lab, Angle):
            return lab.m
        if lab is INFINITY:
            return "inf"
        return ("dashed", lab.coshd)

    # invariant refinement: multiset of incident labels
    def invariant(v):
        return tuple(sorted(str(key(v, w)) for w in verts if w != v))

    inv = {v: invariant(v) for v in verts}
    autos = []

    def backtrack(mapping, remaining):
        if not remaining:
            autos.append(dict(mapping))
            return
        v = remaining[0]
        for w in verts:
            if w in mapping.values() or inv[v] != inv[w]:
                continue
            ok = all(key(v, u) == key(w, mapping[u]) for u in mapping)
            if ok:
                mapping[v] = w
                backtrack(mapping, remaining[1:])
                del mapping[v]

    backtrack({}, list(verts))
    return autos
