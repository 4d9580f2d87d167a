"""Crystallographic groups for the ten closed flat 3-manifolds.

Standard generator sets are stored in the normalized shape used by the
density construction: every rotational part is a signed permutation
matrix preserving the x axis and preserving or exchanging the y and z
axes (the two prism-family manifolds use hexagonal-lattice rotations
about the z axis instead), and translations have the form
(sqrt2 a, sqrt3 b, sqrt3 c) with rational a, b, c.

From a generator list the module computes the point group, a translation
lattice basis, a finite presentation (lattice plus coset representatives
with the multiplication cocycle), first homology by Smith normal form,
orientability, and a fixed-point check for every nontrivial coset, i.e.
torsion-freeness.  The invariants of the ten standard groups form the
reference table that the tessellation oracle identifies against; the
quotient of the invariant cell grid by the group yields the builtin
fundamental templates.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .abelian import abelian_invariants, row_lattice_basis, solve_integer
from .euclid import Isometry, identity_isometry, kernel_basis, mat_det
from .field import AlgNum, alg, sqrt_rational
from .tessellation import (
    CellComplex3,
    NotFlat,
    UnsupportedFamily,
    cuboid_model,
    prism_model,
)

__all__ = [
    "BieberbachSpec",
    "LatticeNotPreserved",
    "WrongFreePattern",
    "standard_generators",
    "group_invariants",
    "reference_table",
    "identify_invariants",
    "builtin_complex",
    "bieberbach_normalized",
    "approximate_metric",
    "normalized_form",
]

CUBE_NAMES = ("E1", "E2", "E4", "E6", "B1", "B2", "B3", "B4")
PRISM_NAMES = ("E3", "E5")
ALL_NAMES = ("E1", "E2", "E3", "E4", "E5", "E6", "B1", "B2", "B3", "B4")


class LatticeNotPreserved(ValueError):
    pass


class WrongFreePattern(ValueError):
    pass


def _diag(a, b, c):
    z = alg(0)
    return ((alg(a), z, z), (z, alg(b), z), (z, z, alg(c)))


def _rx90():
    z, o = alg(0), alg(1)
    return ((o, z, z), (z, z, alg(-1)), (z, o, z))


def _rz(turns: Fraction):
    """Rotation about the z axis by turns*2pi, for turns in {1/6, 1/3}."""
    z, o = alg(0), alg(1)
    r3h = sqrt_rational(3) / 2
    half = alg(Fraction(1, 2))
    if turns == Fraction(1, 3):
        return ((-half, -r3h, z), (r3h, -half, z), (z, z, o))
    if turns == Fraction(1, 6):
        return ((half, -r3h, z), (r3h, half, z), (z, z, o))
    raise ValueError(turns)


# normalized forms for the cube family: (rotation, translation pattern)
# where the pattern marks each coordinate free ("a"/"b"/"c") or zero, and
# translations read (sqrt2 a, sqrt3 b, sqrt3 c)
NORMALIZED_FORMS = {
    "E1": [
        (_diag(1, 1, 1), ("a", 0, 0)),
        (_diag(1, 1, 1), (0, "b", 0)),
        (_diag(1, 1, 1), (0, 0, "c")),
    ],
    "E2": [
        (_diag(1, -1, -1), ("a", 0, 0)),
        (_diag(1, 1, 1), (0, "b", 0)),
        (_diag(1, 1, 1), (0, 0, "c")),
    ],
    "E4": [
        (_rx90(), ("a", 0, 0)),
        (_diag(1, 1, 1), (0, "b", 0)),
    ],
    "E6": [
        (_diag(1, -1, -1), ("a", 0, 0)),
        (_diag(-1, 1, -1), (0, "b", "c")),
    ],
    "B1": [
        (_diag(1, -1, 1), ("a", 0, 0)),
        (_diag(1, 1, 1), (0, "b", 0)),
        (_diag(1, 1, 1), (0, 0, "c")),
    ],
    "B2": [
        (_diag(1, -1, 1), ("a", 0, 0)),
        (_diag(1, 1, 1), (0, "b", "c")),
    ],
    "B3": [
        (_diag(1, -1, -1), ("a", 0, 0)),
        (_diag(1, -1, 1), (0, 0, "c")),
        (_diag(1, 1, 1), (0, "b", 0)),
    ],
    "B4": [
        (_diag(1, -1, -1), ("a", 0, 0)),
        (_diag(1, -1, 1), (0, "b", "c")),
    ],
}


def normalized_form(name: str):
    if name not in NORMALIZED_FORMS:
        raise WrongFreePattern(f"{name} has no cube-family normalized form")
    return NORMALIZED_FORMS[name]


@dataclass
class BieberbachSpec:
    name: str
    params: list[dict]  # one dict per generator: {"a": Fraction, ...}

    def denominator(self) -> int:
        d = 1
        for p in self.params:
            for v in p.values():
                d = d * Fraction(v).denominator // gcd(d, Fraction(v).denominator)
        return d


def _translation_from_pattern(pattern, values: dict):
    units = (sqrt_rational(2), sqrt_rational(3), sqrt_rational(3))
    keys = ("a", "b", "c")
    out = []
    for k in range(3):
        slot = pattern[k]
        if slot == 0:
            if keys[k] in values and Fraction(values[keys[k]]) != 0:
                raise WrongFreePattern(
                    f"entry {keys[k]} is constrained to zero in this form"
                )
            out.append(alg(0))
        else:
            if slot not in values:
                raise WrongFreePattern(f"missing free entry {slot}")
            q = Fraction(values[slot])
            if q == 0:
                raise WrongFreePattern(f"free entry {slot} must be nonzero")
            out.append(units[k] * q)
    return tuple(out)


def spec_generators(spec: BieberbachSpec) -> list[Isometry]:
    form = normalized_form(spec.name)
    if len(spec.params) != len(form):
        raise WrongFreePattern(
            f"{spec.name} takes {len(form)} generators, got {len(spec.params)}"
        )
    gens = []
    for (mat, pattern), values in zip(form, spec.params):
        gens.append(Isometry(mat, _translation_from_pattern(pattern, values)))
    return gens


def standard_generators(name: str) -> list[Isometry]:
    """The builtin generator set (all free entries equal to 1)."""
    if name in CUBE_NAMES:
        form = normalized_form(name)
        spec = BieberbachSpec(
            name,
            [
                {slot: Fraction(1) for slot in pattern if slot != 0}
                for _, pattern in form
            ],
        )
        return spec_generators(spec)
    if name == "E3":
        z = alg(0)
        return [
            Isometry(_rz(Fraction(1, 3)), (z, z, alg(2))),
            Isometry(
                identity_isometry().m,
                (alg(Fraction(3, 2)), sqrt_rational(3) / 2, z),
            ),
        ]
    if name == "E5":
        z = alg(0)
        return [
            Isometry(_rz(Fraction(1, 6)), (z, z, alg(1))),
            Isometry(
                identity_isometry().m,
                (alg(Fraction(3, 2)), sqrt_rational(3) / 2, z),
            ),
        ]
    raise ValueError(f"unknown manifold name {name!r}")


# -- group preprocessing -------------------------------------------------


class CrystalGroup:
    """Point group, coset representatives, lattice and membership tests."""

    def __init__(self, generators: list[Isometry]):
        self.generators = generators
        ident = identity_isometry()
        reps = {ident.m: ident}
        frontier = [ident]
        while frontier:
            nxt = []
            for r in frontier:
                for g in list(generators) + [g.inverse() for g in generators]:
                    cand = r.compose(g)
                    if cand.m not in reps:
                        reps[cand.m] = cand
                        nxt.append(cand)
            frontier = nxt
            if len(reps) > 48:
                raise NotFlat("point group exceeds crystallographic bounds")
        self.reps = reps  # rotation matrix -> affine representative
        self.point_group = list(reps.keys())
        # Schreier generators of the translation kernel
        vectors = []
        for r in reps.values():
            for g in list(generators) + [g.inverse() for g in generators]:
                prod = r.compose(g)
                k = prod.compose(reps[prod.m].inverse())
                if any(not x.is_zero() for x in k.t):
                    vectors.append(k.t)
        q_rows = [_flatten(v) for v in vectors]
        denom = 1
        for row in q_rows:
            for x in row:
                denom = denom * x.denominator // gcd(denom, x.denominator)
        int_rows = [[int(x * denom) for x in row] for row in q_rows]
        basis = row_lattice_basis(int_rows)
        if len(basis) != 3:
            raise NotFlat(f"translation lattice has rank {len(basis)}")
        self._denom = denom
        self._basis24 = basis
        self.lattice_basis = [
            _unflatten([Fraction(x, denom) for x in b]) for b in basis
        ]

    def lattice_contains(self, v) -> bool:
        target = _scale_flat(_flatten(v), self._denom)
        if target is None:
            return False
        return solve_integer([list(b) for b in self._basis24], target) is not None

    def member(self, iso: Isometry) -> bool:
        rep = self.reps.get(iso.m)
        if rep is None:
            return False
        k = iso.compose(rep.inverse())
        return self.lattice_contains(k.t)

    def lattice_coords(self, v):
        target = _scale_flat(_flatten(v), self._denom)
        if target is None:
            return None
        return solve_integer([list(b) for b in self._basis24], target)

    def has_torsion(self) -> bool:
        from .tessellation import _coset_has_fixed_point

        cols = [list(map(int, b)) for b in self._basis24]
        for r in self.reps.values():
            if r.is_identity():
                continue
            if _coset_has_fixed_point(r, cols):
                return True
        return False

    def orientable(self) -> bool:
        z = (alg(0),) * 3
        return all(mat_det(m) == alg(1) for m in self.point_group)


def _flatten(v):
    out = []
    for x in v:
        out.extend(x.coords)
    return out


def _scale_flat(row, denom):
    out = []
    for x in row:
        y = x * denom
        if y.denominator != 1:
            return None
        out.append(int(y))
    return out


def _unflatten(row24):
    return tuple(AlgNum(row24[8 * k : 8 * k + 8]) for k in range(3))


def group_invariants(generators: list[Isometry]):
    """(orientable, holonomy tag, H1) from the crystallographic presentation."""
    from .tessellation import _holonomy_tag

    grp = CrystalGroup(generators)
    if grp.has_torsion():
        raise NotFlat("group has torsion; not a manifold group")
    hs = [m for m in grp.point_group]
    nontrivial = [
        m for m in hs if not Isometry(m, (alg(0),) * 3).is_identity()
    ]
    nlat = 3
    gens_count = nlat + len(nontrivial)
    gidx = {m: nlat + i for i, m in enumerate(nontrivial)}
    rows = []

    def lattice_row(vecs_coeffs):
        row = [0] * gens_count
        for i, c in enumerate(vecs_coeffs):
            row[i] = c
        return row

    basis = grp.lattice_basis
    for m in nontrivial:
        rot = Isometry(m, (alg(0),) * 3)
        for i, b in enumerate(basis):
            img = rot(b)
            coeffs = grp.lattice_coords(img)
            if coeffs is None:
                raise AssertionError("point group does not preserve the lattice")
            row = [0] * gens_count
            row[i] += 1
            for j, c in enumerate(coeffs):
                row[j] -= c
            rows.append(row)
    for m1 in nontrivial:
        r1 = grp.reps[m1]
        for m2 in nontrivial:
            r2 = grp.reps[m2]
            prod = r1.compose(r2)
            r12 = grp.reps[prod.m]
            k = prod.compose(r12.inverse())
            coeffs = grp.lattice_coords(k.t)
            if coeffs is None:
                raise AssertionError("cocycle value outside the lattice")
            row = [0] * gens_count
            row[gidx[m1]] += 1
            row[gidx[m2]] += 1
            if prod.m in gidx:
                row[gidx[prod.m]] -= 1
            for j, c in enumerate(coeffs):
                row[j] -= c
            rows.append(row)
    h1 = abelian_invariants(rows, gens_count)
    tag = _holonomy_tag(grp.point_group)
    return grp.orientable(), tag, h1


_REFERENCE = None


def reference_table() -> dict:
    """Invariant triple -> manifold name, computed from the standard groups."""
    global _REFERENCE
    if _REFERENCE is None:
        table = {}
        for name in ALL_NAMES:
            inv = group_invariants(standard_generators(name))
            if inv in table:
                raise AssertionError(
                    f"invariants of {name} collide with {table[inv]}"
                )
            table[inv] = name
        _REFERENCE = table
    return _REFERENCE


def identify_invariants(orientable: bool, tag: str, h1) -> str:
    from .tessellation import NotIdentified

    name = reference_table().get((orientable, tag, h1))
    if name is None:
        raise NotIdentified(
            f"no closed flat 3-manifold with orientable={orientable},"
            f" holonomy={tag}, H1={h1}"
        )
    return name


# -- quotient construction -----------------------------------------------


def quotient_complex(
    generators: list[Isometry], model, kind=None, cap: int = 100000
) -> CellComplex3:
    """The quotient of the model-cell tessellation of R^3 by the group.

    The group must map the tessellation to itself (cells are the orbit of
    the model under its across-placements).  Cells of the quotient are
    placement classes; pairings carry the model symmetry relating the two
    frames.
    """
    grp = CrystalGroup(generators)
    seed = identity_isometry()
    reps = [seed]
    index = {}

    def locate(q: Isometry):
        for j, r in enumerate(reps):
            for si, s in enumerate(model.symmetries):
                if grp.member(q.compose(s).compose(r.inverse())):
                    return j, si
        return None, None

    pairs = []
    frontier = [0]
    seen_slots = set()
    while frontier:
        i = frontier.pop(0)
        for f in model.facet_names:
            if (i, f) in seen_slots:
                continue
            q = reps[i].compose(model.across[f])
            j, si = locate(q)
            if j is None:
                reps.append(q)
                j, si = len(reps) - 1, 0
                frontier.append(j)
                if len(reps) > cap:
                    raise AssertionError("quotient enumeration runaway")
            sym = model.symmetries[si]
            # pairing label: transition = rho_f . sigma, glued facet on the
            # far side is sigma^{-1}(opposite of f)
            f2 = model.sym_facet_perm[
                model.sym_index(sym.inverse())
            ][model.opposite[f]]
            pairs.append(((i, f), (j, f2), si))
            seen_slots.add((i, f))
            seen_slots.add((j, f2))
    special = None
    colors = None
    if kind == "layered":
        special = {}
        ex = (alg(1), alg(0), alg(0))
        for i, r in enumerate(reps):
            sp = []
            for f in model.facet_names:
                n = _facet_axis_normal(model, f)
                img = tuple(
                    sum((r.m[a][b] * n[b] for b in range(3)), alg(0))
                    for a in range(3)
                )
                if img[1].is_zero() and img[2].is_zero():
                    sp.append(f)
            if len(sp) != 2:
                raise AssertionError("expected exactly two x-normal facets")
            special[i] = frozenset(sp)
    elif kind == "marked":
        colors = {}
        s, h = model.dims
        u = (s, alg(0))
        v = (s / 2, s * sqrt_rational(3) / 2)
        order = ("R", "Y", "B")
        swap = {"R": "R", "Y": "B", "B": "Y"}
        for i, r in enumerate(reps):
            for vid in range(len(model.vertices)):
                pt = r(model.vertices[vid])
                jq = (pt[1] / v[1]).as_rational()
                iq = ((pt[0] - v[0] * jq) / u[0]).as_rational()
                lq = (pt[2] / h).as_rational()
                if any(x.denominator != 1 for x in (iq, jq, lq)):
                    raise AssertionError("vertex off the coloring grid")
                base = order[int(iq - jq) % 3]
                colors[(i, vid)] = base if int(lq) % 2 == 0 else swap[base]
    return CellComplex3(
        model, len(reps), pairs, kind=kind, special=special, colors=colors
    )


def _facet_axis_normal(model, f):
    axis = {"x": 0, "y": 1, "z": 2}[f[0]]
    n = [alg(0), alg(0), alg(0)]
    n[axis] = alg(1)
    return tuple(n)


def builtin_complex(name: str, family: str) -> CellComplex3:
    if name not in ALL_NAMES:
        raise ValueError(f"unknown manifold name {name!r}")
    if name in CUBE_NAMES:
        if family not in ("cube", "cubes", "cuboid"):
            raise UnsupportedFamily(f"{name} has a cube-family template only")
        model = cuboid_model(
            sqrt_rational(2), sqrt_rational(3), sqrt_rational(3)
        )
        return quotient_complex(standard_generators(name), model, kind="layered")
    if family not in ("prism", "prisms"):
        raise UnsupportedFamily(f"{name} has a prism-family template only")
    model = prism_model(1, 1)
    return quotient_complex(standard_generators(name), model, kind="marked")


def bieberbach_normalized(spec: BieberbachSpec):
    """Build the normalized group and its quotient layered tessellation."""
    if spec.name not in CUBE_NAMES:
        raise WrongFreePattern(
            f"{spec.name} is not in the cube family; use the prism path"
        )
    gens = spec_generators(spec)
    d = spec.denominator()
    # the group must preserve the lattice (1/d)(sqrt2 Z, sqrt3 Z, sqrt3 Z)
    units = (sqrt_rational(2) / d, sqrt_rational(3) / d, sqrt_rational(3) / d)
    for g in gens:
        for k in range(3):
            vec = [alg(0)] * 3
            vec[k] = units[k]
            img = tuple(
                sum((g.m[a][b] * vec[b] for b in range(3)), alg(0))
                for a in range(3)
            )
            if not _in_unit_lattice(img, units):
                raise LatticeNotPreserved(f"rotation image {img} leaves the lattice")
        if not _in_unit_lattice(g.t, units):
            raise LatticeNotPreserved(f"translation {g.t} leaves the lattice")
    model = cuboid_model(*units)
    complex = quotient_complex(gens, model, kind="layered")
    grp = CrystalGroup(gens)
    return grp, complex


def _in_unit_lattice(v, units) -> bool:
    for x, u in zip(v, units):
        q = x / u
        if not q.is_rational() or q.as_rational().denominator != 1:
            return False
    return True


def approximate_metric(name: str, targets: dict, eps: Fraction):
    """Parameters realizing the target metric data within eps.

    Cube family: ``targets`` maps free slots (like ``a1``) to target edge
    lengths; returns a BieberbachSpec whose realized lengths (sqrt2 a or
    sqrt3 b/c) are within eps of the targets.  Untargeted free entries
    default to 1/d for the common denominator d of the targeted ones,
    keeping the induced tessellation small.

    Prism family: ``targets`` has keys ``side`` and ``height``; returns
    (a, b, s, h) with a = 1 mod 3, b odd, a*s and b*h meeting the targets
    exactly and a/b within eps of the target ratio.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if name in PRISM_NAMES:
        ts = Fraction(targets["side"])
        th = Fraction(targets["height"])
        if ts <= 0 or th <= 0:
            raise ValueError("targets must be positive")
        rho = ts / th
        b = 1
        while True:
            a = round(rho * b)
            for cand in sorted({a - 2, a - 1, a, a + 1, a + 2}):
                if cand >= 1 and cand % 3 == 1 and abs(Fraction(cand, b) - rho) < eps:
                    return {
                        "a": cand,
                        "b": b,
                        "side": ts / cand,
                        "height": th / b,
                    }
            b += 2
            if b > 10**6:
                raise AssertionError("ratio search runaway")
    if name not in CUBE_NAMES:
        raise ValueError(f"unknown manifold name {name!r}")
    form = normalized_form(name)
    units = {"a": sqrt_rational(2), "b": sqrt_rational(3), "c": sqrt_rational(3)}
    params: list[dict] = []
    chosen: dict[str, Fraction] = {}
    for gi, (_mat, pattern) in enumerate(form):
        params.append({})
        for k, slot in enumerate(pattern):
            if slot == 0:
                continue
            key = f"{slot}{gi + 1}"
            if key in targets:
                t = Fraction(targets[key])
                q = _convergent_within(t, units[slot], eps)
                params[gi][slot] = q
                chosen[key] = q
            else:
                params[gi][slot] = None  # fill below
    d = 1
    for q in chosen.values():
        d = d * q.denominator // gcd(d, q.denominator)
    fill = Fraction(1, d)
    for p in params:
        for slot, val in p.items():
            if val is None:
                p[slot] = fill
    return BieberbachSpec(name, params)


def _convergent_within(target: Fraction, unit: AlgNum, eps: Fraction) -> Fraction:
    """First continued-fraction convergent q of target/unit with
    |unit*q - target| < eps, the acceptance test done in exact arithmetic.

    The continued fraction is expanded from a 256-bit rational enclosure
    midpoint; only convergents far beyond any sensible eps are affected
    by the truncation, and each candidate is checked exactly anyway.
    """
    lo, hi = unit.enclosure(256)
    x = 2 * target / (lo + hi)
    a = x
    h0, h1 = Fraction(0), Fraction(1)
    k0, k1 = Fraction(1), Fraction(0)
    for _ in range(300):
        fl = a.numerator // a.denominator
        h0, h1 = h1, fl * h1 + h0
        k0, k1 = k1, fl * k1 + k0
        if k1 > 0 and h1 > 0:
            q = Fraction(h1, k1)
            err = unit * q - alg(target)
            if err.sign() < 0:
                err = -err
            if (err - alg(eps)).sign() < 0:
                return q
        if a == fl:
            break
        a = 1 / (a - fl)
    raise AssertionError("no convergent within eps (eps too small for precision)")
