"""Exact Euclidean isometries with entries in Q(sqrt2, sqrt3, sqrt7).

Isometries are pairs (M, t) acting as x -> M x + t.  All model-cell
geometry (cuboids, triangular prisms, hexagons) has coordinates in the
field, so compositions, inverses and point images are exact.
"""
from __future__ import annotations

from .field import AlgNum, alg

__all__ = ["Isometry", "vec", "identity_isometry", "mat_det", "kernel_basis"]


def vec(*xs):
    return tuple(alg(x) for x in xs)


def _matvec(m, v):
    out = []
    for row in m:
        acc = alg(0)
        for a, b in zip(row, v):
            if not (a.is_zero() or b.is_zero()):
                acc = acc + a * b
        out.append(acc)
    return tuple(out)


def _matmul(a, b):
    cols = list(zip(*b))
    return tuple(
        tuple(
            sum((x * y for x, y in zip(row, col) if not (x.is_zero() or y.is_zero())), alg(0))
        for col in cols)
        for row in a
    )


def _mat_transpose(m):
    return tuple(map(tuple, zip(*m)))


class Isometry:
    __slots__ = ("m", "t", "_key")

    def __init__(self, m, t):
        self.m = tuple(tuple(alg(x) for x in row) for row in m)
        self.t = tuple(alg(x) for x in t)
        self._key = None

    def __call__(self, p):
        return tuple(a + b for a, b in zip(_matvec(self.m, p), self.t))

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other: (self*other)(x) = self(other(x))."""
        return Isometry(
            _matmul(self.m, other.m),
            tuple(a + b for a, b in zip(_matvec(self.m, other.t), self.t)),
        )

    def inverse(self) -> "Isometry":
        # orthogonal rotation part: inverse is the transpose
        mt = _mat_transpose(self.m)
        return Isometry(mt, tuple(-x for x in _matvec(mt, self.t)))

    def key(self):
        if self._key is None:
            self._key = (
                tuple(x.coords for row in self.m for x in row),
                tuple(x.coords for x in self.t),
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, Isometry) and self.m == other.m and self.t == other.t

    def __hash__(self):
        return hash(self.key())

    @property
    def rotation(self):
        return self.m

    def is_identity(self) -> bool:
        n = len(self.t)
        if any(not x.is_zero() for x in self.t):
            return False
        for i in range(n):
            for j in range(n):
                want = alg(1) if i == j else alg(0)
                if self.m[i][j] != want:
                    return False
        return True

    def __repr__(self):
        return f"Isometry(m={self.m}, t={self.t})"


def identity_isometry(n=3) -> Isometry:
    one, zero = alg(1), alg(0)
    return Isometry(
        [[one if i == j else zero for j in range(n)] for i in range(n)],
        [zero] * n,
    )


def mat_det(m) -> AlgNum:
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    if n == 3:
        return (
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        )
    raise ValueError("determinant implemented up to 3x3")


def kernel_basis(m) -> list[tuple]:
    """Basis of the kernel of a square AlgNum matrix (exact elimination)."""
    n = len(m)
    rows = [list(r) for r in m]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, n) if not rows[i][c].is_zero()), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        d = rows[r][c]
        rows[r] = [x / d for x in rows[r]]
        for i in range(n):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == n:
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [alg(0)] * n
        v[fc] = alg(1)
        for ri, pc in enumerate(pivots):
            v[pc] = -rows[ri][fc]
        basis.append(tuple(v))
    return basis
