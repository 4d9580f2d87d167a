"""Exact arithmetic in the totally real field Q(sqrt2, sqrt3, sqrt7).

Elements are stored as 8 rational coordinates over the basis

    1, sqrt2, sqrt3, sqrt6, sqrt7, sqrt14, sqrt21, sqrt42,

i.e. sqrt(d) for the squarefree divisors d of 42.  This field contains
every number needed by the diagram computations: cos(pi/m) for
m in {2,3,4,6}, the dashed-edge labels sqrt2 and sqrt(7/3) = sqrt21/3,
and all entries of the derived Gram matrices.

Sign determination is exact: the zero test is coordinate-wise, and a
nonzero element's sign is obtained by evaluating the real embedding with
certified rational enclosures of sqrt2, sqrt3, sqrt7, refining the
precision until the enclosing interval excludes zero.  Refinement
terminates because a nonzero element of a fixed number field is bounded
away from zero in terms of its coordinate heights.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt

__all__ = [
    "AlgNum",
    "DivisionByZero",
    "NegativeRadicand",
    "UnsupportedRadicand",
    "LiteralError",
    "alg",
    "make_algnum",
    "sqrt_rational",
    "cos_pi_over",
]

# Squarefree divisors of 42, in the fixed basis order.
RADICANDS = (1, 2, 3, 6, 7, 14, 21, 42)
_INDEX = {d: i for i, d in enumerate(RADICANDS)}

_ZERO = Fraction(0)
_ONE = Fraction(1)


class UnsupportedRadicand(ValueError):
    """sqrt of a rational whose squarefree part does not divide 42."""


class NegativeRadicand(ValueError):
    """sqrt of a negative rational."""


class DivisionByZero(ZeroDivisionError):
    """Division by the zero element of the field."""


class LiteralError(ValueError):
    """Malformed algebraic literal."""


def _mul_table() -> tuple[tuple[tuple[Fraction, int], ...], ...]:
    # sqrt(a)*sqrt(b) = g*sqrt(ab/g^2) with g = gcd(a, b); both radicands
    # are squarefree divisors of 42, so the product radicand is again one.
    table = []
    for a in RADICANDS:
        row = []
        for b in RADICANDS:
            g = gcd(a, b)
            row.append((Fraction(g), _INDEX[(a * b) // (g * g)]))
        table.append(tuple(row))
    return tuple(table)


_MUL = _mul_table()

# Galois conjugation: each automorphism flips the signs of sqrt2, sqrt3,
# sqrt7 independently; on the basis element sqrt(d) it acts by the product
# of the flipped signs of the primes dividing d.
_CONJ_SIGNS = []
for _e2 in (1, -1):
    for _e3 in (1, -1):
        for _e7 in (1, -1):
            _CONJ_SIGNS.append(
                tuple(
                    (_e2 if d % 2 == 0 else 1)
                    * (_e3 if d % 3 == 0 else 1)
                    * (_e7 if d % 7 == 0 else 1)
                    for d in RADICANDS
                )
            )
_CONJ_SIGNS = tuple(_CONJ_SIGNS)

_ENCLOSURE_CACHE: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}


def _sqrt_enclosure(d: int, prec: int) -> tuple[Fraction, Fraction]:
    """Rational lo <= sqrt(d) <= hi with hi - lo = 2**-prec."""
    key = (d, prec)
    cached = _ENCLOSURE_CACHE.get(key)
    if cached is not None:
        return cached
    s = 1 << prec
    lo = isqrt(d * s * s)
    enclosure = (Fraction(lo, s), Fraction(lo + 1, s))
    _ENCLOSURE_CACHE[key] = enclosure
    return enclosure


class AlgNum:
    """An element of Q(sqrt2, sqrt3, sqrt7), immutable and hashable."""

    __slots__ = ("coords",)

    def __init__(self, coords):
        coords = tuple(coords)
        if len(coords) != 8:
            raise ValueError("AlgNum needs 8 coordinates")
        object.__setattr__(
            self,
            "coords",
            tuple(c if isinstance(c, Fraction) else Fraction(c) for c in coords),
        )

    def __setattr__(self, name, value):
        raise AttributeError("AlgNum is immutable")

    @classmethod
    def from_rational(cls, q) -> AlgNum:
        return cls((Fraction(q), _ZERO, _ZERO, _ZERO, _ZERO, _ZERO, _ZERO, _ZERO))

    @classmethod
    def sqrt_basis(cls, d: int, coeff=1) -> AlgNum:
        coords = [_ZERO] * 8
        coords[_INDEX[d]] = Fraction(coeff)
        return cls(coords)

    # -- predicates ----------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coords[1:])

    def is_rational_integer(self) -> bool:
        return self.is_rational() and self.coords[0].denominator == 1

    @property
    def rational_part(self) -> Fraction:
        return self.coords[0]

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return self.coords[0]

    # -- ring operations ----------------------------------------------

    def __add__(self, other) -> AlgNum:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return AlgNum(tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self) -> AlgNum:
        return AlgNum(tuple(-a for a in self.coords))

    def __sub__(self, other) -> AlgNum:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return AlgNum(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __rsub__(self, other) -> AlgNum:
        return (-self) + other

    def __mul__(self, other) -> AlgNum:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coords, other.coords
        if a[1:] == _SEVEN_ZEROS:
            q = a[0]
            if q == 1:
                return other
            if q == 0:
                return _ZERO_ELEMENT
            return AlgNum(tuple(q * x for x in b))
        if b[1:] == _SEVEN_ZEROS:
            q = b[0]
            if q == 1:
                return self
            if q == 0:
                return _ZERO_ELEMENT
            return AlgNum(tuple(q * x for x in a))
        out = [_ZERO] * 8
        for i, x in enumerate(a):
            if x == 0:
                continue
            row = _MUL[i]
            for j, y in enumerate(b):
                if y == 0:
                    continue
                coeff, k = row[j]
                out[k] += x * y * coeff
        return AlgNum(out)

    __rmul__ = __mul__

    def conjugate(self, k: int) -> AlgNum:
        """Apply the k-th Galois automorphism (0 is the identity)."""
        signs = _CONJ_SIGNS[k]
        return AlgNum(tuple(s * c for s, c in zip(signs, self.coords)))

    def inverse(self) -> AlgNum:
        if self.is_zero():
            raise DivisionByZero("inverse of zero")
        if self.is_rational():
            return AlgNum.from_rational(1 / self.coords[0])
        # 1/x = (product of the 7 nontrivial conjugates) / norm(x); the
        # norm is the product over all 8 conjugates and is rational.
        prod = AlgNum.from_rational(1)
        for k in range(1, 8):
            prod = prod * self.conjugate(k)
        norm = self * prod
        if not norm.is_rational():
            raise AssertionError("field norm must be rational")
        n = norm.coords[0]
        if n == 0:
            raise AssertionError("nonzero element with zero norm")
        return AlgNum(tuple(c / n for c in prod.coords))

    def __truediv__(self, other) -> AlgNum:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other) -> AlgNum:
        return _coerce(other) * self.inverse()

    def __pow__(self, n: int) -> AlgNum:
        if n < 0:
            return self.inverse() ** (-n)
        result = AlgNum.from_rational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- order ----------------------------------------------------------

    def sign(self) -> int:
        """Exact sign in {-1, 0, +1} under the real embedding."""
        if self.is_zero():
            return 0
        if self.is_rational():
            q = self.coords[0]
            return 1 if q > 0 else -1
        prec = 32
        while True:
            lo = hi = _ZERO
            for c, d in zip(self.coords, RADICANDS):
                if c == 0:
                    continue
                if d == 1:
                    lo += c
                    hi += c
                    continue
                slo, shi = _sqrt_enclosure(d, prec)
                if c > 0:
                    lo += c * slo
                    hi += c * shi
                else:
                    lo += c * shi
                    hi += c * slo
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            prec *= 2
            if prec > 1 << 16:
                raise AssertionError(f"sign refinement stalled on {self!r}")

    def __eq__(self, other) -> bool:
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    # -- conversion and display -----------------------------------------

    def __float__(self) -> float:
        lo, hi = self.enclosure(64)
        return float((lo + hi) / 2)

    def enclosure(self, prec: int) -> tuple[Fraction, Fraction]:
        lo = hi = _ZERO
        for c, d in zip(self.coords, RADICANDS):
            if c == 0:
                continue
            if d == 1:
                lo += c
                hi += c
                continue
            slo, shi = _sqrt_enclosure(d, prec)
            if c > 0:
                lo += c * slo
                hi += c * shi
            else:
                lo += c * shi
                hi += c * slo
        return lo, hi

    def literal(self) -> str:
        """Render as a parseable literal; only single-term elements qualify."""
        nonzero = [(c, d) for c, d in zip(self.coords, RADICANDS) if c != 0]
        if not nonzero:
            return "0"
        if len(nonzero) > 1:
            raise ValueError(f"{self} is not a single-term literal")
        c, d = nonzero[0]
        if d == 1:
            return str(c)
        if c == 1:
            return f"sqrt({d})"
        return f"{c}*sqrt({d})"

    def __str__(self) -> str:
        terms = []
        for c, d in zip(self.coords, RADICANDS):
            if c == 0:
                continue
            if d == 1:
                terms.append(str(c))
            elif c == 1:
                terms.append(f"sqrt({d})")
            elif c == -1:
                terms.append(f"-sqrt({d})")
            else:
                terms.append(f"{c}*sqrt({d})")
        if not terms:
            return "0"
        out = terms[0]
        for t in terms[1:]:
            out += ("+" + t) if not t.startswith("-") else t
        return out

    def __repr__(self) -> str:
        return f"AlgNum({self})"


def _coerce(x) -> AlgNum:
    if isinstance(x, AlgNum):
        return x
    if isinstance(x, (int, Fraction)):
        return AlgNum.from_rational(x)
    return NotImplemented


_SEVEN_ZEROS = (_ZERO,) * 7
_ZERO_ELEMENT = AlgNum.from_rational(0)

ZERO = _ZERO_ELEMENT
ONE = AlgNum.from_rational(1)


def sqrt_rational(q) -> AlgNum:
    """Exact sqrt(q) for rational q >= 0 whose squarefree part divides 42."""
    q = Fraction(q)
    if q < 0:
        raise NegativeRadicand(f"sqrt of negative rational {q}")
    if q == 0:
        return ZERO
    # sqrt(n/m) = sqrt(n*m)/m; split n*m into square * squarefree part.
    n = q.numerator * q.denominator
    square = 1
    squarefree = 1
    k = 2
    while k * k <= n:
        while n % (k * k) == 0:
            square *= k
            n //= k * k
        if n % k == 0:
            squarefree *= k
            n //= k
        k += 1
    squarefree *= n
    if 42 % squarefree != 0:
        raise UnsupportedRadicand(
            f"sqrt radicand with squarefree part {squarefree} is outside the field"
        )
    return AlgNum.sqrt_basis(squarefree, Fraction(square, q.denominator))


def _parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise LiteralError(f"bad rational {text!r}") from exc


def make_algnum(expr: str) -> AlgNum:
    """Parse an algebraic literal: INT, INT/INT, sqrt(Q), or Q*sqrt(Q)."""
    text = expr.strip().replace(" ", "")
    if not text:
        raise LiteralError("empty literal")
    if "*" in text:
        left, _, right = text.partition("*")
        if not right.startswith("sqrt(") or not right.endswith(")"):
            raise LiteralError(f"expected Q*sqrt(Q), got {expr!r}")
        return AlgNum.from_rational(_parse_rational(left)) * sqrt_rational(
            _parse_rational(right[5:-1])
        )
    if text.startswith("sqrt(") and text.endswith(")"):
        return sqrt_rational(_parse_rational(text[5:-1]))
    return AlgNum.from_rational(_parse_rational(text))


def alg(x) -> AlgNum:
    """Coerce an int, Fraction, AlgNum or literal string to AlgNum."""
    if isinstance(x, AlgNum):
        return x
    if isinstance(x, str):
        return make_algnum(x)
    return AlgNum.from_rational(x)


_COS_PI_OVER = {
    2: ZERO,
    3: AlgNum.from_rational(Fraction(1, 2)),
    4: AlgNum.sqrt_basis(2, Fraction(1, 2)),
    6: AlgNum.sqrt_basis(3, Fraction(1, 2)),
}


def cos_pi_over(m: int) -> AlgNum:
    """cos(pi/m) for the angle denominators supported by the field."""
    if m in _COS_PI_OVER:
        return _COS_PI_OVER[m]
    raise UnsupportedRadicand(f"cos(pi/{m}) does not lie in Q(sqrt2,sqrt3,sqrt7)")
