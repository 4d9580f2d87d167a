"""Integer matrix utilities: Smith normal form, lattice bases, Z-solvability.

Everything here works on plain Python ints (arbitrary precision).  The
Smith reduction prefers +-1 pivots so the sparse relation matrices coming
from cell complexes collapse quickly before any coefficient growth.
"""
from __future__ import annotations

from fractions import Fraction

__all__ = [
    "smith_normal_form_diagonal",
    "abelian_invariants",
    "row_lattice_basis",
    "solve_integer",
]


def _clone(rows):
    return [list(r) for r in rows]


def smith_normal_form_diagonal(rows: list[list[int]]) -> list[int]:
    """Diagonal of the Smith normal form of an integer matrix.

    Returns the list of nonzero diagonal entries d_1 | d_2 | ... (positive).
    """
    a = _clone(rows)
    if not a or not a[0]:
        return []
    m, n = len(a), len(a[0])
    diag: list[int] = []
    top = 0
    left = 0
    while top < m and left < n:
        # pick the pivot with smallest nonzero absolute value
        piv = None
        best = None
        for i in range(top, m):
            row = a[i]
            for j in range(left, n):
                v = row[j]
                if v != 0:
                    av = abs(v)
                    if best is None or av < best:
                        best = av
                        piv = (i, j)
                        if av == 1:
                            break
            if best == 1:
                break
        if piv is None:
            break
        i0, j0 = piv
        a[top], a[i0] = a[i0], a[top]
        for row in a:
            row[left], row[j0] = row[j0], row[left]
        while True:
            # clear the pivot column
            again = False
            p = a[top][left]
            for i in range(top + 1, m):
                v = a[i][left]
                if v:
                    q = v // p
                    if q:
                        ai, at = a[i], a[top]
                        for j in range(left, n):
                            ai[j] -= q * at[j]
                    if a[i][left]:
                        a[top], a[i] = a[i], a[top]
                        again = True
                        break
            if again:
                continue
            # clear the pivot row
            p = a[top][left]
            for j in range(left + 1, n):
                v = a[top][j]
                if v:
                    q = v // p
                    if q:
                        for i in range(top, m):
                            a[i][j] -= q * a[i][left]
                    if a[top][j]:
                        # swap columns to bring the smaller remainder in
                        for i in range(m):
                            a[i][left], a[i][j] = a[i][j], a[i][left]
                        again = True
                        break
            if not again:
                break
        diag.append(abs(a[top][left]))
        top += 1
        left += 1
    # enforce the divisibility chain
    for i in range(len(diag)):
        for j in range(i + 1, len(diag)):
            if diag[j] % diag[i]:
                from math import gcd

                g = gcd(diag[i], diag[j])
                diag[j] = diag[i] * diag[j] // g
                diag[i] = g
    return [d for d in diag if d]


def abelian_invariants(rows: list[list[int]], ngens: int) -> tuple[int, tuple[int, ...]]:
    """Invariants of Z^ngens / row-span: (free rank, torsion factors > 1).

    Relation matrices from cell complexes are large but almost entirely
    reducible by +-1 pivots; a sparse elimination pass shrinks them to a
    small dense core before the Smith reduction proper.
    """
    if not rows:
        return ngens, ()
    units, core = _sparse_unit_reduce(rows)
    diag = smith_normal_form_diagonal(core) if core else []
    rank = units + len(diag)
    torsion = tuple(d for d in diag if d > 1)
    return ngens - rank, torsion


def _sparse_unit_reduce(rows):
    """Eliminate +-1 pivots sparsely; returns (pivot count, dense core)."""
    from collections import deque

    rdicts = []
    for r in rows:
        d = {j: v for j, v in enumerate(r) if v}
        if d:
            rdicts.append(d)
    col_rows: dict[int, set[int]] = {}
    for i, d in enumerate(rdicts):
        for j in d:
            col_rows.setdefault(j, set()).add(i)
    alive = set(range(len(rdicts)))
    queue = deque(sorted(alive, key=lambda i: len(rdicts[i])))
    units = 0
    while queue:
        i = queue.popleft()
        if i not in alive:
            continue
        d = rdicts[i]
        pc = None
        for j, v in d.items():
            if v == 1 or v == -1:
                pc = j
                break
        if pc is None:
            continue
        pv = d[pc]
        touched = []
        for k in list(col_rows.get(pc, ())):
            if k == i or k not in alive:
                continue
            dk = rdicts[k]
            f = dk[pc] * pv
            for j, v in d.items():
                nv = dk.get(j, 0) - f * v
                if nv:
                    dk[j] = nv
                    col_rows.setdefault(j, set()).add(k)
                else:
                    dk.pop(j, None)
                    cr = col_rows.get(j)
                    if cr:
                        cr.discard(k)
            if not dk:
                alive.discard(k)
            else:
                touched.append(k)
        alive.discard(i)
        for j in d:
            cr = col_rows.get(j)
            if cr:
                cr.discard(i)
        units += 1
        queue.extend(touched)
    live_rows = [rdicts[i] for i in sorted(alive)]
    cols = sorted({j for d in live_rows for j in d})
    core = [[d.get(j, 0) for j in cols] for d in live_rows]
    return units, core


def row_lattice_basis(rows: list[list[int]]) -> list[list[int]]:
    """Basis of the lattice spanned by the rows (row-style Hermite form)."""
    a = [list(r) for r in rows if any(r)]
    if not a:
        return []
    n = len(a[0])
    basis: list[list[int]] = []
    col = 0
    while a and col < n:
        nz = [r for r in a if r[col] != 0]
        rest = [r for r in a if r[col] == 0]
        if not nz:
            a = rest
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            out = [p]
            for r in nz[1:]:
                q = r[col] // p[col]
                rr = [x - q * y for x, y in zip(r, p)]
                if rr[col] != 0:
                    out.append(rr)
                elif any(rr):
                    rest.append(rr)
            nz = out
        basis.append(nz[0])
        a = rest
        col += 1
    return basis


def solve_integer(columns: list[list[int]], target: list[int]) -> list[int] | None:
    """Solve sum_i x_i * columns[i] = target over the integers, or None.

    Gaussian elimination over Q followed by a denominator check would miss
    non-primitive lattices, so this runs column-style elimination carrying
    the coefficient matrix along (a Hermite-form solve).
    """
    k = len(columns)
    if k == 0:
        return [] if not any(target) else None
    n = len(target)
    # work matrix: columns of A augmented with identity bookkeeping
    cols = [list(c) for c in columns]
    book = [[1 if i == j else 0 for j in range(k)] for i in range(k)]

    order: list[int] = []  # pivot row indices
    pivots: list[int] = []  # which column holds each pivot
    active = list(range(k))
    for row in range(n):
        nzidx = [ci for ci in active if cols[ci][row] != 0]
        if not nzidx:
            continue
        while len(nzidx) > 1:
            nzidx.sort(key=lambda ci: abs(cols[ci][row]))
            p = nzidx[0]
            keep = [p]
            for ci in nzidx[1:]:
                q = cols[ci][row] // cols[p][row]
                if q:
                    cols[ci] = [x - q * y for x, y in zip(cols[ci], cols[p])]
                    book[ci] = [x - q * y for x, y in zip(book[ci], book[p])]
                if cols[ci][row] != 0:
                    keep.append(ci)
            nzidx = keep
        p = nzidx[0]
        order.append(row)
        pivots.append(p)
        active = [ci for ci in active if ci != p]
    # back-substitute target against the triangular pivot columns
    coeffs = [0] * k
    t = list(target)
    for row, p in zip(order, pivots):
        v = t[row]
        pv = cols[p][row]
        if v % pv:
            return None
        q = v // pv
        if q:
            t = [x - q * y for x, y in zip(t, cols[p])]
        coeffs_p = q
        if coeffs_p:
            for j in range(k):
                coeffs[j] += coeffs_p * book[p][j]
    if any(t):
        return None
    return coeffs
