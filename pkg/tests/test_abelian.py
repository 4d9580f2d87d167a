import random

from cuspfold.abelian import (
    abelian_invariants,
    row_lattice_basis,
    smith_normal_form_diagonal,
    solve_integer,
)


def test_snf_simple():
    assert smith_normal_form_diagonal([[2, 0], [0, 4]]) == [2, 4]
    assert smith_normal_form_diagonal([[4, 0], [0, 6]]) == [2, 12]
    assert smith_normal_form_diagonal([[1, 2], [3, 4]]) == [1, 2]


def test_snf_zero_and_empty():
    assert smith_normal_form_diagonal([[0, 0], [0, 0]]) == []
    assert smith_normal_form_diagonal([]) == []


def test_abelian_invariants_torus():
    # Z^3 with no relations
    assert abelian_invariants([], 3) == (3, ())
    # Z^2 / <(2,0),(0,2)> = Z2 x Z2
    assert abelian_invariants([[2, 0], [0, 2]], 2) == (0, (2, 2))
    # Z^2 / <(1,1)> = Z
    assert abelian_invariants([[1, 1]], 2) == (1, ())


def test_snf_random_against_determinant():
    rng = random.Random(5)
    for _ in range(25):
        n = 3
        rows = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(n)]
        det = (
            rows[0][0] * (rows[1][1] * rows[2][2] - rows[1][2] * rows[2][1])
            - rows[0][1] * (rows[1][0] * rows[2][2] - rows[1][2] * rows[2][0])
            + rows[0][2] * (rows[1][0] * rows[2][1] - rows[1][1] * rows[2][0])
        )
        diag = smith_normal_form_diagonal(rows)
        prod = 1
        for d in diag:
            prod *= d
        if det != 0:
            assert len(diag) == 3 and prod == abs(det)
        else:
            assert len(diag) < 3


def test_row_lattice_basis_rank():
    basis = row_lattice_basis([[2, 0, 0], [0, 3, 0], [2, 3, 0], [4, 0, 0]])
    assert len(basis) == 2


def test_solve_integer():
    cols = [[2, 0], [0, 3]]
    assert solve_integer(cols, [4, 3]) == [2, 1]
    assert solve_integer(cols, [1, 0]) is None
    assert solve_integer(cols, [0, 0]) == [0, 0]


def test_solve_integer_nonprimitive():
    # lattice spanned by (2,2) and (0,4): (2,6) = 1*(2,2) + 1*(0,4)
    cols = [[2, 2], [0, 4]]
    assert solve_integer(cols, [2, 6]) == [1, 1]
    # (1,1) is in the Q-span but not the Z-span
    assert solve_integer(cols, [1, 1]) is None


def test_solve_integer_random_roundtrip():
    rng = random.Random(9)
    for _ in range(30):
        k, n = 3, 4
        cols = [[rng.randint(-3, 3) for _ in range(n)] for _ in range(k)]
        xs = [rng.randint(-3, 3) for _ in range(k)]
        target = [sum(c[i] * x for c, x in zip(cols, xs)) for i in range(n)]
        sol = solve_integer(cols, target)
        assert sol is not None
        got = [sum(c[i] * x for c, x in zip(cols, sol)) for i in range(n)]
        assert got == target
