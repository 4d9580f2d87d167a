from fractions import Fraction

import pytest

from cuspfold.diagram import builtin_diagram, parse_diagram
from cuspfold.field import alg
from cuspfold.polytope import (
    CompactNotSupported,
    NotApplicable,
    arithmeticity,
    cusp_conditions,
    cycle_product,
    enumerate_faces,
    euler_and_volume,
    ideal_vertices,
    link_box_ratios,
    link_projection,
    volume_flags,
)

D1 = builtin_diagram("D1")
D2 = builtin_diagram("D2")
D3 = builtin_diagram("D3")


def test_faces_d3():
    lat = enumerate_faces(D3, 3)
    assert len(lat.faces(1)) == 4
    assert len(lat.faces(2)) == 6
    assert lat.faces(3) == [(1, 2, 3), (1, 2, 4), (1, 3, 4)]


def test_polytope_euler_relation():
    # f-vector alternating sum including ideal vertices: 2 in odd dimension,
    # 0 in even dimension
    for d, n in ((D1, 4), (D2, 4), (D3, 3)):
        lat = enumerate_faces(d, n)
        ideals = ideal_vertices(d, n)
        fvec = [len(lat.faces(n - k)) for k in range(n)]  # vertices ... facets
        fvec[0] += len(ideals)
        total = sum((-1) ** k * f for k, f in enumerate(fvec))
        assert total == (2 if n % 2 == 1 else 0)


def test_ideal_vertices_paper_sets():
    assert [iv.subset for iv in ideal_vertices(D1, 4)] == [(1, 2, 4, 5, 6)]
    assert [iv.subset for iv in ideal_vertices(D2, 4)] == [(1, 2, 6, 7, 8)]
    assert [iv.subset for iv in ideal_vertices(D3, 3)] == [(2, 3, 4)]


def test_volume_flags():
    assert volume_flags(D1, 4) == "finite_volume"
    assert volume_flags(D2, 4) == "finite_volume"
    assert volume_flags(D3, 3) == "finite_volume"


def test_cusp_conditions():
    rep = cusp_conditions(D1, 4)
    assert rep.passed
    assert rep.bounded_facets == (3, 7)
    rep = cusp_conditions(D2, 4)
    assert rep.passed
    assert rep.bounded_facets == (3, 4, 5)
    rep = cusp_conditions(D3, 3)
    assert rep.passed
    assert rep.bounded_facets == (1,)


def test_link_projection_d1():
    iv = ideal_vertices(D1, 4)[0]
    link = link_projection(D1, 4, iv)
    assert len(link.link_facets) == 5
    assert sorted(link.regions) == [3, 7]
    # ridge (1,7) has angle pi/4 against the unbounded facet 1: doubled to pi/2
    m, doubled, angle, color = link.two_face_labels[(1, 7)]
    assert (m, doubled, angle, color) == (4, True, Fraction(1, 2), "yellow")


def test_link_projection_d2():
    iv = ideal_vertices(D2, 4)[0]
    link = link_projection(D2, 4, iv)
    assert len(link.link_facets) == 5
    assert sorted(link.regions) == [3, 4, 5]


def test_link_box_ratios_not_applicable():
    with pytest.raises(NotApplicable):
        link_box_ratios(D2, 4)
    with pytest.raises(NotApplicable):
        link_box_ratios(D1, 4)


def test_link_box_ratios_all_right_toy():
    # synthetic box link: three pairs of parallel walls, one compact facet
    # meeting all six walls at pi/4
    lines = ["vertex %d" % v for v in range(1, 8)]
    lines += ["edge 1 2 inf", "edge 3 4 inf", "edge 5 6 inf"]
    lines += ["edge %d 7 4" % v for v in range(1, 7)]
    d = parse_diagram("\n".join(lines))
    ideals = ideal_vertices(d, 4)
    assert len(ideals) == 1
    ratios = link_box_ratios(d, 4, ideals[0])
    assert ratios[0] == ratios[1] == ratios[2]


def test_euler_ideal_square_sanity():
    # right-angled ideal square: chi = -area / 2pi = -1
    lines = ["vertex 1", "vertex 2", "vertex 3", "vertex 4"]
    lines += ["edge 1 2 inf", "edge 2 3 inf", "edge 3 4 inf", "edge 4 1 inf"]
    lines += ["dashed 1 3 3", "dashed 2 4 3"]
    d = parse_diagram("\n".join(lines))
    chi, _ = euler_and_volume(d, 2)
    assert chi == Fraction(-1)


def test_euler_empty_term():
    # a single facet in dimension 1: chi = 1 - 1/2
    d = parse_diagram("vertex 1")
    chi, _ = euler_and_volume(d, 1)
    assert chi == Fraction(1, 2)


def test_euler_y_vanishes():
    # cusped 3-orbifolds have chi = 0
    chi, vol = euler_and_volume(D3, 3)
    assert chi == 0
    assert vol is None


def test_arithmeticity_d1():
    rep = arithmeticity(D1, 4)
    assert rep.verdict == "arithmetic"
    assert rep.checked_cycles >= 1
    # independent product check around the 7-cycle: (-2)(-r2)^4(-r3)^2 with
    # labels inf,4,6,4,4,6,4 gives -24
    prod = cycle_product(D1, (1, 2, 3, 4, 5, 6, 7))
    assert prod == alg(-24)
    assert prod.is_rational_integer()


def test_arithmeticity_d2_witness():
    rep = arithmeticity(D2, 4)
    assert rep.verdict == "non_arithmetic"
    # every sqrt(7/3)-dashed pair is a witness; the scan reports the first
    assert rep.witness["pair"] in ((1, 3), (1, 4), (2, 3), (2, 5))
    assert rep.witness["value"] == alg(Fraction(28, 3))
    # the pair named in the write-up carries the same failing value
    g = __import__("cuspfold.diagram", fromlist=["gram_matrix"]).gram_matrix(D2)
    i, j = D2.vertices.index(2), D2.vertices.index(3)
    v = 2 * g.entries[i][j]
    assert v * v == alg(Fraction(28, 3))


def test_arithmeticity_right_angled_trivial():
    lines = ["vertex 1", "vertex 2", "vertex 3", "vertex 4"]
    lines += ["edge 1 2 inf", "edge 2 3 inf", "edge 3 4 inf", "edge 4 1 inf"]
    lines += ["dashed 1 3 3", "dashed 2 4 3"]
    d = parse_diagram("\n".join(lines))
    rep = arithmeticity(d, 2)
    assert rep.verdict == "arithmetic"
