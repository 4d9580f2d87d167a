from fractions import Fraction

import pytest

from cuspfold.diagram import builtin_diagram, signature, gram_matrix, vinberg_check
from cuspfold.field import alg, cos_pi_over
from cuspfold.gluing import (
    NonSphericalSubset,
    NotLocallyCoxeter,
    basic_construction_over_subset,
    angle_over_pi,
)
from cuspfold.polytope import (
    enumerate_faces,
    euler_and_volume,
    ideal_vertices,
    link_box_ratios,
)

D1 = builtin_diagram("D1")
D2 = builtin_diagram("D2")
D3 = builtin_diagram("D3")


@pytest.fixture(scope="module")
def Q():
    return basic_construction_over_subset(D1, {1, 5, 6})


@pytest.fixture(scope="module")
def Z():
    return basic_construction_over_subset(D3, {3, 4})


def test_q_chamber_count(Q):
    assert Q.chamber_count == 16


def test_q_facet_census(Q):
    bounded = Q.bounded_classes
    walls = Q.wall_classes
    # one merged copy of facet 3 (16 slots) and eight merged copies of
    # facet 7 (2 slots each)
    threes = [c for c in bounded if c.base_facet == 3]
    sevens = [c for c in bounded if c.base_facet == 7]
    assert len(threes) == 1 and len(threes[0].slots) == 16
    assert len(sevens) == 8 and all(len(c.slots) == 2 for c in sevens)
    assert len(walls) == 6
    by_base = {}
    for w in walls:
        by_base.setdefault(w.base_facet, []).append(w)
    assert sorted(len(v) for v in by_base.values()) == [2, 4]


def test_q_is_coxeter_and_vinberg(Q):
    d = Q.diagram()
    assert len(d.vertices) == 15
    rep = vinberg_check(d, 4)
    assert rep.passed
    assert rep.signature == (4, 1, 10)


def test_q_truncated_octahedron(Q):
    d = Q.diagram()
    lat = enumerate_faces(d, 4)
    three = next(
        c for c in Q.bounded_classes if c.base_facet == 3 and len(c.slots) == 16
    )
    v3 = three.index + 1
    ridges = [p for p in lat.faces(2) if v3 in p]
    assert len(ridges) == 14
    hexes = quads = 0
    for p in ridges:
        other = next(x for x in p if x != v3)
        edges = [t for t in lat.faces(3) if v3 in t and other in t]
        verts = [q for q in lat.faces(4) if v3 in q and other in q]
        assert len(edges) == len(verts)  # polygonal 2-face
        ocls = Q.classes[other - 1]
        if ocls.bounded:
            assert ocls.base_facet == 7
            assert len(edges) == 6
            hexes += 1
        else:
            assert len(edges) == 4
            quads += 1
    assert hexes == 8 and quads == 6


def test_q_box_ratios(Q):
    d = Q.diagram()
    ivs = ideal_vertices(d, 4)
    assert len(ivs) == 1
    ratios = link_box_ratios(d, 4, ivs[0])
    r2, r3 = alg("sqrt(2)"), alg("sqrt(3)")
    assert sorted(ratios) == sorted([r2, r3, r3])
    # ratio check in exact arithmetic: sqrt2 : sqrt3 : sqrt3
    a, b, c = sorted(ratios)
    assert a * a * 3 == b * b * 2 and b == c


def test_q_euler_additivity(Q):
    chi_p, _ = euler_and_volume(D1, 4)
    chi_q, _ = euler_and_volume(Q.diagram(), 4)
    assert chi_q == 16 * chi_p
    assert chi_p != 0


def test_q_symmetries(Q):
    syms = Q.symmetries()
    assert len(syms) == 16
    table = Q.symmetry_by_wall_perm()
    assert len(table) == 16  # faithful on walls


def test_z_chambers_and_link(Z):
    assert Z.chamber_count == 6
    bounded = Z.bounded_classes
    assert len(bounded) == 1 and len(bounded[0].slots) == 6
    walls = Z.wall_classes
    assert len(walls) == 6
    # hexagonal link: each wall meets two neighbors at 2pi/3, is parallel to
    # the opposite wall, and meets the compact facet at pi/4
    b = bounded[0].index
    for w in walls:
        ridge_angles = []
        for w2 in walls:
            if w2.index == w.index:
                continue
            if Z.adjacent(w.index, w2.index):
                ridge_angles.append(angle_over_pi(Z.entry(w.index, w2.index)))
        # exactly two neighboring walls, at the hexagon's interior angle
        assert sorted(ridge_angles) == [Fraction(2, 3), Fraction(2, 3)]
        assert Z.adjacent(w.index, b)
        assert angle_over_pi(Z.entry(w.index, b)) == Fraction(1, 4)
    # distance-2 wall supports cross outside the polytope: Gram entry -1/2
    # but no shared ridge
    crossing = [
        (u.index, v.index)
        for u in walls
        for v in walls
        if u.index < v.index
        and Z.entry(u.index, v.index) == alg(Fraction(-1, 2))
    ]
    assert len(crossing) == 6
    assert all(not Z.adjacent(u, v) for u, v in crossing)


def test_z_has_no_coxeter_diagram(Z):
    with pytest.raises(NotLocallyCoxeter):
        Z.diagram()


def test_z_euler_additivity(Z):
    # chi of the glued polytope via its chamber decomposition: 6 copies of Y;
    # for cusped 3-dimensional orbifolds both sides vanish
    chi_y, _ = euler_and_volume(D3, 3)
    assert chi_y == 0
    assert 6 * chi_y == 0


def test_z_symmetries(Z):
    syms = Z.symmetries()
    assert len(syms) == 12


def test_dihedral_suborbit():
    g = basic_construction_over_subset(D1, {5, 6})
    assert g.chamber_count == 8


def test_trivial_subset_is_base():
    v = basic_construction_over_subset(D2, ())
    assert v.chamber_count == 1
    assert len(v.bounded_classes) == 3
    assert len(v.wall_classes) == 5
    assert len(v.symmetries()) == 2


def test_non_spherical_rejected():
    with pytest.raises(NonSphericalSubset):
        basic_construction_over_subset(D1, {1, 2})  # infinity edge
