import random

import pytest

from cuspfold.diagram import (
    Angle,
    Dashed,
    DuplicateEdge,
    INFINITY,
    ParseError,
    builtin_diagram,
    classify_subdiagram,
    diagram_automorphisms,
    gram_matrix,
    parse_diagram,
    signature,
    vinberg_check,
)
from cuspfold.field import alg, cos_pi_over


def idx(diagram, v):
    return diagram.vertices.index(v)


def test_builtin_d1_shape():
    d = builtin_diagram("D1")
    assert len(d.vertices) == 7
    assert d.label(1, 2) is INFINITY
    assert d.label(2, 3) == Angle(4)
    assert d.label(3, 4) == Angle(6)
    assert d.label(4, 5) == Angle(4)
    assert d.label(5, 6) == Angle(4)
    assert d.label(6, 7) == Angle(6)
    assert d.label(7, 1) == Angle(4)
    assert d.label(1, 3) is None


def test_builtin_d2_shape():
    d = builtin_diagram("D2")
    assert len(d.vertices) == 8
    dashed = [p for p, lab in d.edges.items() if isinstance(lab, Dashed)]
    assert len(dashed) == 5
    assert d.label(3, 6) == Dashed(alg("sqrt(2)"))
    assert d.label(1, 3) == Dashed(alg("sqrt(7/3)"))
    assert d.label(4, 5) == Angle(3)


def test_builtin_d3_shape():
    d = builtin_diagram("D3")
    assert len(d.vertices) == 4
    assert d.label(1, 2) == Angle(4)
    assert d.label(2, 3) == Angle(3)
    assert d.label(2, 4) == Angle(3)
    assert d.label(3, 4) == Angle(3)


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_diagram("vertex 1\nvertex 1")
    with pytest.raises(DuplicateEdge):
        parse_diagram("vertex 1\nvertex 2\nedge 1 2 3\nedge 2 1 4")
    with pytest.raises(ParseError):
        parse_diagram("vertex 1\nvertex 2\nedge 1 2 2")
    with pytest.raises(ParseError):
        parse_diagram("vertx 1")


def test_parse_round_trip():
    d = builtin_diagram("D2")
    d2 = parse_diagram(d.to_dsl())
    assert d2.vertices == d.vertices
    assert d2.edges == d.edges


def test_gram_entries():
    d1 = builtin_diagram("D1")
    g = gram_matrix(d1)
    # edge 5-6 is labeled 4: entry is -cos(pi/4) = -sqrt(2)/2
    assert g[idx(d1, 5), idx(d1, 6)] == -cos_pi_over(4)
    assert g[idx(d1, 1), idx(d1, 2)] == alg(-1)
    assert g[idx(d1, 1), idx(d1, 3)] == alg(0)
    d2 = builtin_diagram("D2")
    g2 = gram_matrix(d2)
    assert g2[idx(d2, 2), idx(d2, 3)] == -alg("sqrt(7/3)")


def test_signature_identity():
    d = parse_diagram("vertex 1\nvertex 2\nvertex 3")
    assert signature(gram_matrix(d)) == (3, 0, 0)


def test_signature_d2_paper_value():
    # the 8-facet diagram has Gram signature (4,1,3)
    assert signature(gram_matrix(builtin_diagram("D2"))) == (4, 1, 3)


def test_signature_d1():
    assert signature(gram_matrix(builtin_diagram("D1"))) == (4, 1, 2)


def test_signature_d3():
    assert signature(gram_matrix(builtin_diagram("D3"))) == (3, 1, 0)


def test_signature_matches_float_oracle():
    numpy = pytest.importorskip("numpy")
    rng = random.Random(17)
    for name in ("D1", "D2", "D3"):
        g = gram_matrix(builtin_diagram(name))
        arr = numpy.array(
            [[float(x) for x in row] for row in g.entries], dtype=float
        )
        eig = numpy.linalg.eigvalsh(arr)
        pos = int((eig > 1e-9).sum())
        neg = int((eig < -1e-9).sum())
        zero = len(eig) - pos - neg
        assert signature(g) == (pos, neg, zero)
    # and on random symmetric rational matrices
    for _ in range(10):
        n = rng.randint(2, 5)
        m = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                m[i][j] = m[j][i] = rng.randint(-3, 3)
        d = parse_diagram("\n".join(f"vertex {i + 1}" for i in range(n)))
        from cuspfold.diagram import GramMatrix

        g = GramMatrix(d.vertices, [[alg(x) for x in row] for row in m])
        arr = numpy.array(m, dtype=float)
        eig = numpy.linalg.eigvalsh(arr)
        pos = int((eig > 1e-9).sum())
        neg = int((eig < -1e-9).sum())
        assert signature(g) == (pos, neg, n - pos - neg)


def test_signature_invariant_under_permutation():
    d = builtin_diagram("D2")
    g = gram_matrix(d)
    rng = random.Random(23)
    perm = list(range(g.size))
    rng.shuffle(perm)
    from cuspfold.diagram import GramMatrix

    g2 = GramMatrix(
        [g.vertices[p] for p in perm],
        [[g.entries[p][q] for q in perm] for p in perm],
    )
    assert signature(g2) == signature(g)
    s = signature(g)
    assert sum(s) == g.size


def test_classify_c2_tilde():
    d1 = builtin_diagram("D1")
    c = classify_subdiagram(d1, {4, 5, 6})
    assert c.verdict == "affine"
    assert c.type_tag == "C~2"
    assert c.rank == 2


def test_classify_a2_tilde():
    d2 = builtin_diagram("D2")
    c = classify_subdiagram(d2, {6, 7, 8})
    assert c.verdict == "affine"
    assert c.type_tag == "A~2"


def test_classify_order16():
    d1 = builtin_diagram("D1")
    c = classify_subdiagram(d1, {1, 5, 6})
    assert c.verdict == "spherical"
    assert c.order == 16
    assert sorted(tag for tag, _ in c.components) == ["A1", "I2(4)"]


def test_classify_ideal_vertex_sets():
    d1 = builtin_diagram("D1")
    c = classify_subdiagram(d1, {1, 2, 4, 5, 6})
    assert c.verdict == "affine"
    assert sorted(tag for tag, _ in c.components) == ["A~1", "C~2"]
    assert c.rank == 3
    d2 = builtin_diagram("D2")
    c = classify_subdiagram(d2, {1, 2, 6, 7, 8})
    assert c.verdict == "affine"
    assert sorted(tag for tag, _ in c.components) == ["A~1", "A~2"]
    d3 = builtin_diagram("D3")
    c = classify_subdiagram(d3, {2, 3, 4})
    assert c.verdict == "affine"
    assert c.type_tag == "A~2"


def test_classify_dashed_is_other():
    d2 = builtin_diagram("D2")
    assert classify_subdiagram(d2, {1, 3}).verdict == "other"


def test_classify_monotone_spherical():
    # subsets of spherical sets are spherical
    rng = random.Random(31)
    for name in ("D1", "D2", "D3"):
        d = builtin_diagram(name)
        verts = list(d.vertices)
        for _ in range(40):
            k = rng.randint(1, min(4, len(verts)))
            s = rng.sample(verts, k)
            c = classify_subdiagram(d, s)
            if c.verdict == "spherical" and k > 1:
                sub = rng.sample(s, k - 1)
                assert classify_subdiagram(d, sub).verdict == "spherical"


def test_classify_catalog_orders():
    # definiteness and catalog recognition agree on known types
    text = "vertex 1\nvertex 2\nvertex 3\nvertex 4\nedge 1 2 3\nedge 2 3 4\nedge 3 4 3"
    c = classify_subdiagram(parse_diagram(text), {1, 2, 3, 4})
    assert c.verdict == "spherical" and c.type_tag == "F4" and c.order == 1152
    text = "vertex 1\nvertex 2\nvertex 3\nvertex 4\nedge 1 2 4\nedge 2 3 3\nedge 3 4 3"
    c = classify_subdiagram(parse_diagram(text), {1, 2, 3, 4})
    assert c.verdict == "spherical" and c.type_tag == "B4" and c.order == 2**4 * 24
    # angles pi/5 lie outside the supported field: parsing accepts the label
    # but Gram construction rejects it
    import pytest as _pytest

    from cuspfold.field import UnsupportedRadicand

    h3 = parse_diagram("vertex 1\nvertex 2\nvertex 3\nedge 1 2 5\nedge 2 3 3")
    with _pytest.raises(UnsupportedRadicand):
        gram_matrix(h3)


def test_vinberg_pass():
    assert vinberg_check(builtin_diagram("D2"), 4).passed
    assert vinberg_check(builtin_diagram("D3"), 3).passed
    assert vinberg_check(builtin_diagram("D1"), 4).passed


def test_vinberg_single_vertex_fails():
    rep = vinberg_check(parse_diagram("vertex 1"), 4)
    assert not rep.passed
    assert rep.signature == (1, 0, 0)
    assert rep.failures()


def test_d2_automorphism():
    d2 = builtin_diagram("D2")
    autos = diagram_automorphisms(d2)
    assert len(autos) == 2
    sigma = next(a for a in autos if a != {v: v for v in d2.vertices})
    assert sigma[1] == 2 and sigma[4] == 5 and sigma[7] == 8 and sigma[3] == 3


def test_d1_automorphism_swaps_3_and_7():
    d1 = builtin_diagram("D1")
    autos = diagram_automorphisms(d1)
    assert len(autos) == 2
    sigma = next(a for a in autos if a != {v: v for v in d1.vertices})
    assert sigma[3] == 7 and sigma[7] == 3 and sigma[5] == 5
