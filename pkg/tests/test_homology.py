import pytest

from conftest import pres
from janetwb.dsl import parse_system
from janetwb.homology import (
    Presentation,
    Submodule,
    adjoint,
    cc_of_operator,
    compatibility_conditions,
    differential_rank,
    ext_modules,
    free_resolution,
    janet_sequence,
    resolve,
    short_resolution,
    torsion_submodule,
)
from janetwb.jets import Echelon
from janetwb.ore import OperatorMatrix, compose, form_text

ALL = ["ex11", "ex12", "ex13", "ex216", "ex28", "ex29", "ex316", "ex38", "ex42",
       "ex511", "ex512", "ex53", "ex58"]


def parsed(text):
    return parse_system(text).presentation()


def rows_of(P, lines):
    return parse_system(lines).presentation().matrix.rows


def same_row_space(a, b):
    """K-linear row spaces of two lists of forms reduce each other."""
    Ea, Eb = Echelon(), Echelon()
    for r in a:
        Ea.add(dict(r))
    for r in b:
        Eb.add(dict(r))
    return all(not Ea.reduce(dict(r))[0] for r in b) and all(not Eb.reduce(dict(r))[0] for r in a)


def test_short_pipeline_single_cc():
    P = parsed("vars 3 unknowns 1\nd33 y1 = 0\nd13 y1 - d2 y1 = 0\n")
    res = short_resolution(P)
    assert res.ranks == [1, 2, 1]
    (psi,) = res.maps[1].rows
    R = P.ring
    expected = {(1, (0, 0, 2)): R.one, (0, (1, 0, 1)): -R.one, (0, (0, 1, 0)): R.one}
    lead = psi[(1, (0, 0, 2))]
    assert {k: c / lead for k, c in psi.items()} == expected


def test_cubic_example_janet_sequence():
    P = pres("ex28")
    J = janet_sequence(P.involutive)
    assert J.dims == [1, 4, 4, 1]
    assert J.euler() == 0
    assert J.composites_vanish()
    assert short_resolution(P).ranks == [1, 2, 1]


def test_variable_coefficient_cc_stages():
    P = pres("ex29")
    J = janet_sequence(P.involutive)
    assert J.dims == [1, 3, 3, 1]
    D1 = J.operators[1]
    assert D1.p == 3
    # phi^3, phi^2, phi^1 over (u, v, w) = (y1, y2, y3)
    phi = rows_of(P, "vars 4 unknowns 3 field Q(x)\n"
                     "d4 y2 - d3 y1 + x4*d1 y1 - x3*d1 y2 - y2 = 0\n"
                     "d4 y3 - d2 y1 + d1 y1 - x3*d1 y3 - y3 = 0\n"
                     "d3 y3 - d2 y2 + d1 y2 - x4*d1 y3 = 0\n")
    assert same_row_space(D1.rows, phi)
    assert J.operators[2].p == 1
    assert J.composites_vanish()


def test_janet_dims_two_variables():
    assert janet_sequence(pres("ex216").involutive).dims == [3, 3, 1]


def test_resolution_ranks():
    assert free_resolution(pres("ex12")).ranks == [2, 3, 1]
    assert short_resolution(pres("ex12")).ranks == [2, 3, 1]
    assert resolve(pres("ex28"), "short").ranks == [1, 2, 1]
    assert resolve(pres("ex28"), "janet").ranks == [1, 4, 4, 1]
    with pytest.raises(ValueError):
        resolve(pres("ex28"), "grobner")


def test_auto_route_avoids_large_janet_sequence():
    P = pres("ex51")
    assert janet_sequence(P.involutive).dims == [1, 27, 60, 46, 12]
    assert resolve(P).ranks == short_resolution(P).ranks
    assert resolve(pres("ex28")).ranks == [1, 4, 4, 1]


@pytest.mark.parametrize("name", ALL)
def test_every_stage_annihilates_the_previous(name):
    P = pres(name)
    for res in (free_resolution(P), short_resolution(P)):
        assert res.composites_vanish()
        for A, B in zip(res.maps, res.maps[1:]):
            assert not any(any(r.values()) for r in compose(P.ring, B.rows, A.rows))


def test_compatibility_conditions_of_cubic_example():
    I = pres("ex28").involutive
    CC = compatibility_conditions(I)
    assert CC.p == 4 and CC.m == 4
    assert not any(any(r.values()) for r in compose(I.ring, CC.rows, janet_sequence(I).operators[0].rows))


def test_cc_of_operator_finds_all_relations():
    # the gradient has the curl as its only relation
    P = parsed("vars 2 unknowns 1\nd1 y1 = 0\nd2 y1 = 0\n")
    A = OperatorMatrix(P.ring, [{(0, (1, 0)): P.ring.one}, {(0, (0, 1)): P.ring.one}], 1)
    CC = cc_of_operator(A)
    assert CC.p == 1
    (row,) = CC.rows
    assert Submodule(P.ring, 2, [row]).equals(
        Submodule(P.ring, 2, [{(0, (0, 1)): P.ring.one, (1, (1, 0)): -P.ring.one}]))


def test_ext_of_two_pure_module():
    P = pres("ex42")
    X = ext_modules(P)
    assert X[0].zero and X[1].zero
    e = X[2]
    assert not e.zero
    assert (len(e.generators), e.relations.p) == (2, 4)
    target = parsed("vars 4 unknowns 2\nd4 y1 - d1 y2 = 0\nd4 y2 = 0\nd3 y1 - d2 y2 = 0\nd3 y2 = 0\n")
    assert e.presentation.equivalent(target)
    assert e.presentation.characters() == target.characters()


@pytest.mark.parametrize("name", ["ex11", "ex12", "ex13", "ex28", "ex42", "ex511", "ex29"])
def test_ext_zero_pattern_is_resolution_independent(name):
    P = pres(name)
    a = ext_modules(P, free_resolution(P))
    b = ext_modules(P, short_resolution(P))
    assert [e.zero for e in a.entries][: len(b.entries)] == [e.zero for e in b.entries][: len(a.entries)]
    assert all(e.zero for e in a.entries[len(b.entries):])
    assert a.cd == b.cd


@pytest.mark.parametrize("name", ["ex11", "ex12", "ex13", "ex28", "ex29", "ex42", "ex511"])
def test_ext_vanishes_below_codimension(name):
    X = ext_modules(pres(name))
    assert all(X[i].zero for i in range(X.cd))
    assert not X[X.cd].zero


def test_torsion_of_non_pure_module():
    P = pres("ex11")
    T = torsion_submodule(P)
    assert not T.torsion_free
    assert differential_rank(P) == 0
    (g,) = T.generators
    R = P.ring
    assert form_text(R, g.element) == "y1"
    assert form_text(R, g.annihilator) == "d12 y1"
    assert P.submodule().contains(compose(R, [g.annihilator], [g.element])[0])


def test_torsion_free_divergence():
    P = parsed("vars 2 unknowns 2\nd1 y1 + d2 y2 = 0\n")
    assert torsion_submodule(P).torsion_free
    assert differential_rank(P) == 1
    X = ext_modules(P)
    # rank 1: hom(M, D) is nonzero; ext^1 = D/(d1, d2) is the top one
    assert not X[0].zero
    assert not X[1].zero and (len(X[1].generators), X[1].relations.p) == (1, 2)


def test_torsion_element_of_mixed_module():
    # y2 is free, y1 satisfies an ODE in x1
    P = parsed("vars 2 unknowns 2\nd1 y1 - y1 = 0\n")
    T = torsion_submodule(P)
    assert not T.torsion_free
    assert differential_rank(P) == 1
    assert [form_text(P.ring, g.element) for g in T.generators] == ["y1"]


def test_adjoint_of_operator_matrix():
    P = pres("ex29")
    A = P.matrix
    assert adjoint(adjoint(A)).rows == [dict(r) for r in A.rows]


def test_presentation_equivalence_is_not_trivial():
    a = parsed("vars 2 unknowns 1\nd22 y1 = 0\nd12 y1 = 0\n")
    b = parsed("vars 2 unknowns 1\nd22 y1 = 0\nd11 y1 = 0\n")
    assert a.equivalent(a)
    assert not a.equivalent(b)
    assert isinstance(a, Presentation)
