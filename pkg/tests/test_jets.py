from itertools import product

import pytest

from janetwb.arith import Field, rational
from janetwb.dsl import parse_system
from janetwb.errors import OrderTooLow
from janetwb.homology import _system_of
from janetwb.jets import (
    JetSystem,
    SectionTruncation,
    delta_cohomology,
    delta_compose,
    project,
    prolong,
    section_coordinates,
    sections_at_order,
    spencer_apply,
    symbol,
)
from janetwb.ore import OreRing, form_text, multi_indices_upto

from conftest import pres, spec_of


def jets_of(text):
    return _system_of(parse_system(text).matrix())


def rows_jet_text(S):
    return sorted(form_text(S.ring, e, style="jet") for e in S.echelon().sorted_rows())


MACAULAY = "vars 3 unknowns 1\ny1_11 = 0\ny1_13 - y1_2 = 0\n"


def test_prolong_contains_formal_derivative():
    S = jets_of("vars 3 unknowns 1\ny1_13 - y1_2 = 0\n")
    P = prolong(S, 1)
    target = jets_of("vars 3 unknowns 1\ny1_123 - y1_22 = 0\n").equations[0]
    assert P.echelon().contains(target)
    assert prolong(S, 0) == S.echelonized()


def test_projection_gains_second_order_equations():
    S = jets_of(MACAULAY)
    one = project(prolong(S, 1), 2)
    y12 = jets_of("vars 3 unknowns 1\ny1_12 = 0\n").equations[0]
    y22 = jets_of("vars 3 unknowns 1\ny1_22 = 0\n").equations[0]
    assert one.echelon().contains(y12) and not S.echelon().contains(y12)
    two = project(prolong(S, 2), 2)
    assert two.echelon().contains(y22)


def test_projection_from_prolongation_adds_first_order_row():
    S = _system_of(spec_of("ex29").matrix())
    low = project(prolong(S, 1), 1)
    assert low.rank() == S.rank() + 1
    extra = jets_of("vars 4 unknowns 1 field Q(x)\ny1_2 - y1_1 = 0\n").equations[0]
    assert low.echelon().contains(extra)


def test_projection_of_involutive_system_loses_nothing():
    I = pres("ex12").involutive
    S = I.system
    assert project(prolong(S, 1), 1) == S.echelonized()


def test_prolong_twice_equals_prolong_two():
    S = jets_of(MACAULAY)
    assert prolong(prolong(S, 1), 1) == prolong(S, 2)


def test_symbol_dimensions():
    I = pres("ex28").involutive
    assert symbol(I.system).dim() == 2
    assert symbol(prolong(I.system, 1)).dim() == 2
    full = jets_of("vars 3 unknowns 1\ny1_11=0\ny1_12=0\ny1_13=0\ny1_22=0\ny1_23=0\ny1_33=0\n")
    assert symbol(full).dim() == 0


def test_delta_cohomology_example_with_acyclic_prolonged_symbol():
    S = jets_of("vars 3 unknowns 1\ny1_33 = 0\ny1_23 - y1_11 = 0\ny1_22 = 0\n")
    S3 = prolong(S, 1)
    assert symbol(S3).dim() == 1
    assert delta_cohomology(S, 2) == 3
    assert all(delta_cohomology(S3, s, r) == 0 for s in (1, 2) for r in range(3))
    # 2-acyclic but not involutive
    assert delta_cohomology(S3, 3) == 1


def test_involutive_symbol_is_acyclic():
    J = pres("ex28").involutive.system
    assert all(delta_cohomology(J, s, r) == 0 for s in (1, 2, 3) for r in range(3))


@pytest.mark.parametrize("name", ["ex28", "ex51", "ex12", "ex316", "ex511"])
def test_delta_squared_vanishes(name):
    S = pres(name).involutive.system
    for s in range(1, S.n + 1):
        for r in range(2):
            assert all(not v for v in delta_compose(S, s, r))


def test_delta_degree_out_of_range():
    with pytest.raises(ValueError):
        delta_cohomology(jets_of(MACAULAY), 4)


def test_sections_of_third_order_ode():
    S = _system_of(spec_of("ex38").matrix())
    basis = sections_at_order(S, 3)
    K = S.ring.field
    assert [b.vector() for b in basis] == [
        [K.one, K.zero, K.zero, K.zero],
        [K.zero, K.one, K.zero, K.one],
        [K.zero, K.zero, K.one, K.zero],
    ]
    f, f1, f2 = basis
    images = [section_coordinates(spencer_apply(S.ring, g, 1), [h.truncate(2) for h in basis])
              for g in basis]
    assert images == [[0, 0, 0], [-K.one, K.zero, -K.one], [K.zero, -K.one, K.zero]]


def test_nonsolution_section():
    # f^1 = (x/2, -1/2, 0) on y_xx = 0: a section, not a solution
    R = OreRing(Field(1), 1)
    x = R.field.x(1)
    f = SectionTruncation(R, 1, 2, {(0, (0,)): x / 2, (0, (1,)): R.field(rational(-1, 2))})
    S = JetSystem(R, 1, [{(0, (2,)): R.one}])
    assert sections_at_order(S, 2) and len(sections_at_order(S, 2)) == 2
    Df = spencer_apply(R, f, 1)
    assert Df[(0, (0,))] == R.one


def test_empty_system_sections_and_constant_section():
    R = OreRing(Field(), 1)
    S = JetSystem(R, 1, [], 1)
    basis = sections_at_order(S, 1)
    assert len(basis) == 2
    const = SectionTruncation(R, 1, 1, {(0, (0,)): R.one})
    assert not spencer_apply(R, const, 1).values
    with pytest.raises(OrderTooLow):
        spencer_apply(R, const.truncate(0), 1)


@pytest.mark.parametrize("name", ["ex28", "ex12", "ex29", "ex51"])
def test_spencer_operators_commute_on_sections(name):
    I = pres(name).involutive
    S = I.system
    R = S.ring
    for q in (S.q + 1, S.q + 2):
        for f in sections_at_order(S, q):
            for i, j in product(range(1, S.n + 1), repeat=2):
                if i < j:
                    a = spencer_apply(R, spencer_apply(R, f, i), j)
                    b = spencer_apply(R, spencer_apply(R, f, j), i)
                    assert a == b


def test_dimension_invariant_under_row_operations():
    S = jets_of(MACAULAY)
    e = S.equations
    T = JetSystem(S.ring, 1, [e[0], {k: 2 * e[1].get(k, 0) + e[0].get(k, 0)
                                      for k in set(e[0]) | set(e[1])}])
    assert T.dim() == S.dim()


def test_sections_count_matches_dimension():
    S = jets_of(MACAULAY)
    for q in range(2, 5):
        T = prolong(S, q - 2)
        assert len(sections_at_order(S, q)) == T.dim()
        assert len(list(multi_indices_upto(3, q))) - T.rank() == T.dim()
