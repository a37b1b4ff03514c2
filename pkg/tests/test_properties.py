"""Invariants checked on randomly drawn constant-coefficient systems."""

from itertools import product

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import brute_dim, pres
from janetwb.dsl import parse_system, print_system
from janetwb.homology import free_resolution, short_resolution
from janetwb.involution import dim_next_symbol, hilbert_function
from janetwb.jets import delta_compose, prolong, sections_at_order, spencer_apply, symbol
from janetwb.ore import compose

PROPS = settings(max_examples=100, deadline=None, derandomize=True,
                 suppress_health_check=[HealthCheck.too_slow])


@st.composite
def systems(draw, max_n=3, max_order=2):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, 2))
    jet = st.tuples(st.integers(1, m),
                    st.lists(st.integers(1, n), min_size=0, max_size=max_order))
    coef = st.sampled_from([1, -1, 2, 3, -2])
    rows = []
    for _ in range(draw(st.integers(1, 3))):
        terms = draw(st.lists(st.tuples(coef, jet), min_size=1, max_size=3))
        parts = []
        for c, (k, idx) in terms:
            op = ("d" + "".join(map(str, sorted(idx))) + " ") if idx else ""
            parts.append(f"{c}*{op}y{k}")
        rows.append(" + ".join(parts) + " = 0")
    return f"vars {n} unknowns {m}\n" + "\n".join(rows) + "\n"


def completed(text):
    return parse_system(text).presentation().involutive



@PROPS
@given(systems())
def test_dsl_round_trip(text):
    spec = parse_system(text)
    assert parse_system(print_system(spec)) == spec


@PROPS
@given(systems())
def test_characters_are_monotone(text):
    I = completed(text)
    assert all(a >= b for a, b in zip(I.alpha, I.alpha[1:]))
    assert all(a >= 0 for a in I.alpha)
    assert I.check_criterion()


@PROPS
@given(systems())
def test_next_symbol_dimension_from_characters(text):
    I = completed(text)
    weighted = sum(i * a for i, a in enumerate(I.alpha, start=1))
    assert dim_next_symbol(I) == weighted
    assert symbol(prolong(I.system, 1)).dim() == weighted


@settings(max_examples=40, deadline=None, derandomize=True,
          suppress_health_check=[HealthCheck.too_slow])
@given(systems(max_n=2))
def test_hilbert_function_matches_prolongation(text):
    P = parse_system(text).presentation()
    I = P.involutive
    assert [hilbert_function(I, r) for r in range(3)] == [brute_dim(P, I.q + r) for r in range(3)]


@PROPS
@given(systems())
def test_delta_squared_is_zero(text):
    S = completed(text).system
    for s in range(1, S.n + 1):
        assert all(not v for v in delta_compose(S, s))


@PROPS
@given(systems(max_n=2), st.data())
def test_spencer_operators_commute(text, data):
    S = completed(text).system
    R = S.ring
    basis = sections_at_order(S, S.q + 2)
    if not basis:
        return
    f = basis[data.draw(st.integers(0, len(basis) - 1))]
    for i, j in product(range(1, S.n + 1), repeat=2):
        if i < j:
            assert spencer_apply(R, spencer_apply(R, f, i), j) == \
                spencer_apply(R, spencer_apply(R, f, j), i)


@PROPS
@given(systems())
def test_compatibility_stages_annihilate(text):
    P = parse_system(text).presentation()
    for res in (short_resolution(P),) + ((free_resolution(P),) if P.ring.n <= 2 else ()):
        for A, B in zip(res.maps, res.maps[1:]):
            assert not any(any(r.values()) for r in compose(P.ring, B.rows, A.rows))


@pytest.mark.parametrize("name,frozen", [
    ("ex28", [6, 8, 10, 12, 14]),
    ("ex12", [5, 9, 14, 20, 27]),
    ("ex512", [14, 19, 24, 29, 34]),
])
def test_hilbert_function_on_fixtures(name, frozen):
    P = pres(name)
    I = P.involutive
    assert [brute_dim(P, I.q + r) for r in range(5)] == frozen
    assert [hilbert_function(I, r) for r in range(5)] == frozen
    if name == "ex28":
        assert frozen == [2 * r + 6 for r in range(5)]
