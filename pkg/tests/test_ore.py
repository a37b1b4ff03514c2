import pytest
from hypothesis import given, settings, strategies as st

from janetwb.arith import Field
from janetwb.errors import DimensionMismatch, IndexOutOfRange
from janetwb.ore import (
    OperatorMatrix,
    OreOperator,
    OreRing,
    apply_to_jets,
    class_of,
    form_text,
    jet_key,
    multi_indices,
)

K = Field(2)
R = OreRing(K, 2)
R3 = OreRing(Field(3), 3)
x1, x2 = K.x(1), K.x(2)
d = lambda *i: OreOperator.d(R, *i)  # noqa: E731
c = lambda a: OreOperator.coef(R, a)  # noqa: E731


def test_commutation_relation():
    assert d(1) * c(x1) == c(x1) * d(1) + c(1)


def test_derivations_commute():
    assert OreOperator.d(R3, 3) * OreOperator.d(R3, 2) == OreOperator.d(R3, 2, 3)


def test_expand_by_linearity():
    P = d(2) - c(x2) * d(1)
    assert P * d(1) == d(1, 2) - c(x2) * d(1, 1)


def test_order_is_additive():
    P = d(1, 2) + c(x1)
    Q = c(x2) * d(2) + c(1)
    assert (P * Q).order() == P.order() + Q.order()


def test_adjoint_examples():
    assert d(2).adjoint() == -d(2)
    assert (c(x2) * d(2)).adjoint() == -(c(x2) * d(2)) - c(1)


def test_adjoint_of_short_cc():
    # Psi = d33 v - d13 u + d2 u on (u, v) -> two rows defining N
    Q = OreRing(Field(), 3)
    D = lambda *i: OreOperator.d(Q, *i)  # noqa: E731
    A = OperatorMatrix.from_entries(Q, [[-D(1, 3) + D(2), D(3, 3)]])
    ad = A.adjoint()
    assert ad.p == 2 and ad.m == 1
    assert ad.entry(0, 0) == -D(1, 3) - D(2)
    assert ad.entry(1, 0) == D(3, 3)
    assert ad.adjoint() == A


def test_apply_to_jets_row():
    A = OperatorMatrix.from_entries(R3, [[OreOperator.d(R3, 2), -OreOperator.d(R3, 1)
                                          + OreOperator.coef(R3, R3.field.x(2))]])
    (f,) = apply_to_jets(A)
    assert form_text(R3, f, style="jet") == "y1_2 - y2_1 + x2*y2"
    assert apply_to_jets(OperatorMatrix(R3, [], 2)) == []
    assert apply_to_jets(OperatorMatrix.from_entries(R3, [[OreOperator.d(R3, 3)]])) == [
        {(0, (0, 0, 1)): R3.one}]


def test_errors():
    with pytest.raises(IndexOutOfRange):
        d(3)
    with pytest.raises(DimensionMismatch):
        d(1) * OreOperator.d(R3, 1)
    with pytest.raises(DimensionMismatch):
        OperatorMatrix(R, [{(2, (0, 0)): K.one}], 2)


def test_jet_order_and_class():
    assert class_of((0, 1, 1)) == 2
    jets = sorted(((0, mu) for mu in multi_indices(3, 2)), key=jet_key, reverse=True)
    # within one order the higher class wins: y_33 > y_23 > y_22 > y_13 > ...
    assert [mu for _, mu in jets[:4]] == [(0, 0, 2), (0, 1, 1), (0, 2, 0), (1, 0, 1)]
    assert jet_key((0, (0, 0))) > jet_key((1, (0, 0)))


coefs = st.sampled_from([K.one, K(2), -K.one, x1, x2, x1 * x2, K.one / x1, x1 + x2])
monos = st.tuples(st.integers(0, 2), st.integers(0, 1))


@st.composite
def ops(draw):
    terms = draw(st.dictionaries(monos, coefs, max_size=3))
    return OreOperator(R, terms)


@settings(max_examples=100, deadline=None, derandomize=True)
@given(ops(), ops())
def test_adjoint_involution_and_antihomomorphism(P, Q):
    assert P.adjoint().adjoint() == P
    assert (P * Q).adjoint() == Q.adjoint() * P.adjoint()


@settings(max_examples=100, deadline=None, derandomize=True)
@given(ops(), ops(), ops())
def test_ring_laws(P, Q, S):
    assert P * (Q + S) == P * Q + P * S
    assert (P * Q) * S == P * (Q * S)


def test_constant_coefficients_commutative():
    Q = OreRing(Field(), 2)
    P = OreOperator(Q, {(1, 0): Q.field(2), (0, 1): Q.one})
    S = OreOperator(Q, {(2, 1): Q.one, (0, 0): Q.field(3)})
    assert P * S == S * P
