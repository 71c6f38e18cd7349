import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbl.opalg import (ExprError, OperatorPoly, adjoint, commutator, from_phase_space, ladder,
                       mode_swap, momentum, monomial_key, parse, parse_monomial_key, position, product,
                       to_phase_space, to_string)

R = math.sqrt(0.5)
ONE = OperatorPoly.constant(1.0)


def _keys(max_degree):
    return [(a, b, c, d) for a in range(3) for b in range(3) for c in range(3) for d in range(3)
            if a + b + c + d <= max_degree]


coeff = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def polys(max_degree=2):
    return st.dictionaries(st.sampled_from(_keys(max_degree)), coeff, max_size=6).map(OperatorPoly)


def test_parse_position():
    assert parse("x1") == OperatorPoly({(0, 1, 0, 0): R, (1, 0, 0, 0): R})


def test_parse_zero():
    assert len(parse("0*x1")) == 0


def test_parse_with_parameter():
    expect = OperatorPoly({(1, 0, 0, 1): 0.5, (0, 1, 1, 0): 0.5})
    assert parse("g*(x1*x2+p1*p2)", {"g": 0.5}).allclose(expect)


def test_parse_is_ordered():
    assert parse("x1*p1") != parse("p1*x1")
    assert commutator(parse("x1"), parse("p1")).allclose(OperatorPoly.constant(1j))


def test_parse_errors():
    with pytest.raises(ExprError, match="degree"):
        parse("x1*x1*x2")
    with pytest.raises(ExprError):
        parse("x1 +")
    with pytest.raises(ExprError):
        parse("gamma*x1")


def test_canonical_commutators():
    assert commutator(ladder("A1"), ladder("Ad1")) == ONE
    assert commutator(position(1), momentum(1)).allclose(OperatorPoly.constant(1j))
    assert not commutator(ladder("A1"), ladder("Ad2"))


def test_product_normal_orders():
    assert product(ladder("Ad1"), ladder("A1")) == OperatorPoly({(1, 1, 0, 0): 1.0})
    assert product(ladder("A1"), ladder("Ad1")) == OperatorPoly({(1, 1, 0, 0): 1.0, (0, 0, 0, 0): 1.0})


def test_adjoint_examples():
    assert adjoint(ladder("A1")) == ladder("Ad1")
    assert adjoint(position(1) * 1j).allclose(position(1) * -1j)


def test_phase_space_view():
    assert to_phase_space(ladder("A1")) == pytest.approx({(1, 0, 0, 0): R, (0, 1, 0, 0): 1j * R})
    assert to_phase_space(OperatorPoly.zero()) == {}


def test_monomial_keys():
    assert monomial_key((1, 0, 0, 1)) == "Ad1^1 A2^1"
    assert parse_monomial_key("Ad1^1 A2^1") == (1, 0, 0, 1)


def test_json_round_trip():
    p = parse("0.3*x1*p2 + 2j*A2 + i*x1 - 1.5")
    assert OperatorPoly.from_json(p.to_json()).allclose(p)


@settings(max_examples=60, deadline=None)
@given(polys())
def test_string_round_trip(p):
    assert parse(to_string(p)).allclose(p, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(polys())
def test_phase_round_trip(p):
    assert from_phase_space(to_phase_space(p)).allclose(p, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(polys(), coeff)
def test_adjoint_antilinear_involution(p, c):
    assert adjoint(adjoint(p)) == p
    assert adjoint(p * c).allclose(adjoint(p) * c.conjugate(), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_jacobi(p, q, r):
    total = commutator(p, commutator(q, r)) + commutator(q, commutator(r, p)) + commutator(r, commutator(p, q))
    assert total.max_abs() <= 1e-12 * max(1.0, p.max_abs() * q.max_abs() * r.max_abs())


@settings(max_examples=60, deadline=None)
@given(polys(1), polys(1))
def test_commutator_matches_products(p, q):
    assert commutator(p, q).allclose(product(p, q) - product(q, p), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(polys())
def test_self_commutator_vanishes(p):
    assert commutator(p, p).max_abs() <= 1e-12


@settings(max_examples=40, deadline=None)
@given(polys())
def test_mode_swap_involution(p):
    assert mode_swap(mode_swap(p)) == p
