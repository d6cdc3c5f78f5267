import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wignercorr.algebra import (
    CorrelatorPolynomial,
    FormalSeries,
    MomentMonomial,
    expand_normalized,
    ff_evaluate,
    ff_power_coefficients,
    ff_product,
    parse_polynomial,
    series_arith,
)
from wignercorr.errors import OrderMismatch


# -- falling factorials ----------------------------------------------------------


def test_ff_evaluate_small():
    assert ff_evaluate(0, 5) == 1
    assert ff_evaluate(3, 5) == 60
    assert ff_evaluate(6, 5) == 0


@given(st.integers(0, 6), st.integers(0, 6), st.integers(0, 15))
def test_ff_product_identity(a, b, n):
    lhs = ff_evaluate(a, n) * ff_evaluate(b, n)
    rhs = sum(c * ff_evaluate(s, n) for s, c in ff_product(a, b))
    assert lhs == rhs


@given(st.integers(0, 8), st.integers(0, 20))
def test_ff_power_coefficients(s, n):
    coeffs = ff_power_coefficients(s)
    assert sum(c * n**i for i, c in enumerate(coeffs)) == ff_evaluate(s, n)


# -- correlator polynomials --------------------------------------------------------

monos = st.dictionaries(st.integers(1, 4), st.integers(1, 3), max_size=3).map(MomentMonomial)
polys = st.dictionaries(st.tuples(st.integers(0, 5), monos), st.integers(-5, 5), max_size=4).map(CorrelatorPolynomial)


def _moment(j):
    return Fraction(j * j + 1, j)


@given(polys, polys)
def test_poly_mul_commutes(p, q):
    assert p * q == q * p


@given(polys, polys, polys)
@settings(max_examples=40)
def test_poly_mul_associates(p, q, r):
    assert (p * q) * r == p * (q * r)


@given(polys, polys, st.integers(0, 12))
def test_evaluate_is_ring_homomorphism(p, q, n):
    assert (p * q).evaluate(n, _moment) == p.evaluate(n, _moment) * q.evaluate(n, _moment)
    assert (p + q).evaluate(n, _moment) == p.evaluate(n, _moment) + q.evaluate(n, _moment)


@given(polys)
def test_text_and_json_round_trip(p):
    assert parse_polynomial(p.to_text()) == p
    assert CorrelatorPolynomial.from_json(json.loads(json.dumps(p.to_json()))) == p


def test_text_form_of_fourth_moment():
    p = CorrelatorPolynomial({(3, MomentMonomial({1: 2})): 2, (2, MomentMonomial({2: 1})): 1})
    assert p.to_text() == "2*N3*v2^2 + N2*v4"


def test_parser_handles_grouping_and_implicit_products():
    a = parse_polynomial("N3*(6*v4*v2 + 4*v2^3)")
    b = parse_polynomial("6*N3*v4*v2 + 4 N3 v2**3")
    assert a == b
    assert parse_polynomial("0").is_zero()
    assert parse_polynomial("-(N2*v2) + N2 v2").is_zero()


@pytest.mark.parametrize("bad", ["N", "v2 +", "(N2", "x3", "N2^-1"])
def test_parser_rejects_garbage(bad):
    with pytest.raises(ValueError):
        parse_polynomial(bad)


def test_split_by_highest_moment():
    p = parse_polynomial("5*N4*v2^3 + N3*(6*v4*v2 + 4*v2^3) + N2*v6")
    parts = p.split_by_highest_moment()
    assert set(parts) == {1, 2, 3}
    assert parts[2] == parse_polynomial("6*N3*v4*v2")
    assert sum(parts.values(), CorrelatorPolynomial()) == p


def test_monomial_basics():
    m = MomentMonomial({2: 1, 1: 2})
    assert str(m) == "v4*v2^2"
    assert m.degree == 4 and m.highest == 2  # sum of j * e
    assert m.to_json() == {"v4": 1, "v2": 2}
    assert MomentMonomial.from_json(m.to_json()) == m
    assert m * MomentMonomial.single(2) == MomentMonomial({2: 2, 1: 2})


# -- formal power series -------------------------------------------------------------

coeff_lists = st.lists(st.integers(-9, 9), min_size=1, max_size=8)


@given(coeff_lists, coeff_lists)
def test_series_product_is_truncated_convolution(a, b):
    order = 7
    sa, sb = FormalSeries.from_univariate(a, order=order), FormalSeries.from_univariate(b, order=order)
    want = np.convolve(a, b)[: order + 1]
    got = (sa * sb).as_list()
    assert [int(x) for x in got[: len(want)]] == list(want)


@given(coeff_lists, coeff_lists, st.integers(-3, 3))
def test_derive_is_linear(a, b, c):
    sa, sb = FormalSeries.from_univariate(a, order=7), FormalSeries.from_univariate(b, order=7)
    assert (sa * c + sb).derive() == sa.derive() * c + sb.derive()


def test_derive_drops_one_order():
    s = FormalSeries.from_univariate([1, 1, 1, 1], order=3)
    d = s.derive()
    assert d.orders == (2,)
    assert d.as_list() == [1, 2, 3]


def test_series_arith_front_end():
    s = FormalSeries.from_univariate([1, 2], order=4)
    assert series_arith(s, s, "mul").as_list() == [1, 4, 4, 0, 0]
    assert series_arith(s, op="coeff", exponents=1) == 2
    with pytest.raises(ValueError):
        series_arith(s, s, "divide")


def test_mismatched_variables_raise():
    a = FormalSeries.from_univariate([1], var="x", order=3)
    b = FormalSeries.from_univariate([1], var="y", order=3)
    with pytest.raises(OrderMismatch):
        a + b


def test_bivariate_product_and_coefficients():
    x = FormalSeries.monomial(("x", "y"), (4, 4), (1, 0))
    y = FormalSeries.monomial(("x", "y"), (4, 4), (0, 1))
    s = (FormalSeries.one(("x", "y"), (4, 4)) + x + y) ** 2
    assert s.coeff(1, 1) == 2
    assert s.coeff(2, 0) == 1
    assert FormalSeries.from_json(s.to_json()) == s


# -- 1/n expansion ---------------------------------------------------------------------


@pytest.mark.parametrize("text,r,k", [("2*N3*v2^2 + N2*v4", 1, 4), ("2*N2*v4 - 2*N2*v2^2", 2, 4)])
def test_expansion_matches_exact_value_at_large_n(text, r, k):
    p = parse_polynomial(text)
    order = 6
    exp = expand_normalized(p, r, k, order)
    v = {1: Fraction(1), 2: Fraction(7, 3)}
    for n in (10**3, 10**4):
        exact = p.evaluate(n, v.__getitem__) / (Fraction(n) ** r * (Fraction(n - 1) * v[1]) ** (k // 2))
        series = sum(c * Fraction(1, n) ** q for q, c in exp.substitute(lambda j: v[j] / v[1] ** j).items())
        # remainder is O(n^-(order+1))
        assert abs(exact - series) * Fraction(n) ** (order + 1) < 100


def test_expansion_of_fourth_moment():
    exp = expand_normalized(parse_polynomial("2*N3*v2^2 + N2*v4"), 1, 4, 2)
    assert exp.coefficient(0) == {MomentMonomial(): 2}
    assert exp.coefficient(1) == {MomentMonomial(): -2, MomentMonomial.single(2): 1}


def test_expansion_text():
    exp = expand_normalized(parse_polynomial("2*N3*v2^2 + N2*v4"), 1, 4, 1)
    assert exp.to_text() == "n^-0: 2\nn^-1: -2 + v~4"
