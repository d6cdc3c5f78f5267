import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wignercorr import asymptotics as asy
from wignercorr.algebra import FormalSeries
from wignercorr.errors import DomainError
from wignercorr.walks import enumerate_single, profile


def test_catalan_series_and_functional_equation():
    T = asy.catalan_series(8)
    assert T.as_list() == [1, 0, 1, 0, 2, 0, 5, 0, 14]
    x2 = FormalSeries.monomial(("x",), (8,), (2,))
    assert (FormalSeries.one(("x",), (8,)) + x2 * T * T - T) == FormalSeries(("x",), (8,))


@pytest.mark.parametrize("s", range(1, 7))
def test_t_power_closed_form(s):
    order = 16
    assert asy.t_power_series(s, order) == asy.catalan_series(order) ** s


def test_t_power_examples():
    assert asy.t_power_series(2, 4).coeff(2) == 2
    assert asy.t_power_series(3, 4).coeff(4) == 9


def test_special_edge_examples():
    f2 = asy.special_edge_series(2, 8)
    assert f2.as_list() == [0, 0, 0, 0, 1, 0, 6, 0, 28]
    assert asy.special_edge_series(1, 2).coeff(2) == 1


@pytest.mark.parametrize("m", range(1, 6))
def test_special_edge_binomials(m):
    f = asy.special_edge_series(m, 16)
    for n in range(0, 9):
        want = math.comb(2 * n, n - m) if n >= m else 0
        assert f.coeff(2 * n) == want == asy.special_edge_coefficient(m, 2 * n)


def test_special_edge_m3_against_walks():
    f3 = asy.special_edge_series(3, 12)
    for steps in range(2, 13, 2):
        count = 0
        for w in enumerate_single(steps, even_only=True):
            prof = profile(w)
            mults = sorted(prof.edge_multiplicities.values())
            if prof.is_tree and mults.count(6) == 1 and all(c in (2, 6) for c in mults):
                count += 1
        assert f3.coeff(steps) == count


def test_phi_examples():
    phi2 = asy.phi_r_series(2, 4, 4)
    assert phi2.coeff(2, 2, 4) == 2
    assert all(c == 0 for e, c in phi2.coefficients.items() if e[-1] % 2)
    phi3 = asy.phi_r_series(3, 2, 6)
    assert phi3.coeff(2, 2, 2, 6) == 4


@pytest.mark.parametrize(
    "sig,j,want", [((4, 2), 3, 2), ((4, 4), 2, 32), ((3, 3), 3, 0), ((6,), 2, 6), ((4, 4, 4), 4, 4 * 3 * 16)]
)
def test_leading_highest_moment(sig, j, want):
    rep = asy.leading_highest_moment(sig, j)
    assert rep.predicted == want
    assert rep.match
    assert rep.power == -(len(sig) + j - 2)


def test_leading_highest_moment_needs_j_at_least_r():
    with pytest.raises(ValueError):
        asy.leading_highest_moment((2, 2, 2), 2)


# -- kernels -----------------------------------------------------------------------------


def test_rj_examples():
    assert asy.rj_eval(1, 0.0) == pytest.approx(-1 / (2 * np.pi))
    assert asy.rj_eval(1, math.sqrt(2)) == pytest.approx(0.0, abs=1e-15)
    assert asy.rj_moment(1, 1) == pytest.approx(1, abs=1e-10)
    assert asy.rj_moment(3, 2) == pytest.approx(0, abs=1e-10)
    assert asy.rj_moment(2, 5) == pytest.approx(120, abs=1e-8)


@given(st.integers(1, 8), st.floats(-1.99, 1.99))
def test_recursion_matches_direct(j, y):
    a, b = asy.rj_eval(j, y), asy.rj_direct(j, y)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


def test_rj_domain():
    with pytest.raises(DomainError):
        asy.rj_eval(2, 2.0)
    with pytest.raises(DomainError):
        asy.rj_eval(1, [0.0, -3.0])


def test_rj_moment_against_quad():
    from scipy.integrate import quad

    # independent route: adaptive quadrature on y with the singular weight
    for j, k in [(1, 2), (2, 3), (3, 4)]:
        val, _ = quad(lambda y: float(asy.rj_direct(j, y)) * y ** (2 * k), -2, 2, limit=200)
        assert val == pytest.approx(math.comb(2 * k, k - j), rel=1e-6)


def test_delta_rho():
    ys = np.linspace(-1.9, 1.9, 7)
    assert np.all(asy.delta_rho_leading(2, 0, 1, 100, ys) == 0)
    assert asy.delta_rho_leading(2, 2, 1, 100, [0.0])[0] == pytest.approx(2 / 100 * float(asy.rj_direct(2, 0.0)))
    pts = [(0.3, -1.1), (1.5, 0.2)]
    got = asy.delta_rho_leading(2, 2, 1, 50, pts, r=2)
    want = [2 * 50.0**-2 * 2 * asy.rj_eval(1, a) * asy.rj_eval(1, b) for a, b in pts]
    assert np.allclose(got, want)
    with pytest.raises(DomainError):
        asy.delta_rho_leading(2, 1, 1, 10, [(0.0, 2.5)], r=2)


# -- 1/n corrections and two-point function ------------------------------------------------


def test_one_point_examples():
    c = asy.one_point_corrections(10, s2_over_v2=1)
    assert c.S4.coeff(8) == 37
    assert c.S4.coeff(10) == 236
    assert c.S3.coeff(2) == 1
    assert all(c.S2.coeff(2 * k) == math.comb(2 * k, k - 2) for k in range(2, 6))
    c3 = asy.one_point_corrections(10, v4_over_v2sq=3)
    assert c3.S2.coeff(8) == 3 * math.comb(8, 2)


@pytest.mark.parametrize("m1,m2,want", [(3, 3, 6), (4, 4, -24), (2, 2, -2), (5, 3, 30)])
def test_two_point_closed_coefficients(m1, m2, want):
    assert asy.two_point_leading_coefficient(m1, m2) == want


def test_two_point_series_against_exact():
    tp = asy.two_point_leading(8)
    for m1, m2 in [(2, 2), (3, 3), (4, 2), (4, 4), (5, 3)]:
        assert tp.coefficient(m1, m2) == asy.exact_two_point_leading(m1, m2)


def test_green_function():
    y = np.array([2.5, -3.0, 10.0])
    g = asy.green_function(y)
    assert np.allclose(g * g - y * g + 1, 0)
    assert np.all(np.abs(g) < 1)
    assert asy.green_function(1e3) * 1e3 == pytest.approx(1, abs=1e-5)
    with pytest.raises(DomainError):
        asy.green_function(1.0)
    h = 1e-6
    fd = (asy.green_function(3 + h) - asy.green_function(3 - h)) / (2 * h)
    assert asy.green_derivative(3.0) == pytest.approx(fd, rel=1e-7)


def test_gaussian_quartic_term_vanishes():
    a = asy.gc2(2.7, 3.4, 3.0)
    b = asy.gc2(2.7, 3.4, 5.0)
    g = asy.green_function
    d = asy.green_derivative
    assert b - a == pytest.approx(2 * 2 * g(2.7) * d(2.7) * g(3.4) * d(3.4))


@pytest.fixture(scope="module")
def deep_two_point():
    return asy.two_point_leading(40)


@pytest.mark.parametrize("v4,s2", [(1.0, 0.0), (3.0, 0.0), (2.0, 1.0)])
def test_gc2_matches_series(deep_two_point, v4, s2):
    tp = deep_two_point
    for y1, y2 in [(6.0, 7.0), (-6.5, 8.0)]:
        series = tp.evaluate(1 / y1, 1 / y2, v4, s2) / (y1 * y2)
        assert float(asy.gc2(y1, y2, v4, s2)) == pytest.approx(series, rel=1e-10)


def test_gc2_kkp_agrees_at_special_diagonal():
    rng = np.random.default_rng(0)
    y = rng.uniform(2.1, 10, (20, 2)) * rng.choice([-1, 1], (20, 2))
    v4 = rng.uniform(1, 4, 20)
    assert np.allclose(asy.gc2(y[:, 0], y[:, 1], v4, 2.0), asy.gc2_kkp(y[:, 0], y[:, 1], v4), atol=1e-12)
    # away from s^2 = 2 v2 the two forms differ
    assert not np.allclose(asy.gc2(y[:, 0], y[:, 1], v4, 0.0), asy.gc2_kkp(y[:, 0], y[:, 1], v4))
