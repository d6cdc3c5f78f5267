"""Closed-form large-n layer: tree-walk generating functions, kernels, leading terms.

Series use the variable ``x`` with the exponent counting walk steps; ``T(x)``
is the Catalan generating function of tree walks with every edge run twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import eval_chebyu

from .algebra import FormalSeries, MomentMonomial
from .correlators import TraceSignature, _compositions, exact_connected, normalize_and_expand
from .errors import DomainError


def catalan(m: int) -> int:
    return math.comb(2 * m, m) // (m + 1)


def catalan_series(order: int, var: str = "x") -> FormalSeries:
    """``T(x) = sum C_m x^{2m}`` up to ``x^order``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    return FormalSeries((var,), (order,), {(2 * m,): catalan(m) for m in range(order // 2 + 1)})


def t_power_series(s: int, order: int, var: str = "x") -> FormalSeries:
    """``T(x)^s`` from the closed form ``sum_j s/(2j+s) C(2j+s, j) x^{2j}``."""
    if s < 1:
        raise ValueError("s must be >= 1")
    return FormalSeries(
        (var,),
        (order,),
        {(2 * j,): Fraction(s, 2 * j + s) * math.comb(2 * j + s, j) for j in range(order // 2 + 1)},
    )


def special_edge_series(m: int, order: int, var: str = "x") -> FormalSeries:
    """Tree walks with one edge run ``2m`` times, the rest twice.

    Built as ``(x / 2m) d/dx (x^{2m} T^{2m})``; its coefficients are
    ``C(2n, n-m)`` at ``x^{2n}``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    # one spare order so the derivative is exact up to x^order
    inner = t_power_series(2 * m, order + 1, var).shift(0, 2 * m).truncate((order + 1,))
    return (inner.euler(0) * Fraction(1, 2 * m)).truncate((order,))


def special_edge_coefficient(m: int, steps: int) -> int:
    """``[x^steps] f_m``."""
    if steps % 2 or steps < 2 * m:
        return 0
    half = steps // 2
    return math.comb(steps, half - m)


def phi_series(order: int, z_order: int, x: str = "x", z: str = "z") -> FormalSeries:
    """``phi(x, z) = sum_m f_m(x) z^{2m}``."""
    out = {}
    for m in range(1, z_order // 2 + 1):
        for (e,), c in special_edge_series(m, order, x).coefficients.items():
            out[(e, 2 * m)] = c
    return FormalSeries((x, z), (order, z_order), out)


def phi_r_series(r: int, orders: Sequence[int] | int, z_order: int) -> FormalSeries:
    """``Phi_r = 2^{r-1} prod_i phi(x_i, z)`` in variables ``x1..xr, z``.

    The special edges of the r walks can be glued with two orientations,
    hence the power of two.
    """
    if r < 2:
        raise ValueError("r must be >= 2")
    if isinstance(orders, int):
        orders = [orders] * r
    names = tuple(f"x{i + 1}" for i in range(r)) + ("z",)
    all_orders = tuple(orders) + (z_order,)
    out = FormalSeries.one(names, all_orders) * (2 ** (r - 1))
    for i in range(r):
        out = out * phi_series(orders[i], z_order, names[i], "z").embed(names, all_orders)
    return out


# -- highest-moment leading terms ---------------------------------------------


@dataclass(frozen=True)
class LeadingTermReport:
    signature: TraceSignature
    j: int
    power: int  # exponent of n
    predicted: Fraction
    observed: Fraction

    @property
    def match(self) -> bool:
        return self.predicted == self.observed


def predicted_highest_moment(sig, j: int) -> Fraction:
    """Coefficient of ``n^{2-r-j} v~_{2j}`` read off the tree-walk generating functions."""
    sig = TraceSignature.of(sig)
    if any(m % 2 for m in sig.powers):
        return Fraction(0)
    if sig.r == 1:
        m2 = sig.powers[0]
        return Fraction(special_edge_coefficient(j, m2))
    phi = phi_r_series(sig.r, list(sig.powers), 2 * j)
    return phi.coeff(tuple(sig.powers) + (2 * j,))


def highest_moment_closed_form(sig, j: int) -> int:
    """``2^{r-1} sum_{j_1+..+j_r=j} prod C(m_i, m_i/2 - j_i)``; zero for odd powers."""
    sig = TraceSignature.of(sig)
    if any(m % 2 for m in sig.powers):
        return 0
    total = 0
    for js in _compositions(j, [m // 2 for m in sig.powers]):
        total += math.prod(math.comb(m, m // 2 - ji) for m, ji in zip(sig.powers, js))
    return 2 ** (sig.r - 1) * total


def leading_highest_moment(sig, j: int) -> LeadingTermReport:
    """Compare the predicted ``n^{2-r-j} v~_{2j}`` coefficient with the exact expansion."""
    sig = TraceSignature.of(sig)
    if j < max(2, sig.r):
        raise ValueError("need j >= max(2, r)")
    p = sig.r + j - 2
    exp = normalize_and_expand(exact_connected(sig), sig, p)
    observed = exp.coefficient(p, MomentMonomial.single(j))
    return LeadingTermReport(sig, j, -p, predicted_highest_moment(sig, j), Fraction(observed))


# -- density-difference kernels -------------------------------------------------


def _check_domain(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(y) >= 2):
        raise DomainError("kernel defined only for |y| < 2")
    return y


def rj_direct(j: int, y):
    """Kernel from Chebyshev polynomials of the second kind."""
    y = _check_domain(y)
    num = y * eval_chebyu(2 * j - 1, y / 2) - 2 * eval_chebyu(2 * j - 2, y / 2)
    return num / (2 * np.pi * np.sqrt(4 - y * y))


def rj_eval(j: int, y):
    """``R_j(y)`` via ``R_j = (y^2 - 2) R_{j-1} - R_{j-2}`` seeded at ``j = 1, 2``."""
    if j < 1:
        raise ValueError("j must be >= 1")
    y = _check_domain(y)
    r1 = rj_direct(1, y)
    if j == 1:
        return r1
    r2 = rj_direct(2, y)
    a, b = r1, r2
    for _ in range(j - 2):
        a, b = b, (y * y - 2) * b - a
    return b


def rj_moment(j: int, k: int) -> float:
    """``int_{-2}^{2} R_j(y) y^{2k} dy`` on a uniform angle grid, ``y = 2 cos t``.

    The substitution cancels the square root; the integrand becomes a
    trigonometric polynomial of degree ``<= 2(k + j)`` so the periodic
    trapezoid rule with ``4(k + j) + 16`` nodes is exact.
    """
    if j < 1 or k < 0:
        raise ValueError("need j >= 1 and k >= 0")
    nodes = 4 * (k + j) + 16
    t = 2 * np.pi * np.arange(nodes) / nodes
    c = np.cos(t)
    y = 2 * c
    f = (y * eval_chebyu(2 * j - 1, c) - 2 * eval_chebyu(2 * j - 2, c)) * y ** (2 * k) / (2 * np.pi)
    # integrand is even in t: the [0, pi] integral is half the full period
    return float(f.mean() * 2 * np.pi / 2)


def delta_rho_leading(j: int, delta_v2j, v2, n, points, r: int = 1, max_j: Sequence[int] | None = None):
    """Leading difference of (multi-point) spectral densities between two ensembles.

    ``r = 1``: ``n^{1-j} (dv / v2^j) R_j(y)`` at each point.  For ``r >= 2``
    each point is a tuple ``(y_1..y_r)`` and the kernel is
    ``2^{r-1} n^{2-r-j} (dv / v2^j) sum prod R_{j_i}(y_i)``.
    """
    scale = float(Fraction(delta_v2j) / Fraction(v2) ** j)
    if r == 1:
        y = np.asarray(points, dtype=float)
        return float(n) ** (1 - j) * scale * rj_eval(j, y)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != r:
        raise ValueError("each point needs r coordinates")
    _check_domain(pts)
    caps = list(max_j) if max_j is not None else [j] * r
    acc = np.zeros(len(pts))
    for js in _compositions(j, caps):
        term = np.ones(len(pts))
        for i, ji in enumerate(js):
            term = term * rj_eval(ji, pts[:, i])
        acc += term
    return 2 ** (r - 1) * float(n) ** (2 - r - j) * scale * acc


# -- one-point 1/n corrections ---------------------------------------------------


@dataclass(frozen=True)
class OnePointCorrections:
    S2: FormalSeries
    S3: FormalSeries
    S4: FormalSeries


def one_point_corrections(order: int, s2_over_v2=0, v4_over_v2sq=1) -> OnePointCorrections:
    """Order-``1/n`` generating functions for ``<tr B^{2k}/n>``.

    ``S2`` counts trees with one edge run four times, ``S3`` a diagonal
    self-loop, ``S4`` walks on one ``p``-gon (``p >= 3``) dressed with trees.
    """
    T = catalan_series(order + 1)
    dressing = (T.euler(0) + T).truncate((order,))  # x T' + T
    Tt = T.truncate((order,))
    S2 = (Tt**3 * dressing).shift(0, 4) * Fraction(v4_over_v2sq)
    S3 = (Tt * dressing).shift(0, 2) * Fraction(s2_over_v2)
    S4 = FormalSeries(("x",), (order,))
    for p in range(3, order // 2 + 1):
        S4 = S4 + (Tt ** (2 * p - 1) * dressing).shift(0, 2 * p) * (p + 1)
    return OnePointCorrections(S2.truncate((order,)), S3.truncate((order,)), S4.truncate((order,)))


# -- two-point leading order -----------------------------------------------------


@dataclass(frozen=True)
class TwoPointLeading:
    """Leading ``<tr B^{m1} tr B^{m2}>_c`` generating function, split by moment.

    ``C_2 = const + v~_4 * fourth + (s^2 / v_2) * diagonal``.
    """

    const: FormalSeries
    fourth: FormalSeries
    diagonal: FormalSeries

    def coefficient(self, m1: int, m2: int) -> dict[MomentMonomial, Fraction]:
        out = {}
        c0, c1 = self.const.coeff(m1, m2), self.fourth.coeff(m1, m2)
        if c0:
            out[MomentMonomial()] = c0
        if c1:
            out[MomentMonomial.single(2)] = c1
        return out

    def evaluate(self, x1: float, x2: float, v4_std: float, s2_over_v2: float = 0.0) -> float:
        return (
            self.const.evaluate(x1, x2)
            + v4_std * self.fourth.evaluate(x1, x2)
            + s2_over_v2 * self.diagonal.evaluate(x1, x2)
        )


def two_point_leading(orders: int | Sequence[int]) -> TwoPointLeading:
    """``x1 x2 d1 d2 [ (v~_4 - 1)/2 T1 T2 + sum_{r>=3} (2/r) (x1 x2 T1 T2)^r ]``.

    The diagonal part is ``x1 x2 d1 d2 (x1 T1 x2 T2)``.
    """
    if isinstance(orders, int):
        orders = (orders, orders)
    o1, o2 = orders
    if min(o1, o2) < 2:
        raise ValueError("orders must be >= 2")
    names = ("x1", "x2")
    T1 = catalan_series(o1, "x1").embed(names, (o1, o2))
    T2 = catalan_series(o2, "x2").embed(names, (o1, o2))
    TT = T1 * T2

    def d12(s: FormalSeries) -> FormalSeries:
        return s.euler(0).euler(1)

    half_tt = d12(TT) * Fraction(1, 2)
    u = TT.shift(0, 1).shift(1, 1)  # x1 x2 T1 T2
    loops = FormalSeries(names, (o1, o2))
    up = u**2
    for r in range(3, min(o1, o2) + 1):
        up = up * u
        loops = loops + up * Fraction(2, r)
    const = d12(loops) - half_tt
    return TwoPointLeading(const=const, fourth=half_tt, diagonal=d12(u))


def two_point_leading_coefficient(m1: int, m2: int) -> int:
    """``v~_4``-free leading coefficient of ``<tr A^{m1} tr A^{m2}>_c / (n v_2)^{(m1+m2)/2}``."""
    if (m1 + m2) % 2:
        return 0

    def b(m, i):
        return math.comb(m, i) if 0 <= i <= m else 0

    out = 0
    if m1 % 2 == 0 and m2 % 2 == 0:
        out -= 2 * b(m1, m1 // 2 - 1) * b(m2, m2 // 2 - 1)
    for r in range(3, min(m1, m2) + 1):
        if (m1 - r) % 2 == 0:
            out += 2 * r * b(m1, (m1 - r) // 2) * b(m2, (m2 - r) // 2)
    return out


def two_point_fourth_coefficient(m1: int, m2: int) -> int:
    """Coefficient of ``v~_4`` in the same leading term: ``2 C(m1, m1/2-1) C(m2, m2/2-1)``."""
    if m1 % 2 or m2 % 2:
        return 0
    return 2 * math.comb(m1, m1 // 2 - 1) * math.comb(m2, m2 // 2 - 1)


def exact_two_point_leading(m1: int, m2: int) -> dict[MomentMonomial, Fraction]:
    """Leading ``n^0`` coefficient of ``<tr B^{m1} tr B^{m2}>_c`` from the exact polynomial."""
    sig = TraceSignature((m1, m2))
    exp = normalize_and_expand(exact_connected(sig), sig, 2)
    return exp.coefficient(2)


def green_function(y):
    """Semicircle resolvent ``G(y) = (y - sqrt(y^2 - 4)) / 2`` on the real axis, ``|y| > 2``.

    The branch is chosen so that ``G(y) ~ 1/y`` at infinity.
    """
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(y) <= 2):
        raise DomainError("G is evaluated only outside the support [-2, 2]")
    return (y - np.sign(y) * np.sqrt(y * y - 4)) / 2


def green_derivative(y):
    g = green_function(y)
    return -(g * g) / (1 - g * g)


def gc2(y1, y2, v4_std, s2_over_v2=0.0):
    """``n^2 G_c(y1, y2)`` as the mixed derivative of
    ``-2 log(1 - G1 G2) + (v~_4 - 3)/2 G1^2 G2^2 + (s^2/v_2 - 2) G1 G2``."""
    g1, g2 = green_function(y1), green_function(y2)
    d1, d2 = green_derivative(y1), green_derivative(y2)
    log_part = 2 * d1 * d2 / (1 - g1 * g2) ** 2
    quartic = 2 * (v4_std - 3) * g1 * d1 * g2 * d2
    bilinear = (s2_over_v2 - 2) * d1 * d2
    return log_part + quartic + bilinear


def gc2_kkp(y1, y2, v4_std):
    """The same two-point function in resolvent-difference form (diagonal variance ``2 v_2``)."""
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    g1, g2 = green_function(y1), green_function(y2)
    den = (1 - g1 * g1) * (1 - g2 * g2)
    return 2 / den * ((g1 - g2) / (y1 - y2)) ** 2 + 2 * (v4_std - 3) * g1**3 * g2**3 / den
