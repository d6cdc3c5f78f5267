"""Exact arithmetic for trace correlators.

Three value types live here:

* ``MomentMonomial`` -- a product of entry moments ``v2^a * v4^b * ...``.
* ``CorrelatorPolynomial`` -- an integer combination of ``N_s * monomial``,
  where ``N_s = n (n-1) ... (n-s+1)`` is kept as an unexpanded basis symbol.
* ``FormalSeries`` -- truncated multivariate power series with ``Fraction``
  coefficients.

``StandardizedExpansion`` holds a ``1/n`` expansion whose coefficients are
polynomials in the standardized moments ``v_{2j} / v_2^j``.

Nothing in this module touches floating point.
"""

from __future__ import annotations

import json
import math
import re
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping

from .errors import OrderMismatch

__all__ = [
    "MomentMonomial",
    "CorrelatorPolynomial",
    "FormalSeries",
    "StandardizedExpansion",
    "ff_evaluate",
    "ff_product",
    "ff_power_coefficients",
    "poly_evaluate",
    "series_arith",
    "parse_polynomial",
]


def ff_evaluate(s: int, n: int) -> int:
    """Falling factorial ``n (n-1) ... (n-s+1)``; zero once ``s > n``."""
    if s < 0 or n < 0:
        raise ValueError("falling factorial needs s >= 0 and n >= 0")
    return math.perm(n, s)


@lru_cache(maxsize=None)
def ff_product(a: int, b: int) -> tuple[tuple[int, int], ...]:
    """Expand ``N_a * N_b`` in the falling-factorial basis.

    Returns pairs ``(s, c)`` with ``N_a N_b = sum c N_s``.  Counts the ways
    to place an ``a``-set and a ``b``-set that overlap in ``i`` points.
    """
    return tuple(
        (a + b - i, math.comb(a, i) * math.comb(b, i) * math.factorial(i))
        for i in range(min(a, b) + 1)
    )


@lru_cache(maxsize=None)
def ff_power_coefficients(s: int) -> tuple[int, ...]:
    """Coefficients ``c_i`` of ``N_s = sum_i c_i n^i`` (signed Stirling numbers)."""
    coeffs = [1]
    for i in range(s):
        # multiply by (n - i)
        nxt = [0] * (len(coeffs) + 1)
        for d, c in enumerate(coeffs):
            nxt[d + 1] += c
            nxt[d] -= i * c
        coeffs = nxt
    return tuple(coeffs)


class MomentMonomial:
    """Product of entry moments, ``prod_j v_{2j}^{e_j}``.

    Stored as a sorted tuple of ``(j, e_j)`` pairs with ``e_j > 0``; the empty
    tuple is the identity.
    """

    __slots__ = ("_items", "_hash")

    def __init__(self, exponents: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = exponents.items() if isinstance(exponents, Mapping) else exponents
        acc: dict[int, int] = {}
        for j, e in items:
            j, e = int(j), int(e)
            if j < 1 or e < 0:
                raise ValueError(f"bad moment exponent v{2 * j}^{e}")
            if e:
                acc[j] = acc.get(j, 0) + e
        self._items = tuple(sorted(acc.items()))
        self._hash = hash(self._items)

    @classmethod
    def single(cls, j: int, e: int = 1) -> "MomentMonomial":
        return cls({j: e})

    @property
    def exponents(self) -> dict[int, int]:
        return dict(self._items)

    def items(self) -> tuple[tuple[int, int], ...]:
        return self._items

    @property
    def degree(self) -> int:
        """Total moment degree ``sum_j j e_j`` (half the walk length)."""
        return sum(j * e for j, e in self._items)

    @property
    def highest(self) -> int:
        """Largest moment index present, 0 for the identity."""
        return self._items[-1][0] if self._items else 0

    def exponent(self, j: int) -> int:
        return dict(self._items).get(j, 0)

    def without(self, j: int) -> "MomentMonomial":
        return MomentMonomial((i, e) for i, e in self._items if i != j)

    def __mul__(self, other: "MomentMonomial") -> "MomentMonomial":
        return MomentMonomial(self._items + other._items)

    def __eq__(self, other) -> bool:
        return isinstance(other, MomentMonomial) and self._items == other._items

    def __hash__(self) -> int:
        return self._hash

    def sort_key(self) -> tuple:
        # highest moments first, larger exponents first
        return tuple((-j, -e) for j, e in reversed(self._items))

    def __lt__(self, other: "MomentMonomial") -> bool:
        return self.sort_key() < other.sort_key()

    def evaluate(self, moment) -> Fraction:
        """Value with ``moment(j)`` giving ``v_{2j}``."""
        out = Fraction(1)
        for j, e in self._items:
            out *= Fraction(moment(j)) ** e
        return out

    def __str__(self) -> str:
        parts = []
        for j, e in reversed(self._items):
            parts.append(f"v{2 * j}" if e == 1 else f"v{2 * j}^{e}")
        return "*".join(parts) if parts else "1"

    def __repr__(self) -> str:
        return f"MomentMonomial({str(self)!r})"

    def to_json(self) -> dict[str, int]:
        return {f"v{2 * j}": e for j, e in self._items}

    @classmethod
    def from_json(cls, data: Mapping[str, int]) -> "MomentMonomial":
        out = {}
        for key, e in data.items():
            m = re.fullmatch(r"v(\d+)", key)
            if not m or int(m.group(1)) % 2:
                raise ValueError(f"bad moment name {key!r}")
            out[int(m.group(1)) // 2] = e
        return cls(out)


ONE = MomentMonomial()


class CorrelatorPolynomial:
    """Integer combination of ``N_s * MomentMonomial`` terms.

    Immutable.  Zero coefficients are never stored.  ``N_0`` is allowed and
    stands for the constant 1, which products and the parser need.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, MomentMonomial], int] | None = None):
        clean: dict[tuple[int, MomentMonomial], int] = {}
        for (s, mono), c in (terms or {}).items():
            if s < 0:
                raise ValueError("falling factorial index must be >= 0")
            if c:
                key = (int(s), mono)
                clean[key] = clean.get(key, 0) + int(c)
        self._terms = {k: v for k, v in clean.items() if v}

    @classmethod
    def constant(cls, c: int) -> "CorrelatorPolynomial":
        return cls({(0, ONE): c})

    @classmethod
    def ff(cls, s: int) -> "CorrelatorPolynomial":
        return cls({(s, ONE): 1})

    @classmethod
    def moment(cls, j: int) -> "CorrelatorPolynomial":
        return cls({(0, MomentMonomial.single(j)): 1})

    @property
    def terms(self) -> dict[tuple[int, MomentMonomial], int]:
        return dict(self._terms)

    def sorted_terms(self) -> list[tuple[int, MomentMonomial, int]]:
        """Canonical order: ``s`` descending, then monomial order."""
        keys = sorted(self._terms, key=lambda k: (-k[0], k[1].sort_key()))
        return [(s, m, self._terms[(s, m)]) for s, m in keys]

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, s: int, mono: MomentMonomial) -> int:
        return self._terms.get((s, mono), 0)

    def degrees(self) -> set[int]:
        return {m.degree for _, m in self._terms}

    def max_s(self) -> int:
        return max((s for s, _ in self._terms), default=0)

    def __add__(self, other: "CorrelatorPolynomial") -> "CorrelatorPolynomial":
        if isinstance(other, int):
            other = CorrelatorPolynomial.constant(other)
        acc = dict(self._terms)
        for k, v in other._terms.items():
            acc[k] = acc.get(k, 0) + v
        return CorrelatorPolynomial(acc)

    __radd__ = __add__

    def __neg__(self) -> "CorrelatorPolynomial":
        return CorrelatorPolynomial({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: "CorrelatorPolynomial") -> "CorrelatorPolynomial":
        if isinstance(other, int):
            other = CorrelatorPolynomial.constant(other)
        return self + (-other)

    def __rsub__(self, other: int) -> "CorrelatorPolynomial":
        return CorrelatorPolynomial.constant(other) - self

    def __mul__(self, other) -> "CorrelatorPolynomial":
        if isinstance(other, int):
            return CorrelatorPolynomial({k: v * other for k, v in self._terms.items()})
        if not isinstance(other, CorrelatorPolynomial):
            return NotImplemented
        acc: dict[tuple[int, MomentMonomial], int] = {}
        for (s1, m1), c1 in self._terms.items():
            for (s2, m2), c2 in other._terms.items():
                mono = m1 * m2
                for s, c in ff_product(s1, s2):
                    key = (s, mono)
                    acc[key] = acc.get(key, 0) + c * c1 * c2
        return CorrelatorPolynomial(acc)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "CorrelatorPolynomial":
        if e < 0:
            raise ValueError("negative powers are not polynomials")
        out = CorrelatorPolynomial.constant(1)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = CorrelatorPolynomial.constant(other)
        return isinstance(other, CorrelatorPolynomial) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def split_by_highest_moment(self) -> dict[int, "CorrelatorPolynomial"]:
        """Group terms by the highest moment index they contain."""
        groups: dict[int, dict] = {}
        for (s, m), c in self._terms.items():
            groups.setdefault(m.highest, {})[(s, m)] = c
        return {j: CorrelatorPolynomial(t) for j, t in sorted(groups.items())}

    def expand_in_n(self) -> dict[tuple[int, MomentMonomial], int]:
        """Expand every ``N_s`` into powers of ``n``: ``(power, monomial) -> coeff``."""
        acc: dict[tuple[int, MomentMonomial], int] = {}
        for (s, m), c in self._terms.items():
            for d, a in enumerate(ff_power_coefficients(s)):
                if a:
                    acc[(d, m)] = acc.get((d, m), 0) + a * c
        return {k: v for k, v in acc.items() if v}

    def evaluate(self, n: int, moment) -> Fraction:
        total = Fraction(0)
        for (s, m), c in self._terms.items():
            ff = ff_evaluate(s, n)
            if ff:
                total += c * ff * m.evaluate(moment)
        return total

    def to_text(self) -> str:
        """Canonical text, e.g. ``2*N3*v2^2 + N2*v4``."""
        if not self._terms:
            return "0"
        out = []
        for i, (s, m, c) in enumerate(self.sorted_terms()):
            factors = [] if s == 0 else [f"N{s}"]
            if m != ONE:
                factors.append(str(m))
            body = "*".join(factors)
            mag = abs(c)
            if not body:
                piece = str(mag)
            elif mag == 1:
                piece = body
            else:
                piece = f"{mag}*{body}"
            if i == 0:
                out.append(piece if c > 0 else f"-{piece}")
            else:
                out.append(("+ " if c > 0 else "- ") + piece)
        return " ".join(out)

    __str__ = to_text

    def __repr__(self) -> str:
        return f"CorrelatorPolynomial({self.to_text()!r})"

    @classmethod
    def from_text(cls, text: str) -> "CorrelatorPolynomial":
        return parse_polynomial(text)

    def to_json(self) -> list[dict]:
        return [
            {"s": s, "monomial": m.to_json(), "coeff": c}
            for s, m, c in self.sorted_terms()
        ]

    @classmethod
    def from_json(cls, data: Iterable[Mapping]) -> "CorrelatorPolynomial":
        acc = {}
        for t in data:
            key = (int(t["s"]), MomentMonomial.from_json(t["monomial"]))
            acc[key] = acc.get(key, 0) + int(t["coeff"])
        return cls(acc)

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def poly_evaluate(p: CorrelatorPolynomial, e, n: int | None = None) -> Fraction:
    """Evaluate ``p`` at the ensemble ``e`` (matrix order taken from ``e.n``).

    Raises ``MissingMoment`` when ``e`` lacks a moment ``p`` references.
    """
    if n is None:
        n = e.n
    if n is None:
        raise ValueError("matrix order n is not set")
    needed = {j for (_, m) in p.terms for j, _ in m.items()}
    for j in needed:
        e.v(j)  # raises MissingMoment early
    return p.evaluate(n, e.v)


# -- text parser -------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|N_?\{?(\d+)\}?|v_?\{?(\d+)\}?|(\*\*|[-+*^()]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {text[pos:pos + 12]!r} at column {pos}")
        num, ff, mom, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif ff is not None:
            out.append(("N", ff))
        elif mom is not None:
            out.append(("v", mom))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expr(self) -> CorrelatorPolynomial:
        sign = 1
        if self.peek() == ("op", "-"):
            self.take()
            sign = -1
        elif self.peek() == ("op", "+"):
            self.take()
        acc = self.term() * sign
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> CorrelatorPolynomial:
        acc = self.power()
        while True:
            tok = self.peek()
            if tok == ("op", "*"):
                self.take()
                acc = acc * self.power()
            elif tok[0] in ("num", "N", "v") or tok == ("op", "("):
                acc = acc * self.power()  # implicit product
            else:
                return acc

    def power(self) -> CorrelatorPolynomial:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            kind, val = self.take()
            if kind != "num":
                raise ValueError("exponent must be an integer")
            base = base ** int(val)
        return base

    def atom(self) -> CorrelatorPolynomial:
        kind, val = self.take()
        if kind == "num":
            return CorrelatorPolynomial.constant(int(val))
        if kind == "N":
            return CorrelatorPolynomial.ff(int(val))
        if kind == "v":
            order = int(val)
            if order % 2 or order == 0:
                raise ValueError(f"only even moments v2, v4, ... exist, got v{order}")
            return CorrelatorPolynomial.moment(order // 2)
        if (kind, val) == ("op", "("):
            inner = self.expr()
            if self.take() != ("op", ")"):
                raise ValueError("unbalanced parenthesis")
            return inner
        raise ValueError(f"unexpected token {val!r}")


def parse_polynomial(text: str) -> CorrelatorPolynomial:
    """Parse text such as ``8*N4*(4*v4*v2^2 - 3*v2^4) + 2*N2*v8``.

    Accepts ``+ - * ^ **``, parentheses and implicit products; products of
    falling factorials are re-expanded in the ``N_s`` basis.
    """
    if text.strip() == "0":
        return CorrelatorPolynomial()
    p = _Parser(_tokenize(text))
    out = p.expr()
    if p.i != len(p.toks):
        raise ValueError(f"trailing input after token {p.i}")
    return out


# -- formal power series -----------------------------------------------------


class FormalSeries:
    """Truncated power series in one or more variables, exact coefficients.

    ``orders[i]`` is the largest exponent of ``variables[i]`` that is kept.
    """

    __slots__ = ("variables", "orders", "_c")

    def __init__(self, variables, orders, coeffs: Mapping[tuple, object] | None = None):
        self.variables = tuple(variables)
        self.orders = tuple(int(o) for o in orders)
        if len(self.variables) != len(self.orders):
            raise ValueError("one truncation order per variable")
        c = {}
        for exps, val in (coeffs or {}).items():
            exps = tuple(exps)
            if len(exps) != len(self.variables):
                raise ValueError("exponent tuple has wrong length")
            if any(e > o for e, o in zip(exps, self.orders)):
                continue
            val = Fraction(val)
            if val:
                c[exps] = c.get(exps, 0) + val
        self._c = {k: v for k, v in c.items() if v}

    # constructors
    @classmethod
    def from_univariate(cls, coeffs: Iterable, var: str = "x", order: int | None = None):
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs) - 1
        return cls((var,), (order,), {(i,): c for i, c in enumerate(coeffs)})

    @classmethod
    def one(cls, variables, orders) -> "FormalSeries":
        return cls(variables, orders, {(0,) * len(tuple(variables)): 1})

    @classmethod
    def monomial(cls, variables, orders, exps, coeff=1) -> "FormalSeries":
        return cls(variables, orders, {tuple(exps): coeff})

    @property
    def coefficients(self) -> dict[tuple, Fraction]:
        return dict(self._c)

    def coeff(self, *exps) -> Fraction:
        if len(exps) == 1 and isinstance(exps[0], tuple):
            exps = exps[0]
        return self._c.get(tuple(exps), Fraction(0))

    def as_list(self) -> list[Fraction]:
        """Univariate coefficients ``[c_0, ..., c_order]``."""
        if len(self.variables) != 1:
            raise ValueError("as_list needs a univariate series")
        return [self.coeff(i) for i in range(self.orders[0] + 1)]

    def _align(self, other: "FormalSeries") -> tuple[int, ...]:
        if self.variables != other.variables:
            raise OrderMismatch(f"variables {self.variables} vs {other.variables}")
        return tuple(min(a, b) for a, b in zip(self.orders, other.orders))

    def truncate(self, orders) -> "FormalSeries":
        return FormalSeries(self.variables, orders, self._c)

    def embed(self, variables, orders) -> "FormalSeries":
        """Re-express in a larger variable list (missing variables get exponent 0)."""
        idx = [tuple(variables).index(v) for v in self.variables]
        out = {}
        for exps, val in self._c.items():
            full = [0] * len(variables)
            for i, e in zip(idx, exps):
                full[i] = e
            out[tuple(full)] = val
        return FormalSeries(variables, orders, out)

    def __add__(self, other) -> "FormalSeries":
        if not isinstance(other, FormalSeries):
            return self + FormalSeries.one(self.variables, self.orders) * other
        orders = self._align(other)
        acc = dict(self._c)
        for k, v in other._c.items():
            acc[k] = acc.get(k, 0) + v
        return FormalSeries(self.variables, orders, acc)

    __radd__ = __add__

    def __neg__(self) -> "FormalSeries":
        return FormalSeries(self.variables, self.orders, {k: -v for k, v in self._c.items()})

    def __sub__(self, other) -> "FormalSeries":
        return self + (-other)

    def __rsub__(self, other) -> "FormalSeries":
        return (-self) + other

    def __mul__(self, other) -> "FormalSeries":
        if not isinstance(other, FormalSeries):
            other = Fraction(other)
            return FormalSeries(self.variables, self.orders, {k: v * other for k, v in self._c.items()})
        orders = self._align(other)
        acc: dict[tuple, Fraction] = {}
        b_items = list(other._c.items())
        for ka, va in self._c.items():
            if any(a > o for a, o in zip(ka, orders)):
                continue
            for kb, vb in b_items:
                k = tuple(a + b for a, b in zip(ka, kb))
                if any(e > o for e, o in zip(k, orders)):
                    continue
                acc[k] = acc.get(k, 0) + va * vb
        return FormalSeries(self.variables, orders, acc)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "FormalSeries":
        if e < 0:
            raise ValueError("negative power")
        out = FormalSeries.one(self.variables, self.orders)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, FormalSeries):
            return NotImplemented
        return (self.variables, self.orders, self._c) == (other.variables, other.orders, other._c)

    def _index(self, var) -> int:
        if isinstance(var, int):
            return var
        return self.variables.index(var)

    def derive(self, var=0) -> "FormalSeries":
        """Partial derivative; the truncation order of ``var`` drops by one."""
        i = self._index(var)
        out = {}
        for k, v in self._c.items():
            if k[i]:
                kk = list(k)
                kk[i] -= 1
                out[tuple(kk)] = v * k[i]
        orders = list(self.orders)
        orders[i] = max(orders[i] - 1, 0)
        return FormalSeries(self.variables, orders, out)

    def euler(self, var=0) -> "FormalSeries":
        """``x d/dx``, which keeps the truncation order."""
        i = self._index(var)
        return FormalSeries(self.variables, self.orders, {k: v * k[i] for k, v in self._c.items()})

    def shift(self, var, power: int) -> "FormalSeries":
        """Multiply by ``var**power``."""
        i = self._index(var)
        out = {}
        for k, v in self._c.items():
            kk = list(k)
            kk[i] += power
            out[tuple(kk)] = v
        return FormalSeries(self.variables, self.orders, out)

    def evaluate(self, *point) -> float:
        total = 0.0
        for k, v in self._c.items():
            term = float(v)
            for x, e in zip(point, k):
                term *= x ** e
            total += term
        return total

    def to_json(self) -> dict:
        return {
            "variables": list(self.variables),
            "orders": list(self.orders),
            "coefficients": [
                {"exponents": list(k), "value": str(v)} for k, v in sorted(self._c.items())
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "FormalSeries":
        return cls(
            data["variables"],
            data["orders"],
            {tuple(c["exponents"]): Fraction(c["value"]) for c in data["coefficients"]},
        )

    def __repr__(self) -> str:
        terms = []
        for k, v in sorted(self._c.items()):
            mono = "*".join(
                f"{x}^{e}" if e > 1 else x for x, e in zip(self.variables, k) if e
            )
            terms.append(f"{v}*{mono}" if mono else str(v))
        body = " + ".join(terms) if terms else "0"
        return f"FormalSeries({body}; orders={self.orders})"


def series_arith(a: FormalSeries, b=None, op: str = "add", var=0, exponents=None):
    """Functional front end to ``FormalSeries`` arithmetic.

    ``op`` is one of ``add``, ``mul``, ``derive`` (in ``var``) or ``coeff``
    (at ``exponents``, returning a ``Fraction``).
    """
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "derive":
        return a.derive(var)
    if op == "coeff":
        if exponents is None:
            raise ValueError("coeff needs exponents")
        if isinstance(exponents, int):
            exponents = (exponents,)
        return a.coeff(tuple(exponents))
    raise ValueError(f"unknown series op {op!r}")


# -- 1/n expansions ----------------------------------------------------------


class StandardizedExpansion:
    """Expansion ``sum_p n^{-p} c_p`` with ``c_p`` polynomial in ``v~_{2j}``.

    ``v~_{2j} = v_{2j} / v_2^j``; since ``v~_2 = 1`` the monomials only carry
    indices ``j >= 2``.  ``order`` is the largest ``p`` kept.
    """

    __slots__ = ("_terms", "order")

    def __init__(self, terms: Mapping[int, Mapping[MomentMonomial, object]] | None = None, order: int | None = None):
        clean: dict[int, dict[MomentMonomial, Fraction]] = {}
        for p, poly in (terms or {}).items():
            if order is not None and p > order:
                continue
            row = {}
            for m, c in poly.items():
                if m.exponent(1):
                    m = m.without(1)
                c = Fraction(c)
                if c:
                    row[m] = row.get(m, 0) + c
            row = {m: c for m, c in row.items() if c}
            if row:
                clean[int(p)] = row
        self._terms = clean
        self.order = order

    @property
    def terms(self) -> dict[int, dict[MomentMonomial, Fraction]]:
        return {p: dict(r) for p, r in self._terms.items()}

    def powers(self) -> list[int]:
        return sorted(self._terms)

    def leading_power(self) -> int | None:
        """Smallest ``p`` with a nonzero coefficient (``None`` for zero)."""
        return min(self._terms) if self._terms else None

    def coefficient(self, p: int, mono: MomentMonomial | None = None):
        """Whole coefficient polynomial at ``n^{-p}``, or one monomial of it."""
        row = self._terms.get(p, {})
        if mono is None:
            return dict(row)
        if mono.exponent(1):
            mono = mono.without(1)
        return row.get(mono, Fraction(0))

    def substitute(self, moment) -> dict[int, Fraction]:
        """Plug in standardized moments (``moment(j)`` gives ``v~_{2j}``)."""
        out = {}
        for p, row in self._terms.items():
            val = sum((c * m.evaluate(moment) for m, c in row.items()), Fraction(0))
            if val:
                out[p] = val
        return out

    def shift(self, k: int) -> "StandardizedExpansion":
        """Multiply by ``n^k``."""
        order = None if self.order is None else self.order - k
        return StandardizedExpansion({p - k: r for p, r in self._terms.items()}, order)

    def __add__(self, other: "StandardizedExpansion") -> "StandardizedExpansion":
        acc = {p: dict(r) for p, r in self._terms.items()}
        for p, row in other._terms.items():
            tgt = acc.setdefault(p, {})
            for m, c in row.items():
                tgt[m] = tgt.get(m, 0) + c
        orders = [o for o in (self.order, other.order) if o is not None]
        return StandardizedExpansion(acc, min(orders) if orders else None)

    def __neg__(self) -> "StandardizedExpansion":
        return StandardizedExpansion(
            {p: {m: -c for m, c in r.items()} for p, r in self._terms.items()}, self.order
        )

    def __sub__(self, other: "StandardizedExpansion") -> "StandardizedExpansion":
        return self + (-other)

    def __eq__(self, other) -> bool:
        return isinstance(other, StandardizedExpansion) and self._terms == other._terms

    def to_text(self) -> str:
        if not self._terms:
            return "0"
        lines = []
        for p in sorted(self._terms):
            parts = []
            for m, c in sorted(self._terms[p].items(), key=lambda kv: kv[0].sort_key()):
                body = str(m).replace("v", "v~")
                mag = abs(c)
                if m == ONE:
                    txt = str(mag)
                else:
                    txt = body if mag == 1 else f"{mag}*{body}"
                parts.append(("- " if c < 0 else "+ ") + txt)
            inner = " ".join(parts)
            inner = inner[2:] if inner.startswith("+ ") else "-" + inner[2:]
            lines.append(f"n^-{p}: {inner}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "terms": [
                {"power": p, "monomial": m.to_json(), "coeff": str(c)}
                for p in sorted(self._terms)
                for m, c in sorted(self._terms[p].items(), key=lambda kv: kv[0].sort_key())
            ],
        }

    def __repr__(self) -> str:
        return f"StandardizedExpansion(order={self.order}, terms={self.to_text()!r})"


def _binomial_series(a: int, order: int) -> list[int]:
    """Coefficients of ``(1-u)^{-a}`` up to ``u^order``."""
    if a == 0:
        return [1] + [0] * order
    return [math.comb(a + m - 1, m) for m in range(order + 1)]


@lru_cache(maxsize=None)
def _ff_over_power(s: int) -> tuple[int, ...]:
    """``N_s / n^s`` as a polynomial in ``u = 1/n``."""
    c = ff_power_coefficients(s)
    # N_s = sum_d c_d n^d, so N_s n^{-s} = sum_d c_d u^{s-d}
    out = [0] * (s + 1)
    for d, a in enumerate(c):
        out[s - d] += a
    return tuple(out)


def expand_normalized(p: CorrelatorPolynomial, r: int, k: int, order: int) -> StandardizedExpansion:
    """Expand ``n^{-r} ((n-1) v_2)^{-k/2} p`` in powers of ``1/n``.

    Every monomial of ``p`` must have moment degree ``k/2``.
    """
    if k % 2:
        if p:
            raise ValueError("odd total degree but nonzero polynomial")
        return StandardizedExpansion({}, order)
    half = k // 2
    acc: dict[int, dict[MomentMonomial, Fraction]] = {}
    for (s, m), c in p.terms.items():
        if m.degree != half:
            raise ValueError(f"monomial {m} has degree {m.degree}, expected {half}")
        base = r + half - s  # power of 1/n before the u-series
        room = order - base
        if room < 0:
            continue
        ff = _ff_over_power(s)
        geo = _binomial_series(half, room)
        std = m.without(1)
        for d1, a in enumerate(ff):
            if not a or d1 > room:
                continue
            for d2 in range(room - d1 + 1):
                pw = base + d1 + d2
                row = acc.setdefault(pw, {})
                row[std] = row.get(std, 0) + c * a * geo[d2]
    return StandardizedExpansion(acc, order)


def monomials(max_index: int, degree: int) -> Iterable[MomentMonomial]:
    """All moment monomials of the given degree using indices up to ``max_index``."""
    ranges = [range(degree // j + 1) for j in range(1, max_index + 1)]
    for exps in product(*ranges):
        if sum((j + 1) * e for j, e in enumerate(exps)) == degree:
            yield MomentMonomial({j + 1: e for j, e in enumerate(exps)})
