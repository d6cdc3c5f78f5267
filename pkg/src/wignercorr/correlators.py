"""Exact finite-n trace correlators built from walk enumeration.

``exact_moment`` sums ``N_V prod_h v_h^{n_h}`` over paths.  The connected
correlator has two independent routes:

* ``direct`` -- the joint cumulant of the walk monomials is computed path by
  path (cumulants are multilinear, so the trace cumulant is the sum of the
  per-path cumulants) and multiplied by ``N_V``;
* ``partition`` -- Moebius inversion over set partitions of the traces,
  multiplying sub-signature moments in the falling-factorial basis.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path as FsPath
from typing import Iterable, Sequence

from . import __version__
from .algebra import (
    CorrelatorPolynomial,
    MomentMonomial,
    StandardizedExpansion,
    expand_normalized,
)
from .ensemble import EnsembleSpec
from .errors import ConnectedMismatch, MomentOrderViolation
from .walks import DEFAULT_CAP, _check_cap, _dfs, first_walk_prefixes

log = logging.getLogger(__name__)

CACHE_ENV = "WIGNERCORR_CACHE_DIR"


@dataclass(frozen=True)
class TraceSignature:
    """Trace powers ``(k_1, ..., k_r)`` of a product ``tr A^{k_1} ... tr A^{k_r}``."""

    powers: tuple[int, ...]

    def __post_init__(self):
        powers = tuple(int(k) for k in self.powers)
        if not powers or any(k < 1 for k in powers):
            raise ValueError("signature needs r >= 1 positive powers")
        object.__setattr__(self, "powers", powers)

    @classmethod
    def of(cls, sig) -> "TraceSignature":
        if isinstance(sig, TraceSignature):
            return sig
        if isinstance(sig, int):
            return cls((sig,))
        if isinstance(sig, str):
            return cls(tuple(int(x) for x in sig.replace(" ", "").split(",") if x))
        return cls(tuple(sig))

    @property
    def r(self) -> int:
        return len(self.powers)

    @property
    def degree(self) -> int:
        return sum(self.powers)

    def sorted(self) -> "TraceSignature":
        return TraceSignature(tuple(sorted(self.powers, reverse=True)))

    def __str__(self) -> str:
        return ",".join(map(str, self.powers))


# -- set partitions -----------------------------------------------------------


def set_partitions(items: Sequence) -> Iterable[list[list]]:
    """All set partitions of ``items`` (restricted-growth order)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def _mobius(blocks: int) -> int:
    return (-1) ** (blocks - 1) * math.factorial(blocks - 1)


# -- enumeration aggregates ---------------------------------------------------


def _aggregate(lengths: tuple[int, ...], first_walk=None) -> Counter:
    """Count completed even paths by ``(V, sorted per-edge per-walk counts)``."""
    r = len(lengths)
    acc: Counter = Counter()
    for st in _dfs(lengths, True, first_walk):
        if r == 1:
            key = (st.nv, tuple(sorted(st.total.values())))
        else:
            pw = st.per_walk
            key = (st.nv, tuple(sorted(tuple(w.get(e, 0) for w in pw) for e in st.total)))
        acc[key] += 1
    return acc


def _aggregate_chunk(args) -> Counter:
    lengths, prefixes = args
    acc: Counter = Counter()
    for pre in prefixes:
        acc.update(_aggregate(lengths, pre))
    return acc


def _enumerate_aggregate(lengths: tuple[int, ...], threads: int = 1) -> Counter:
    if threads <= 1 or len(lengths) == 1:
        return _aggregate(lengths)
    prefixes = first_walk_prefixes(lengths)
    chunks = [prefixes[i::threads] for i in range(threads)]
    acc: Counter = Counter()
    with ProcessPoolExecutor(max_workers=threads) as pool:
        # merge in fixed chunk order; integer sums make the result order-free
        for part in pool.map(_aggregate_chunk, [(lengths, c) for c in chunks]):
            acc.update(part)
    return acc


def _mono_from_counts(counts: Iterable[int]) -> MomentMonomial | None:
    """``prod v_h`` over edge run counts; ``None`` if any count is odd."""
    exps: dict[int, int] = {}
    for h in counts:
        if h == 0:
            continue
        if h % 2:
            return None
        exps[h // 2] = exps.get(h // 2, 0) + 1
    return MomentMonomial(exps)


def _cumulant_terms(edge_vectors: tuple[tuple[int, ...], ...], r: int) -> dict[MomentMonomial, int]:
    """Joint cumulant of the walk monomials of one path, as moment monomials."""
    out: dict[MomentMonomial, int] = {}
    for part in set_partitions(range(r)):
        mono = MomentMonomial()
        for block in part:
            m = _mono_from_counts(sum(vec[i] for i in block) for vec in edge_vectors)
            if m is None:
                break
            mono = mono * m
        else:
            w = _mobius(len(part))
            out[mono] = out.get(mono, 0) + w
    return {m: c for m, c in out.items() if c}


# -- caching -------------------------------------------------------------------


@dataclass
class _Cache:
    memory: dict = field(default_factory=dict)

    def directory(self, cache_dir) -> FsPath | None:
        d = cache_dir or os.environ.get(CACHE_ENV)
        return FsPath(d) if d else None

    def key(self, kind: str, sig: TraceSignature, cap: int) -> str:
        raw = f"{kind}|{sig}|cap={cap}|v={__version__}"
        return hashlib.sha256(raw.encode()).hexdigest()[:32]

    def get(self, kind, sig, cap, cache_dir):
        k = self.key(kind, sig, cap)
        if k in self.memory:
            return self.memory[k]
        d = self.directory(cache_dir)
        if d is not None:
            f = d / f"{kind}-{k}.json"
            if f.exists():
                data = json.loads(f.read_text())
                poly = CorrelatorPolynomial.from_json(data["terms"])
                self.memory[k] = poly
                return poly
        return None

    def put(self, kind, sig, cap, cache_dir, poly, meta):
        k = self.key(kind, sig, cap)
        self.memory[k] = poly
        d = self.directory(cache_dir)
        if d is not None:
            d.mkdir(parents=True, exist_ok=True)
            tmp = d / f"{kind}-{k}.{os.getpid()}.tmp"
            tmp.write_text(json.dumps(to_report(sig, poly, meta)))
            tmp.replace(d / f"{kind}-{k}.json")


_CACHE = _Cache()


def clear_memory_cache() -> None:
    _CACHE.memory.clear()


def to_report(sig, poly: CorrelatorPolynomial, meta: dict | None = None, kind: str = "moment") -> dict:
    """JSON document for a correlator (see ``schemas/correlator.schema.json``)."""
    return {
        "signature": list(TraceSignature.of(sig).powers),
        "kind": kind,
        "representation": "exact",
        "text": poly.to_text(),
        "terms": poly.to_json(),
        "metadata": dict(meta or {}),
    }


# -- public operations --------------------------------------------------------


def exact_moment(
    sig,
    *,
    cap: int | None = None,
    threads: int = 1,
    use_cache: bool = True,
    cache_dir=None,
    metadata: dict | None = None,
) -> CorrelatorPolynomial:
    """``<tr A^{k_1} ... tr A^{k_r}>`` in the falling-factorial basis.

    Valid for every ``n >= 1``; the ``N_s`` factors vanish for ``s > n``.
    """
    sig = TraceSignature.of(sig)
    cap = DEFAULT_CAP if cap is None else cap
    _check_cap(sig.degree, cap)
    key_sig = sig.sorted()  # the moment is symmetric in the traces
    if use_cache:
        hit = _CACHE.get("moment", key_sig, cap, cache_dir)
        if hit is not None:
            if metadata is not None:
                metadata.update(cached=True)
            return hit
    t0 = time.perf_counter()
    agg = _enumerate_aggregate(key_sig.powers if use_cache else sig.powers, threads)
    terms: dict = {}
    for (V, counts), num in agg.items():
        if len(sig.powers) > 1:
            counts = tuple(sum(vec) for vec in counts)
        mono = _mono_from_counts(counts)
        if mono is None:
            continue
        terms[(V, mono)] = terms.get((V, mono), 0) + num
    poly = CorrelatorPolynomial(terms)
    meta = {"path_count": sum(agg.values()), "wall_time": time.perf_counter() - t0}
    if metadata is not None:
        metadata.update(meta)
    if use_cache:
        _CACHE.put("moment", key_sig, cap, cache_dir, poly, meta)
    return poly


def connected_direct(sig, *, cap=None, threads: int = 1, metadata: dict | None = None) -> CorrelatorPolynomial:
    """Connected correlator from per-path joint cumulants."""
    sig = TraceSignature.of(sig)
    _check_cap(sig.degree, cap)
    t0 = time.perf_counter()
    agg = _enumerate_aggregate(sig.powers, threads)
    r = sig.r
    terms: dict = {}
    for (V, vectors), num in agg.items():
        if r == 1:
            mono = _mono_from_counts(vectors)
            contrib = {mono: 1} if mono is not None else {}
        else:
            contrib = _cumulant_terms(vectors, r)
        for mono, c in contrib.items():
            terms[(V, mono)] = terms.get((V, mono), 0) + c * num
    if metadata is not None:
        metadata.update(path_count=sum(agg.values()), wall_time=time.perf_counter() - t0)
    return CorrelatorPolynomial(terms)


def connected_partition(sig, *, cap=None, threads: int = 1, use_cache: bool = True, cache_dir=None) -> CorrelatorPolynomial:
    """Connected correlator by Moebius inversion over set partitions of the traces."""
    sig = TraceSignature.of(sig)
    r = sig.r
    moments: dict[tuple[int, ...], CorrelatorPolynomial] = {}

    def mom(block) -> CorrelatorPolynomial:
        ks = tuple(sorted((sig.powers[i] for i in block), reverse=True))
        if ks not in moments:
            moments[ks] = exact_moment(ks, cap=cap, threads=threads, use_cache=use_cache, cache_dir=cache_dir)
        return moments[ks]

    total = CorrelatorPolynomial()
    for part in set_partitions(range(r)):
        factors = [mom(b) for b in part]
        if any(f.is_zero() for f in factors):
            continue
        prod = CorrelatorPolynomial.constant(_mobius(len(part)))
        for f in factors:
            prod = prod * f
        total = total + prod
    return total


def exact_connected(
    sig,
    *,
    method: str = "direct",
    cap: int | None = None,
    threads: int = 1,
    use_cache: bool = True,
    cache_dir=None,
    metadata: dict | None = None,
) -> CorrelatorPolynomial:
    """``<tr A^{k_1} ... tr A^{k_r}>_c``.

    ``method`` is ``direct``, ``partition`` or ``checked`` (both, raising
    ``ConnectedMismatch`` if they differ).
    """
    sig = TraceSignature.of(sig)
    cap = DEFAULT_CAP if cap is None else cap
    _check_cap(sig.degree, cap)
    if sig.r == 1:
        return exact_moment(sig, cap=cap, threads=threads, use_cache=use_cache, cache_dir=cache_dir, metadata=metadata)
    if method == "partition":
        return connected_partition(sig, cap=cap, threads=threads, use_cache=use_cache, cache_dir=cache_dir)
    if method not in ("direct", "checked"):
        raise ValueError(f"unknown method {method!r}")
    key_sig = sig.sorted()
    poly = _CACHE.get("connected", key_sig, cap, cache_dir) if use_cache else None
    if poly is None:
        meta: dict = {}
        poly = connected_direct(key_sig if use_cache else sig, cap=cap, threads=threads, metadata=meta)
        if metadata is not None:
            metadata.update(meta)
        if use_cache:
            _CACHE.put("connected", key_sig, cap, cache_dir, poly, meta)
    if method == "checked":
        other = connected_partition(sig, cap=cap, threads=threads, use_cache=use_cache, cache_dir=cache_dir)
        if other != poly:
            raise ConnectedMismatch(f"routes disagree for ({sig}): {poly} vs {other}")
    return poly


def representation_note(sig, n: int) -> str:
    """Flag evaluations at small ``n`` where every walk length is not yet realisable."""
    sig = TraceSignature.of(sig)
    return "exact" if n > sig.degree else "extrapolated per representation"


# -- normalisation and 1/n expansion -------------------------------------------


def normalize_and_expand(p: CorrelatorPolynomial, sig, order: int | None = None) -> StandardizedExpansion:
    """Expand ``<prod tr(B^{k_i})/n>`` with ``B = A / sqrt((n-1) v_2)`` in ``1/n``.

    Coefficients are polynomials in ``v~_{2j} = v_{2j}/v_2^j``.  Terms with
    power of ``1/n`` above ``order`` are dropped.
    """
    sig = TraceSignature.of(sig)
    if order is None:
        order = sig.degree // 2 + 2 * sig.r
    return expand_normalized(p, sig.r, sig.degree, order)


@dataclass(frozen=True)
class GCoefficient:
    """``g_j^{(2k)} = n^{j-2} F_j / ((n-1)^k v_2^k)`` for one ``(k, j)``."""

    k: int
    j: int
    F: CorrelatorPolynomial
    expansion: StandardizedExpansion

    def limit(self) -> dict[MomentMonomial, Fraction]:
        """Large-``n`` limit as a polynomial in standardized moments."""
        return self.expansion.coefficient(0)

    def evaluate(self, ensemble: EnsembleSpec, n: int | None = None) -> Fraction:
        n = ensemble.n if n is None else n
        val = self.F.evaluate(n, ensemble.v)
        return Fraction(n) ** (self.j - 2) * val / (Fraction(n - 1) ** self.k * ensemble.v2**self.k)


def g_coefficient(k: int, j: int, n: int | None = None, ensemble: EnsembleSpec | None = None, *, order: int | None = None):
    """The ``g_j^{(2k)}`` term of the single-trace moment ``<tr A^{2k}>``.

    ``F_j`` collects the terms whose highest moment index is ``j``.  With
    ``n`` and ``ensemble`` given the exact value is returned; otherwise a
    ``GCoefficient`` carrying the ``1/n`` expansion.
    """
    if not 1 <= j <= k:
        raise ValueError("need 1 <= j <= k")
    full = exact_moment((2 * k,))
    F = full.split_by_highest_moment().get(j, CorrelatorPolynomial())
    if order is None:
        order = k
    # normalize_and_expand gives n^{-1} (n-1)^{-k} v2^{-k} F; multiply by n^{j-1}
    exp = normalize_and_expand(F, (2 * k,), order + j - 1).shift(j - 1)
    g = GCoefficient(k, j, F, exp)
    if n is None:
        return g
    if ensemble is None:
        raise ValueError("numeric g needs an ensemble")
    return g.evaluate(ensemble, n)


# -- ensemble differences -------------------------------------------------------


@dataclass
class DifferenceReport:
    signature: TraceSignature
    j: int | None
    exact: dict[int, Fraction]  # s -> coefficient of N_s / (n^r ((n-1) v2)^{k/2})
    expansion: dict[int, Fraction]  # power of 1/n -> value
    power: int | None
    predicted: Fraction
    observed: Fraction
    lower_orders_vanish: bool

    @property
    def match(self) -> bool:
        return self.predicted == self.observed and self.lower_orders_vanish

    def evaluate(self, n: int, v2) -> Fraction:
        """Exact difference of the normalised correlators at order ``n``."""
        from .algebra import ff_evaluate

        k = self.signature.degree
        r = self.signature.r
        num = sum((c * ff_evaluate(s, n) for s, c in self.exact.items()), Fraction(0))
        scale = Fraction(n) ** r * (Fraction(n - 1) * Fraction(v2)) ** Fraction(k, 2) if k % 2 == 0 else None
        if scale is None:
            return Fraction(0)
        return num / scale


def first_differing_moment(e1: EnsembleSpec, e2: EnsembleSpec, upto: int) -> int | None:
    for m in range(1, upto + 1):
        if e1.v(m) != e2.v(m):
            return m
    return None


def _predicted_difference(sig: TraceSignature, j: int, dv: Fraction) -> tuple[int, Fraction]:
    r = sig.r
    if r == 1:
        k2 = sig.powers[0]
        if k2 % 2:
            return 1 - j, Fraction(0)
        return 1 - j, math.comb(k2, k2 // 2 - j) * dv if k2 // 2 >= j else Fraction(0)
    if any(m % 2 for m in sig.powers):
        return 2 - r - j, Fraction(0)
    total = 0
    for js in _compositions(j, [m // 2 for m in sig.powers]):
        prod = 1
        for m, ji in zip(sig.powers, js):
            prod *= math.comb(m, m // 2 - ji)
        total += prod
    return 2 - r - j, 2 ** (r - 1) * total * dv


def _compositions(total: int, caps: Sequence[int]):
    """Tuples ``(j_1..j_r)`` with ``1 <= j_i <= caps[i]`` summing to ``total``."""
    if not caps:
        if total == 0:
            yield ()
        return
    for first in range(1, min(caps[0], total) + 1):
        for rest in _compositions(total - first, caps[1:]):
            yield (first,) + rest


def ensemble_difference(sig, e1: EnsembleSpec, e2: EnsembleSpec, j: int | None = None) -> DifferenceReport:
    """Exact difference of normalised (connected) correlators between two ensembles.

    The leading term is compared with ``n^{1-j} C(2k, k-j) dv`` for one trace
    and with ``2^{r-1} n^{2-r-j} dv sum prod C(m_i, m_i/2 - j_i)`` otherwise,
    ``dv`` being the standardized difference of ``v_{2j}``.
    """
    sig = TraceSignature.of(sig)
    k = sig.degree
    half = k // 2
    first = first_differing_moment(e1, e2, max(half, 1))
    if e1.v2 != e2.v2:
        raise MomentOrderViolation("ensembles must share v2")
    if j is None:
        j = first
    elif first is not None and first < j:
        raise MomentOrderViolation(f"ensembles already differ at v{2 * first} < v{2 * j}")
    elif e1.v(j) == e2.v(j):
        raise MomentOrderViolation(f"ensembles agree at v{2 * j}")
    p = exact_connected(sig)
    v2 = e1.v2
    exact: dict[int, Fraction] = {}
    if k % 2 == 0:
        for (s, m), c in p.terms.items():
            d = c * (m.evaluate(e1.v) - m.evaluate(e2.v)) / v2**half
            if d:
                exact[s] = exact.get(s, 0) + d
        exact = {s: c for s, c in exact.items() if c}
    if j is None:
        return DifferenceReport(sig, None, exact, {}, None, Fraction(0), Fraction(0), not exact)
    power_n, predicted = _predicted_difference(sig, j, (e1.v(j) - e2.v(j)) / v2**j)
    p_inv = -power_n
    exp = normalize_and_expand(p, sig, max(p_inv, 0) + 2)
    d1 = exp.substitute(e1.standardized)
    d2 = exp.substitute(e2.standardized)
    diff = {q: d1.get(q, 0) - d2.get(q, 0) for q in set(d1) | set(d2)}
    diff = {q: Fraction(v) for q, v in diff.items() if v}
    observed = diff.get(p_inv, Fraction(0))
    lower = all(q >= p_inv for q in diff)
    return DifferenceReport(sig, j, exact, diff, power_n, predicted, observed, lower)
