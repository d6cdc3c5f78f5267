"""Monte Carlo estimates of trace correlators for finite Wigner matrices.

Samples are generated in fixed chunks of ``CHUNK`` matrices; chunk ``c`` is
drawn from a Philox stream keyed by ``(seed, c)``, so any sample can be
reproduced from ``(seed, index)`` alone and batch assignment never depends
on scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .algebra import poly_evaluate
from .correlators import TraceSignature, exact_connected, exact_moment, set_partitions
from .ensemble import EnsembleSpec
from .errors import DegenerateVariance

CHUNK = 256
DISTRIBUTIONS = ("rademacher", "gaussian", "uniform", "two_point", "custom")


@dataclass(frozen=True)
class SamplerConfig:
    """How to draw matrices.

    ``param`` is the variance for ``gaussian``, the half-width for
    ``uniform`` and the magnitude for ``two_point``.  A ``custom``
    distribution needs ``sampler(rng, size)`` plus the exact ``ensemble``.
    """

    n: int
    distribution: str = "rademacher"
    param: float = 1.0
    diagonal_variance: float = 0.0
    samples: int = 100_000
    seed: int = 0
    batch_count: int = 20
    sampler: Callable | None = field(default=None, compare=False)
    ensemble_override: EnsembleSpec | None = None

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.distribution == "custom" and (self.sampler is None or self.ensemble_override is None):
            raise ValueError("custom distribution needs sampler and ensemble_override")
        if self.batch_count < 10 or self.samples < self.batch_count:
            raise ValueError("need samples >= batch_count >= 10")
        if self.n < 2:
            raise ValueError("n must be >= 2")

    def ensemble(self) -> EnsembleSpec:
        """Exact moment sequence of the off-diagonal law."""
        if self.ensemble_override is not None:
            return self.ensemble_override.with_n(self.n)
        p = Fraction(self.param).limit_denominator(10**12)
        if self.distribution == "rademacher":
            return EnsembleSpec.rademacher(n=self.n)
        return EnsembleSpec(self.distribution, p, n=self.n)

    def _draw(self, rng: np.random.Generator, size) -> np.ndarray:
        d = self.distribution
        if d == "rademacher":
            return rng.integers(0, 2, size=size).astype(float) * 2 - 1
        if d == "two_point":
            return (rng.integers(0, 2, size=size).astype(float) * 2 - 1) * self.param
        if d == "gaussian":
            return rng.standard_normal(size) * math.sqrt(self.param)
        if d == "uniform":
            return rng.uniform(-self.param, self.param, size)
        return np.asarray(self.sampler(rng, size), dtype=float)


def _chunk(cfg: SamplerConfig, c: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(key=(cfg.seed % 2**64) + (c << 64)))
    n = cfg.n
    iu = np.triu_indices(n, 1)
    off = cfg._draw(rng, (CHUNK, len(iu[0])))
    mats = np.zeros((CHUNK, n, n))
    mats[:, iu[0], iu[1]] = off
    mats += mats.transpose(0, 2, 1)
    if cfg.diagonal_variance:
        diag = rng.standard_normal((CHUNK, n)) * math.sqrt(cfg.diagonal_variance)
        idx = np.arange(n)
        mats[:, idx, idx] = diag
    return mats


def sample_matrix(cfg: SamplerConfig, index: int) -> np.ndarray:
    """Matrix number ``index`` of the stream defined by ``cfg``."""
    c, i = divmod(index, CHUNK)
    return _chunk(cfg, c)[i]


def sample_block(cfg: SamplerConfig, start: int, stop: int) -> np.ndarray:
    """Matrices ``start .. stop-1`` stacked along axis 0."""
    parts = []
    for c in range(start // CHUNK, (stop - 1) // CHUNK + 1):
        lo, hi = c * CHUNK, (c + 1) * CHUNK
        block = _chunk(cfg, c)
        parts.append(block[max(start, lo) - lo:min(stop, hi) - lo])
    return np.concatenate(parts)


def trace_powers(mats: np.ndarray, powers: Sequence[int]) -> dict[int, np.ndarray]:
    """``tr A^k`` for each requested ``k``, by dense repeated products."""
    top = max(powers)
    out = {}
    cur = mats
    for k in range(1, top + 1):
        if k > 1:
            cur = cur @ mats
        if k in powers:
            out[k] = np.einsum("bii->b", cur)
    return out


def _joint_cumulant(cols: list[np.ndarray]) -> float:
    """Sample joint cumulant of the columns; unbiased for r <= 3."""
    r = len(cols)
    m = len(cols[0])
    if r == 1:
        return float(cols[0].mean())
    centred = [c - c.mean() for c in cols]
    if r == 2:
        return float((centred[0] * centred[1]).sum() / (m - 1))
    if r == 3:
        return float((centred[0] * centred[1] * centred[2]).sum() * m / ((m - 1) * (m - 2)))
    total = 0.0
    for part in set_partitions(range(r)):
        term = float((-1) ** (len(part) - 1) * math.factorial(len(part) - 1))
        for block in part:
            term *= float(np.prod([cols[i] for i in block], axis=0).mean())
        total += term
    return total


@dataclass
class EstimateReport:
    signature: tuple[int, ...]
    connected: bool
    n: int
    distribution: str
    samples: int
    estimate: float
    standard_error: float
    exact_value: Fraction | None
    z_score: float | None
    degenerate: bool = False

    def row(self) -> dict:
        return {
            "signature": ",".join(map(str, self.signature)),
            "connected": self.connected,
            "n": self.n,
            "dist": self.distribution,
            "samples": self.samples,
            "estimate": self.estimate,
            "se": self.standard_error,
            "exact": None if self.exact_value is None else str(self.exact_value),
            "z": self.z_score,
        }


def _trace_table(cfg: SamplerConfig, powers: Sequence[int], block: int = 4096) -> dict[int, np.ndarray]:
    powers = sorted(set(powers))
    cols: dict[int, list[np.ndarray]] = {k: [] for k in powers}
    for start in range(0, cfg.samples, block):
        mats = sample_block(cfg, start, min(start + block, cfg.samples))
        for k, v in trace_powers(mats, powers).items():
            cols[k].append(v)
    return {k: np.concatenate(v) for k, v in cols.items()}


def estimate(sig, cfg: SamplerConfig, connected: bool = True, *, _table=None) -> EstimateReport:
    """Batch-means estimate of ``<prod tr A^{k_i}>`` (or its connected part).

    Each of ``batch_count`` contiguous index ranges yields one estimate; the
    reported value is their mean and the error their standard error.
    """
    sig = TraceSignature.of(sig)
    table = _table if _table is not None else _trace_table(cfg, sig.powers)
    size = cfg.samples // cfg.batch_count
    values = []
    for b in range(cfg.batch_count):
        sl = slice(b * size, (b + 1) * size)
        cols = [table[k][sl] for k in sig.powers]
        if connected:
            values.append(_joint_cumulant(cols))
        else:
            values.append(float(np.prod(cols, axis=0).mean()))
    values = np.asarray(values)
    est = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(len(values)))

    exact = None
    z = None
    degenerate = False
    if cfg.diagonal_variance == 0:
        poly = exact_connected(sig) if connected else exact_moment(sig)
        exact = poly_evaluate(poly, cfg.ensemble())
        if se == 0:
            scale = max(1.0, abs(float(exact)))
            if abs(est - float(exact)) > 1e-9 * scale:
                raise DegenerateVariance(f"zero batch variance for ({sig}) but estimate {est} != exact {exact}")
            z, degenerate = 0.0, True
        else:
            z = (est - float(exact)) / se
    elif se == 0:
        raise DegenerateVariance(f"zero batch variance for ({sig})")
    return EstimateReport(sig.powers, connected, cfg.n, cfg.distribution, cfg.samples, est, se, exact, z, degenerate)


@dataclass
class Scorecard:
    reports: list[EstimateReport]
    threshold: float = 4.0

    @property
    def flagged(self) -> list[EstimateReport]:
        return [r for r in self.reports if r.z_score is not None and abs(r.z_score) > self.threshold]

    @property
    def ok(self) -> bool:
        return not self.flagged

    def to_json(self) -> str:
        return json.dumps([r.row() for r in self.reports], indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        fields = ["signature", "connected", "n", "dist", "samples", "estimate", "se", "exact", "z"]
        w = csv.DictWriter(buf, fieldnames=fields)
        w.writeheader()
        for r in self.reports:
            w.writerow(r.row())
        return buf.getvalue()


def scorecard(signatures, cfg: SamplerConfig, connected: bool = True, threshold: float = 4.0) -> Scorecard:
    """Estimate every signature from one shared set of samples and flag ``|z| > threshold``."""
    sigs = [TraceSignature.of(s) for s in signatures]
    if not sigs:
        return Scorecard([], threshold)
    table = _trace_table(cfg, sorted({k for s in sigs for k in s.powers}))
    return Scorecard([estimate(s, cfg, connected, _table=table) for s in sigs], threshold)
