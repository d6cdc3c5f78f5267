"""Golden tables of exact correlators shipped with the package."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Iterator

from .algebra import CorrelatorPolynomial, parse_polynomial
from .correlators import TraceSignature, exact_connected, exact_moment

SUITES = {"appendix-e": "golden_tables.txt"}


@dataclass(frozen=True)
class GoldenEntry:
    kind: str  # "moment" or "connected"
    signature: TraceSignature
    expression: str

    @property
    def expected(self) -> CorrelatorPolynomial:
        return parse_polynomial(self.expression)

    def compute(self, method: str = "checked", threads: int = 1, cache_dir=None) -> CorrelatorPolynomial:
        if self.kind == "moment":
            return exact_moment(self.signature, threads=threads, cache_dir=cache_dir)
        return exact_connected(self.signature, method=method, threads=threads, cache_dir=cache_dir)


def load_suite(name: str = "appendix-e") -> list[GoldenEntry]:
    if name not in SUITES:
        raise KeyError(f"unknown fixture suite {name!r}; have {sorted(SUITES)}")
    text = resources.files("wignercorr").joinpath("data", SUITES[name]).read_text()
    out = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        kind, sig, expr = (part.strip() for part in line.split("|"))
        if kind not in ("moment", "connected"):
            raise ValueError(f"bad fixture kind {kind!r}")
        out.append(GoldenEntry(kind, TraceSignature.of(sig), expr))
    return out


def run_suite(name: str = "appendix-e", **kw) -> Iterator[tuple[GoldenEntry, bool, CorrelatorPolynomial]]:
    """Yield ``(entry, passed, difference)`` comparing term by term."""
    for entry in load_suite(name):
        got = entry.compute(**kw)
        diff = got - entry.expected
        yield entry, diff.is_zero(), diff
