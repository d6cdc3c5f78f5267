"""Exact and Monte Carlo trace correlators of Wigner random matrices."""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    CorrelatorPolynomial,
    FormalSeries,
    MomentMonomial,
    StandardizedExpansion,
    ff_evaluate,
    parse_polynomial,
    poly_evaluate,
    series_arith,
)
from .ensemble import EnsembleSpec  # noqa: E402
from .walks import (  # noqa: E402
    Path,
    PathProfile,
    Walk,
    edge_connected_components,
    enumerate_multi,
    enumerate_single,
    profile,
)
from .correlators import (  # noqa: E402
    TraceSignature,
    ensemble_difference,
    exact_connected,
    exact_moment,
    g_coefficient,
    normalize_and_expand,
)

__all__ = [
    "CorrelatorPolynomial",
    "EnsembleSpec",
    "FormalSeries",
    "MomentMonomial",
    "Path",
    "PathProfile",
    "StandardizedExpansion",
    "TraceSignature",
    "Walk",
    "edge_connected_components",
    "ensemble_difference",
    "enumerate_multi",
    "enumerate_single",
    "exact_connected",
    "exact_moment",
    "ff_evaluate",
    "g_coefficient",
    "normalize_and_expand",
    "parse_polynomial",
    "poly_evaluate",
    "profile",
    "series_arith",
]
