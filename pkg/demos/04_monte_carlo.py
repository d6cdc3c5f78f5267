"""Monte Carlo scorecard: finite-n sampling against the exact polynomials."""

# %%
from wignercorr.montecarlo import SamplerConfig, scorecard

sigs = [(2,), (4,), (2, 2), (4, 2), (3, 3)]
for dist in ("rademacher", "gaussian", "uniform"):
    cfg = SamplerConfig(n=12, distribution=dist, samples=20_000, seed=2026)
    card = scorecard(sigs, cfg)
    print(dist)
    for r in card.reports:
        print(f"  {r.signature}: {r.estimate:10.3f} +- {r.standard_error:7.3f}  exact {float(r.exact_value):10.3f}  z={r.z_score:+.2f}")
