"""Exact trace moments from walk enumeration, checked against sampled matrices."""

# %% walks behind <tr A^4>
import numpy as np

from wignercorr import EnsembleSpec, enumerate_single, exact_connected, exact_moment, poly_evaluate, profile
from wignercorr.montecarlo import SamplerConfig, sample_block, trace_powers

for w in enumerate_single(4):
    prof = profile(w)
    print(f"{str(w):20s} V={prof.V} edges run {sorted(prof.edge_multiplicities.values())}")

# %% the polynomial: one N_V per vertex count, one moment per edge
p4 = exact_moment(4)
print("<tr A^4>     =", p4.to_text())
print("<tr A^6>     =", exact_moment(6).to_text())
print("<trA^2 trA^2>_c =", exact_connected((2, 2)).to_text())

# %% evaluate for a Gaussian ensemble and compare with a quick sample
n = 10
ens = EnsembleSpec.gaussian(n=n)
exact = float(poly_evaluate(p4, ens))
cfg = SamplerConfig(n=n, distribution="gaussian", samples=20_000, seed=1)
mats = sample_block(cfg, 0, cfg.samples)
tr4 = trace_powers(mats, [4])[4]
print(f"n={n}: exact {exact:.2f}, sampled {tr4.mean():.2f} +- {tr4.std() / np.sqrt(len(tr4)):.2f}")
