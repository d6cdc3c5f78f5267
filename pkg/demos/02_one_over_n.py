"""1/n expansion of trace moments and the ensemble dependence of its coefficients."""

# %% normalise B = A / sqrt((n-1) v2) and expand <tr B^8 / n>
from wignercorr import EnsembleSpec, ensemble_difference, exact_moment, g_coefficient, normalize_and_expand
from wignercorr.asymptotics import rj_eval, rj_moment

exp = normalize_and_expand(exact_moment(8), (8,), 3)
print(exp.to_text())

# %% g_j coefficients: leading values are binomials, Catalan for j = 1
for j in range(1, 5):
    print(f"g_{j}^(8) limit:", {str(m): str(c) for m, c in g_coefficient(4, j).limit().items()})

# %% two ensembles sharing v2 first differ at order n^(1-j)
g, rad = EnsembleSpec.gaussian(), EnsembleSpec.rademacher()
for k in (2, 4, 6):
    rep = ensemble_difference((k,), g, rad)
    if rep.j is None:
        print(f"<tr B^{k}/n>: identical for both ensembles")
    else:
        print(f"<tr B^{k}/n>: leading n^{rep.power} coefficient {rep.observed} (predicted {rep.predicted})")

# %% the density kernel behind those differences
import numpy as np

y = np.linspace(-1.9, 1.9, 9)
print("R_2(y):", np.round(rj_eval(2, y), 4))
print("moments of R_2:", [round(rj_moment(2, k), 6) for k in range(6)])
