"""Leading connected two-point correlator: series, exact tables and closed form."""

# %% coefficients of C2 against exact enumeration
from wignercorr import asymptotics as asy

tp = asy.two_point_leading(8)
for m1, m2 in [(2, 2), (3, 3), (4, 2), (4, 4), (5, 3)]:
    series = {str(k): str(v) for k, v in tp.coefficient(m1, m2).items()}
    exact = {str(k): str(v) for k, v in asy.exact_two_point_leading(m1, m2).items()}
    print(f"({m1},{m2}) series {series}  exact {exact}")

# %% resummed form outside the cut, with and without a diagonal
import numpy as np

y = np.array([2.5, 3.0, 5.0])
print("n^2 G_c(y, 3.5), v~4=1:", asy.gc2(y, 3.5, 1.0))
print("diagonal variance 2 v2:", asy.gc2(y, 3.5, 1.0, 2.0), "vs", asy.gc2_kkp(y, 3.5, 1.0))
