"""
Trigonometric polynomials on the torus
======================================

Fields are stored by their Fourier coefficients against the orthonormal
exponentials.  Norms are measured either from the coefficients (L2 and the
Hormander norm) or from samples on an oversampled FFT grid.
"""

# %%
import numpy as np

from eigenlab import NormSpec, PowerLog, hoermander_norm, measure_norm, modes_in_ball, synthesize_member
from eigenlab.lattice import evaluate_on_grid, weyl_count_ratio

# %% [markdown]
# Lattice points in a ball grow like its volume.

# %%
print(len(modes_in_ball(2, 10)))
for n, lam in ((1, 100), (2, 100), (3, 30)):
    print(n, lam, round(weyl_count_ratio(n, lam), 5))

# %% [markdown]
# A member of the Hormander space with weight ``t**0.75``: the coefficients
# decay just fast enough for the weighted sum to stay bounded as R grows.

# %%
alpha = PowerLog(0.75)
for R in (8, 16, 32, 64):
    f = synthesize_member(alpha, 2, 0.25, R, seed=7)
    print(R, len(f), round(hoermander_norm(f, alpha), 4))

# %% [markdown]
# Parseval against quadrature, and a few other norms of the same field.

# %%
f = synthesize_member(alpha, 2, 0.25, 16, seed=7)
for spec in (NormSpec("L2"), NormSpec("Lp", p=2), NormSpec("Lp", p=4), NormSpec("Cl"), NormSpec("Cl", ell=1)):
    print(f"{spec.kind:<3} p={spec.p:<4} ell={spec.ell}  {measure_norm(f, spec):.10f}")

# %%
G = 4 * 16 + 1
gap = evaluate_on_grid(f, G, "fft") - evaluate_on_grid(f, G, "direct")
print("fft vs direct:", np.abs(gap).max())
