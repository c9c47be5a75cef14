"""
O-regularly varying weights
===========================

A smoothness weight only has to grow between two powers of ``t``.  The
exponents of those powers are the Matuszewska indices; here we estimate them
for a pure power, a power times a logarithm and a weight whose log-derivative
switches between two levels.
"""

# %%
import numpy as np

from eigenlab import OscillatingGamma, PowerLog, estimate_indices
from eigenlab.or_functions import check_or_bounds

weights = {
    "t^1.5": PowerLog(1.5),
    "t log^2 t": PowerLog(1.0, (2.0,)),
    "oscillating r=0.5, s=1": OscillatingGamma(0.5, 1.0),
}

# %% [markdown]
# A pure power gives both indices exactly.  The logarithm is invisible in the
# limit but not on a short range: at ``t_max = 1e6`` it still tilts the slopes.

# %%
for name, alpha in weights.items():
    for t_max in (1e6, 1e300):
        est = estimate_indices(alpha, t_max=t_max)
        print(f"{name:<24} t_max={t_max:8.0e}  s_lo={est.s_lo:.3f}  s_hi={est.s_hi:.3f}")

# %% [markdown]
# The oscillating weight fails at ``t_max = 1e300``: the default window of
# ``lambda`` grows with ``t_max`` and ends up far longer than any single piece
# of ``gamma``, so both envelopes only see the mean rate 0.75 and the two
# fitted slopes can even cross.  A fixed short window recovers ``r`` and ``s``.

# %%
window = np.geomspace(2, 30, 10)
for t_max in (1e6, 1e300):
    est = estimate_indices(weights["oscillating r=0.5, s=1"], t_max=t_max, lambda_grid=window)
    print(f"t_max={t_max:8.0e}  s_lo={est.s_lo:.3f}  s_hi={est.s_hi:.3f}")

# %% [markdown]
# The oscillating weight is squeezed between ``t**0.5`` and ``t**1`` up to
# constants, but no single power fits it.

# %%
osc = weights["oscillating r=0.5, s=1"]
print(check_or_bounds(osc, 0.5, 0.01, 1.0, 100.0, t_max=1e5))
print(check_or_bounds(osc, 0.75, 0.01, 0.75, 100.0, t_max=1e5).violation)

t = np.geomspace(1, 1e6, 7)
print(np.round(np.log(osc(t)) / np.log(t.clip(2)), 3))
