"""
A finite two-norm model
=======================

A diagonal operator on ``C^M`` with the Hilbert norm and a weighted ``l^q``
norm.  Every quantity in the error estimate is computable, so the estimate
can be checked exactly on random data.
"""

# %%
import math

import numpy as np

from eigenlab import DiagonalModel, master_estimate_check, operator_norm_R
from eigenlab.abstract_model import dump_case, net_convergence_trace, random_case

model = DiagonalModel(eigenvalues=[1, 2, 2, 3], weights=[1.0, 2.0, 0.5, 1.0], q=1.5)
sym = model.symbols(lambda lam: 1 / lam, lambda lam: 1 / lam ** 2)
g = np.array([1.0, -2.0, 0.5j, 3.0])
print(operator_norm_R(model, sym))
for ups in ([], [0], [0, 1, 2], [0, 1, 2, 3]):
    print(ups, master_estimate_check(model, sym, g, ups))

# %% [markdown]
# A thousand random configurations, with repeated eigenvalues, empty and full
# index sets and ``q`` in {1.2, 2, 3, inf}.

# %%
rng = np.random.default_rng(1)
worst = 0.0
for _ in range(1000):
    m, s, gg, u = random_case(rng)
    est = master_estimate_check(m, s, gg, u)
    assert est.passed, dump_case(m, s, gg, u)
    if est.rhs > 0:
        worst = max(worst, est.lhs / est.rhs)
print("worst lhs/rhs:", worst)

# %%
order = rng.permutation(4)
print(net_convergence_trace(model, g, [order[:k] for k in range(5)]))
print(math.isclose(net_convergence_trace(model, g, [[], [0, 1, 2, 3]])[0], 1.0))
