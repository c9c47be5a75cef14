"""
Order does not matter
=====================

Unconditional convergence means any ordering of the modes, and any choice
of orthonormal basis inside each eigenspace, gives the same limit with the
same control on the error.  We shuffle the modes of a field and rotate the
eigenspaces of the Laplacian.
"""

# %%
import numpy as np

from eigenlab import NormSpec, PowerLog, eigenspace_rotation_stress, rearrangement_stress, synthesize_member
from eigenlab.convergence import prefix_errors

alpha = PowerLog(0.75)
f = synthesize_member(alpha, 2, 0.25, 32, seed=7)

# %% [markdown]
# In L2 the index-set bound has only exactly computable constants, so a
# violation would be a bug.

# %%
report = rearrangement_stress(f, NormSpec("L2"), alpha, m=2, trials=50, seed=1)
print(report.to_text())

# %% [markdown]
# The ball ordering against one random ordering, both in L2.

# %%
ball = prefix_errors(f, np.arange(len(f)), NormSpec("L2"))
shuffled = prefix_errors(f, np.random.default_rng(0).permutation(len(f)), NormSpec("L2"))
for k in (0, 100, 1000, 3000, len(f)):
    print(k, round(ball[k], 6), round(shuffled[k], 6))

# %% [markdown]
# The level ``|j|**2 = 25`` on the 2-torus holds twelve modes.  Rotating each
# level by a random unitary leaves the projection unchanged.

# %%
print(eigenspace_rotation_stress(f, seed=11))
