"""
=====================
A four-input family
=====================

Four inputs and three outputs, with rows::

    (1-e, 0, e)   (0, 1-e, e)   (1/2, 1/2, 0)   (1/2-e, 1/2-e, 2e)

The capacity follows three closed forms as ``e`` moves through (0, 1/2).
This script reproduces the switch points and compares the closed forms
with the general solver.
"""

# %%
# Switch points
# -------------

import numpy as np

from exactcap import capacity
from exactcap.family import (
    achievable_candidates,
    branch_label,
    candidate_capacities,
    epsilon_family_channel,
    gate_functions,
    qhat_inputs_234,
    qhat_limit_check,
    thresholds,
)

th = thresholds()
print("input 3 of {1,2,3} becomes non-negative at e = %.6f" % th.g1)
print("input 2 of {2,3,4} turns negative at        e = %.6f" % th.qhat)
print("input 4 of {1,2,4} becomes non-negative at e = %.6f (3/7 = %.6f)" % (th.g2, 3 / 7))

# %%
# Scan
# ----
#
# ``capacity`` knows nothing about the closed forms; it searches input
# subsets and certifies the first one that passes.

print("%6s %10s %10s %10s %10s  %s" % ("e", "C*", "C4", "C**", "solver", "branch"))
for eps in np.linspace(0.05, 0.45, 9):
    c = candidate_capacities(eps)
    report = capacity(epsilon_family_channel(eps))
    print("%6.3f %10.6f %10.6f %10.6f %10.6f  %s" % (
        eps, c.c_star, c.c4, c.c_dstar, report.capacity, branch_label(eps)))

# %%
# Why not simply take the largest formula?
# ----------------------------------------
#
# ``C4`` is larger than ``C*`` everywhere, but below the first switch point it
# belongs to an input set that would need a negative weight. Only formulas
# whose subset passes the sign check are capacities of that subset.

eps = 0.2
print("all formulas:", {k: round(v, 6) for k, v in vars(candidate_capacities(eps)).items()
                         if k.startswith("c")})
print("achievable:  ", {k: round(v, 6) for k, v in achievable_candidates(eps).items()})
print("gate values g1, g2, g3:", np.round(gate_functions(eps), 4))

# %%
# Small-e limit of the {2,3,4} weights
# ------------------------------------

computed, limit = qhat_limit_check(1e-4)
print("computed", computed.round(6))
print("limit   ", limit.round(6))
print("closed form at e=0.01:", qhat_inputs_234(0.01).round(6))
