"""
==========
Quickstart
==========

Exact capacities of small classical channels, checked against
Blahut-Arimoto.
"""

# %%
# A binary symmetric channel
# --------------------------
#
# Two linearly independent rows, as many inputs as outputs: one matrix
# inverse gives the capacity and a sign check on the reconstructed input
# certifies it.

import numpy as np

import exactcap as ec

ch = ec.bsc(0.1)
sol = ec.algorithm1(ch)
print("status:", sol.status.value)
print("capacity: %.12f nats = %.12f bits" % (sol.capacity, sol.capacity.bits))
print("optimal input:", sol.input_candidate)

# %%
# The Z-channel
# -------------
#
# Input 1 is noiseless, input 2 is a fair coin. The optimum is lopsided.

z = [[1.0, 0.0], [0.5, 0.5]]
report = ec.capacity(z, oracle=True)
print("capacity %.12f, log(5/4) %.12f" % (report.capacity, np.log(1.25)))
print("input law", report.optimal_input, "oracle", report.oracle_check)

# %%
# When the sign check fails
# -------------------------
#
# Below, the candidate input puts negative weight on some inputs. The driver
# drops them, re-solves, and verifies the answer against every input of the
# original channel. If the reduced support does not pass, it searches
# smaller input sets.

m = np.array([
    [0.6862487, 0.01085633, 0.00124385, 0.30165113],
    [0.2420682, 0.22742852, 0.11217247, 0.41833082],
    [0.45512185, 0.24691091, 0.12748909, 0.17047815],
    [0.01230602, 0.18152386, 0.14410095, 0.66206917],
])
m /= m.sum(axis=1, keepdims=True)
print("reconstructed input:", ec.algorithm1(m).input_candidate.round(3))
report = ec.capacity(m)
print(report.path.describe())
print("capacity %.12f on support %s" % (report.capacity, report.support))
ba, q, _ = ec.blahut_arimoto(m)
print("Blahut-Arimoto %.12f" % ba)

# %%
# More outputs than inputs
# ------------------------
#
# Extra natural parameters are fixed by minimizing the log-partition
# function. When the free directions live on pairs of proportional output
# columns the minimizer has a closed form.

wide = [[0.5, 0.3, 0.2], [0.2, 0.48, 0.32]]
sol = ec.exact_solution(wide)
print("closed form used:", sol.closed_form, "capacity %.12f" % sol.capacity)
