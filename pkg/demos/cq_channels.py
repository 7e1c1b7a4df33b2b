"""
==============================
Classical-quantum channels
==============================

Qubit ensembles of four linearly independent, full-rank states have an
exact Holevo capacity whenever the reconstructed input weights are
non-negative.
"""

# %%
# A random ensemble that passes the sign check
# --------------------------------------------

import numpy as np

from exactcap import algorithm2, blahut_arimoto_cq, bloch_state, cq_capacity


def random_state(rng):
    v = rng.normal(size=3)
    return bloch_state(rng.uniform(0.05, 0.95) * v / np.linalg.norm(v))


rng = np.random.default_rng(1)
draws = 0
while True:
    draws += 1
    states = [random_state(rng) for _ in range(4)]
    sol = algorithm2(states)
    if sol.valid:
        break
print("found a gate-passing ensemble after %d draws" % draws)
print("exact   %.12f nats" % sol.capacity)
ba, _, trace = blahut_arimoto_cq(states, tol=1e-11)
print("oracle  %.12f nats after %d iterations" % (ba, trace.iterations))
print("step times (s):", {k: "%.1e" % v for k, v in sol.step_times.items()})

# %%
# An ensemble that does not
# -------------------------
#
# Three partially polarized states along x, y, z plus the maximally mixed
# state. The mixed state gets negative weight, so the exact route is not
# available and the report falls back to the iterative value.

tetra = [bloch_state([0.5, 0, 0]), bloch_state([0, 0.5, 0]),
         bloch_state([0, 0, 0.5]), np.eye(2) / 2]
print("weights:", algorithm2(tetra).input_candidate.round(4))
report = cq_capacity(tetra)
print("route %s, capacity %.9f, exact=%s" % (report.route, report.capacity, report.exact))

# %%
# Commuting states
# ----------------
#
# Diagonal states are a classical channel in disguise. They span only the
# diagonal, so four of them are never linearly independent and the driver
# goes straight to the iterative solver.

rows = np.array([[0.9, 0.1], [0.6, 0.4], [0.3, 0.7], [0.05, 0.95]])
from exactcap import CqChannel, capacity  # noqa: E402

report = cq_capacity(CqChannel.from_classical(rows))
print(report.reason)
print("cq %.12f vs classical %.12f" % (report.capacity, capacity(rows).capacity))
