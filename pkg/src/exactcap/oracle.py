"""Blahut-Arimoto iterations, used as an independent reference.

Both solvers start from the uniform input and stop when the standard bound
sandwich closes::

    sum_x Q(x) D(W_x || W.Q)  <=  C(W)  <=  max_x D(W_x || W.Q)

The lower bound reported is the best mutual information seen so far and the
upper bound is the best (smallest) max-divergence seen so far, so both are
monotone along the trace.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import MaxIterExceeded
from .prob import CapacityValue, channel_matrix, row_entropies
from .quantum import CqChannel, LAMBDA_MIN, state_logs

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
DEFAULT_CQ_TOL = 1e-9


@dataclass
class IterationTrace:
    iterations: int = 0
    lower_bound: float = 0.0
    upper_bound: float = np.inf
    elapsed: float = 0.0
    lower_history: list = field(default_factory=list, repr=False)
    upper_history: list = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float:
        return self.upper_bound - self.lower_bound


def _iterate(divergences, n_inputs, tol, max_iter, record):
    """Shared BA loop; ``divergences(q)`` returns ``D(W_x || W.q)`` for all x."""
    start = time.perf_counter()
    trace = IterationTrace()
    q = np.full(n_inputs, 1.0 / n_inputs)
    best_q = q
    lower, upper = -np.inf, np.inf
    for it in range(1, max_iter + 1):
        d = divergences(q)
        info = float(q @ d)
        if info > lower:
            lower, best_q = info, q
        upper = min(upper, float(d.max()))
        if record:
            trace.lower_history.append(lower)
            trace.upper_history.append(upper)
        trace.iterations = it
        if upper - lower <= tol:
            break
        q = q * np.exp(d - d.max())
        q = q / q.sum()
    trace.lower_bound = max(lower, 0.0)
    trace.upper_bound = upper
    trace.elapsed = time.perf_counter() - start
    if upper - lower > tol:
        raise MaxIterExceeded(
            f"gap {upper - lower:.3e} > tol {tol:g} after {max_iter} iterations",
            lower=trace.lower_bound,
            upper=upper,
            input_dist=best_q,
            trace=trace,
        )
    return CapacityValue(trace.lower_bound), best_q, trace


def blahut_arimoto(channel, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
                   record: bool = False):
    """Classical Blahut-Arimoto.

    Parameters
    ----------
    channel : ClassicalChannel or array_like
        Row-stochastic matrix ``W[x, y]``.
    tol : float
        Stop once ``upper - lower <= tol`` (nats).
    max_iter : int
        Iteration cap; exceeding it raises :class:`MaxIterExceeded` with the
        best bounds attached.
    record : bool
        Keep the per-iteration bound history on the trace.

    Returns
    -------
    capacity : CapacityValue
        The lower bound at termination.
    input_dist : ndarray
        Input law attaining that lower bound.
    trace : IterationTrace
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = channel_matrix(channel)
    # outputs no input can produce contribute nothing and would give log 0
    m = m[:, m.sum(axis=0) > 0]
    neg_h = -row_entropies(m)

    def divergences(q):
        return np.maximum(neg_h - m @ np.log(q @ m), 0.0)

    return _iterate(divergences, m.shape[0], tol, max_iter, record)


def blahut_arimoto_cq(cq, tol: float = DEFAULT_CQ_TOL, max_iter: int = DEFAULT_MAX_ITER,
                      record: bool = False):
    """Blahut-Arimoto for a classical-quantum channel (Holevo quantity).

    Every state must be positive definite; otherwise :class:`RankDeficient`
    is raised naming the offending input.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not isinstance(cq, CqChannel):
        cq = CqChannel(tuple(cq))
    states = cq.stacked()
    _, ents = state_logs(states)

    def divergences(q):
        sigma = np.einsum("x,xij->ij", q, states)
        w, u = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
        log_sigma = (u * np.log(np.maximum(w, LAMBDA_MIN))) @ u.conj().T
        cross = np.einsum("xij,ji->x", states, log_sigma).real
        return np.maximum(-ents - cross, 0.0)

    return _iterate(divergences, cq.n_inputs, tol, max_iter, record)


def hybrid_support_detect(channel, mass_cutoff: float = 1e-6, tol: float = DEFAULT_TOL,
                          max_iter: int = DEFAULT_MAX_ITER) -> list:
    """Inputs whose Blahut-Arimoto mass is at least ``mass_cutoff``.

    Used to seed the exact solver with a small input subset instead of
    enumerating all of them.
    """
    m = channel_matrix(channel)
    if not 0 < mass_cutoff < 1.0 / m.shape[0]:
        raise ValueError(f"mass_cutoff must lie in (0, 1/{m.shape[0]})")
    try:
        _, q, _ = blahut_arimoto(m, tol=tol, max_iter=max_iter)
    except MaxIterExceeded as exc:
        q = exc.input_dist
    return [int(i) for i in np.flatnonzero(q >= mass_cutoff)]
