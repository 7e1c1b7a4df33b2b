"""Exact capacity of classical-quantum channels with ``n2**2`` inputs.

Same construction as the classical square case, carried out in the real
``n2**2``-dimensional space of Hermitian matrices: invert the matrix of
vectorized states to get observables ``A_j`` with ``Tr(W_i A_j) = delta_ij``,
set ``theta_i = H(W_last) - H(W_i)``, form ``rho = exp(sum_j A_j theta_j - phi)``
and read off ``Qhat(x) = Tr(rho A_x)``. Non-negative ``Qhat`` certifies
``phi - H(W_last)`` as the Holevo capacity.

There is no support-reduction step here; a failed sign gate falls back to
the iterative solver and says so in the report.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import MaxIterExceeded, SingularChannel
from .exact import KAPPA_MIN, TAU_EQ, TAU_GATE, TAU_LIN, Status
from .oracle import DEFAULT_CQ_TOL, DEFAULT_MAX_ITER, blahut_arimoto_cq
from .prob import CapacityValue
from .quantum import CqChannel, state_logs, unvectorize, vectorize


@dataclass
class CqExactSolution:
    capacity: CapacityValue
    theta: np.ndarray
    phi: float
    sigma_star: np.ndarray
    input_candidate: np.ndarray
    status: Status
    negative: tuple = ()
    observables: Optional[np.ndarray] = field(default=None, repr=False)
    step_times: dict = field(default_factory=dict)

    @property
    def valid(self) -> bool:
        return self.status is Status.VALID

    def log_sigma(self) -> np.ndarray:
        """``log rho_theta`` straight from the generator, finite even when ``rho`` underflows."""
        gen = np.einsum("j,jab->ab", self.theta, self.observables[:-1])
        return gen - self.phi * np.eye(gen.shape[0])


@dataclass
class CqCapacityReport:
    capacity: CapacityValue
    optimal_input: np.ndarray
    sigma: np.ndarray
    route: str
    exact: bool
    verification_gap: float
    gate_status: Optional[Status] = None
    negative: tuple = ()
    subset: Optional[tuple] = None
    oracle_check: Optional[float] = None
    reason: str = ""


def _as_cq(cq) -> CqChannel:
    return cq if isinstance(cq, CqChannel) else CqChannel(tuple(cq))


def _observable_vectors(cq: CqChannel) -> np.ndarray:
    n = cq.dim
    if cq.n_inputs != n * n:
        raise ValueError(f"need exactly {n * n} states for dimension {n}, got {cq.n_inputs}")
    v = np.array([vectorize(s) for s in cq.states])
    s = np.linalg.svd(v, compute_uv=False)
    if s[-1] <= KAPPA_MIN * s[0]:
        raise SingularChannel(
            f"vectorized states are linearly dependent (reciprocal condition {s[-1] / s[0]:.2e})"
        )
    a = np.linalg.inv(v)
    if np.max(np.abs(v @ a - np.eye(len(v)))) > TAU_LIN:
        raise SingularChannel("observable basis residual exceeds tolerance")
    return a


def build_observable_basis(cq) -> list:
    """Hermitian ``A_1..A_{n^2}`` with ``Tr(W_i A_j) = delta_ij``."""
    a = _observable_vectors(_as_cq(cq))
    return [unvectorize(a[:, j]) for j in range(a.shape[1])]


def algorithm2(cq) -> CqExactSolution:
    """Exact Holevo-capacity candidate for ``n**2`` linearly independent states.

    Raises
    ------
    SingularChannel
        States are not linearly independent as Hermitian matrices.
    RankDeficient
        Some state is not positive definite; ``exc.index`` names it.
    """
    cq = _as_cq(cq)
    times = {}
    t0 = time.perf_counter()
    _, ents = state_logs(cq.states)
    a = _observable_vectors(cq)
    times["basis"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    theta = ents[-1] - ents[:-1]
    times["theta"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    generator = unvectorize(a[:, :-1] @ theta)
    w, u = np.linalg.eigh(generator)
    phi = float(logsumexp(w))
    rho = (u * np.exp(w - phi)) @ u.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    times["phi"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    qhat = vectorize(rho) @ a
    times["qhat"] = time.perf_counter() - t0

    negative = tuple(int(i) for i in np.flatnonzero(qhat < -TAU_GATE))
    status = Status.GATE_FAILED if negative else Status.VALID
    return CqExactSolution(
        capacity=CapacityValue(max(phi - ents[-1], 0.0)),
        theta=theta,
        phi=phi,
        sigma_star=rho,
        input_candidate=qhat,
        status=status,
        negative=negative,
        observables=np.stack([unvectorize(a[:, j]) for j in range(a.shape[1])]),
        step_times=times,
    )


def cq_divergences(cq, sigma=None, *, log_sigma=None) -> np.ndarray:
    """``D(W_x || sigma)`` for every state, ``sigma`` positive definite.

    Pass ``log_sigma`` instead of ``sigma`` when the logarithm is already known.
    """
    cq = _as_cq(cq)
    _, ents = state_logs(cq.states)
    if log_sigma is None:
        logs, _ = state_logs([sigma])
        log_sigma = logs[0]
    cross = np.einsum("xij,ji->x", cq.stacked(), log_sigma).real
    return np.maximum(-ents - cross, 0.0)


def cq_equal_divergence_residual(solution: CqExactSolution, cq) -> float:
    d = cq_divergences(cq, log_sigma=solution.log_sigma())
    return float(d.max() - d.min())


def _gap(cq: CqChannel, q: np.ndarray):
    sigma = np.einsum("x,xij->ij", q, cq.stacked())
    d = cq_divergences(cq, sigma)
    return float(d.max() - q @ d), sigma


def cq_capacity(cq, *, oracle: bool = False, oracle_tol: float = DEFAULT_CQ_TOL,
                max_iter: int = DEFAULT_MAX_ITER, subset_search: bool = False,
                tol_eq: float = TAU_EQ) -> CqCapacityReport:
    """Capacity of a cq channel, exact when the sign gate passes.

    With ``n**2`` states the exact solver runs first; anything else (a failed
    gate, linearly dependent states, another input count) uses Blahut-Arimoto and reports
    ``route="oracle-fallback"``. ``subset_search=True`` additionally tries
    every ``n**2``-subset when there are more inputs; such results are checked
    against all inputs but carry no further guarantee.
    """
    cq = _as_cq(cq)
    n_sq = cq.dim ** 2

    def oracle_value():
        try:
            value, q, _ = blahut_arimoto_cq(cq, tol=oracle_tol, max_iter=max_iter)
        except MaxIterExceeded as exc:
            return float(exc.lower), exc.input_dist
        return float(value), q

    report = None
    reason = ""
    gate = (None, ())
    if cq.n_inputs == n_sq:
        try:
            sol = algorithm2(cq)
        except SingularChannel as exc:
            # commuting ensembles land here: states span at most n of n**2 dimensions
            sol, reason = None, str(exc)
        if sol is not None and sol.valid:
            q = np.clip(sol.input_candidate, 0.0, None)
            q /= q.sum()
            gap, _ = _gap(cq, q)
            report = CqCapacityReport(sol.capacity, q, sol.sigma_star, "algorithm2", True,
                                      gap, gate_status=sol.status)
        elif sol is not None:
            gate = (sol.status, sol.negative)
    elif cq.n_inputs > n_sq and subset_search and math.comb(cq.n_inputs, n_sq) <= 100_000:
        for subset in itertools.combinations(range(cq.n_inputs), n_sq):
            try:
                sol = algorithm2(cq.restrict_inputs(subset))
            except SingularChannel:
                continue
            if not sol.valid:
                continue
            q = np.zeros(cq.n_inputs)
            q[list(subset)] = np.clip(sol.input_candidate, 0.0, None)
            q /= q.sum()
            gap, _ = _gap(cq, q)
            if gap <= tol_eq:
                report = CqCapacityReport(sol.capacity, q, sol.sigma_star, "subset-search",
                                          True, gap, gate_status=sol.status,
                                          subset=tuple(subset))
                break

    if report is None:
        value, q = oracle_value()
        gap, sigma = _gap(cq, q)
        report = CqCapacityReport(CapacityValue(value), q, sigma, "oracle-fallback", False, gap,
                                  gate_status=gate[0], negative=gate[1], oracle_check=value,
                                  reason=reason)
    elif oracle:
        report.oracle_check = oracle_value()[0]
    return report
