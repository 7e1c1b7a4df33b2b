"""Exact, non-iterative capacity of discrete memoryless channels.

The capacity-achieving output law of a channel with linearly independent
rows is the unique point where the mixture family spanned by the rows meets
the exponential family whose natural parameters make every divergence
``D(W_x || P)`` equal. With ``n`` inputs and ``n`` outputs that point is
obtained by one matrix inverse and a handful of exponentials
(:func:`algorithm1`); with fewer inputs than outputs the remaining natural
parameters minimize the log-partition function
(:func:`solve_mixture_exponential_intersection`). Reconstructing the input
weights and checking their signs certifies the result; negative inputs are
dropped and the problem re-solved on the survivors (:func:`capacity`).

Natural-parameter bookkeeping: with ``n1 <= n2`` the dual functions are
stored column-wise in an ``n2 x n2`` matrix ``F``::

    F[:, :n1-1]      duals of inputs 0..n1-2 (W_i . f_j = delta_ij, W_last . f_j = 0)
    F[:, n1-1:n2-1]  free directions, orthogonal to every row
    F[:, n2-1]       dual of the reference (last) input

For square channels this is exactly ``inv(M)`` with ``M[i, y] = W_i(y)``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import (
    MaxIterExceeded,
    NoConvergence,
    SingularChannel,
    SubsetSearchInconclusive,
)
from .oracle import DEFAULT_MAX_ITER, DEFAULT_TOL, blahut_arimoto
from .prob import CapacityValue, ClassicalChannel, row_divergences, row_entropies

TAU_GATE = 1e-10
TAU_EQ = 1e-8
TAU_LIN = 1e-9
TAU_GRAD = 1e-10
KAPPA_MIN = 1e-12
NEWTON_MAX_ITER = 200
MASS_CUTOFF = 1e-6
SUBSET_CAP = 100_000


class Status(enum.Enum):
    VALID = "valid"
    GATE_FAILED = "gate-failed"
    CONDITION_VIOLATED = "condition-violated"


@dataclass(frozen=True)
class NaturalParameters:
    """Exponential-family coordinates ``P(y) = exp(sum_j f_j(y) theta_j - phi)``.

    ``functions`` holds the ``f_j`` column-wise so ``phi`` can be recomputed.
    """

    theta: np.ndarray
    phi: float
    functions: np.ndarray

    def log_density(self) -> np.ndarray:
        return self.functions @ self.theta - self.phi

    def density(self) -> np.ndarray:
        return np.exp(self.log_density())


@dataclass(frozen=True)
class DualBasis:
    functions: np.ndarray
    gram: np.ndarray
    n_inputs: int
    # disjoint output pairs (y, y') carrying the free directions, when they exist
    pairs: Optional[tuple] = None

    @property
    def n_free(self) -> int:
        return self.functions.shape[0] - self.n_inputs


@dataclass
class ExactSolution:
    capacity: CapacityValue
    params: NaturalParameters
    output_law: np.ndarray
    input_candidate: np.ndarray
    status: Status
    negative: tuple = ()
    reason: str = ""
    closed_form: bool = False

    @property
    def valid(self) -> bool:
        return self.status is Status.VALID


@dataclass
class SolverPath:
    """Route the driver took to a capacity value.

    ``route`` is one of ``algorithm1``, ``mixture-exponential``,
    ``subset-search``, ``hybrid`` or ``oracle-fallback``. ``reductions`` lists
    the input indices (of the original channel) dropped at each re-solve.
    """

    route: str
    reductions: list = field(default_factory=list)
    support: tuple = ()
    subset: Optional[tuple] = None
    subsets_tried: int = 0
    closed_form: bool = False
    dropped_outputs: tuple = ()
    # support left by reduction that then failed the all-inputs check
    rejected_support: Optional[tuple] = None

    def describe(self, labels=None) -> str:
        def name(idx):
            return [labels[i] for i in idx] if labels is not None else list(idx)

        parts = [self.route]
        if self.rejected_support is not None:
            parts.append(f"reduced support {name(self.rejected_support)} failed the optimality check")
        if self.subset is not None:
            parts.append(f"subset={name(self.subset)} after {self.subsets_tried} tried")
        for dropped in self.reductions:
            parts.append(f"dropped inputs {name(dropped)}")
        if self.closed_form:
            parts.append("closed-form free parameters")
        return "; ".join(parts)


@dataclass
class CapacityReport:
    capacity: CapacityValue
    optimal_input: np.ndarray
    output_law: np.ndarray
    path: SolverPath
    verification_gap: float
    oracle_check: Optional[float] = None

    @property
    def support(self) -> tuple:
        return tuple(int(i) for i in np.flatnonzero(self.optimal_input > 0))

    @property
    def verified(self) -> bool:
        return self.verification_gap <= TAU_EQ


@dataclass(frozen=True)
class CapacityOptions:
    subset: str = "auto"
    subset_cap: int = SUBSET_CAP
    mass_cutoff: float = MASS_CUTOFF
    oracle: bool = False
    oracle_tol: float = DEFAULT_TOL
    oracle_max_iter: int = DEFAULT_MAX_ITER
    tol_eq: float = TAU_EQ
    fallback: bool = False


def _as_matrix(channel) -> np.ndarray:
    if isinstance(channel, ClassicalChannel):
        return channel.matrix
    return ClassicalChannel(channel).matrix


def _proportional_pairs(m: np.ndarray, n_free: int):
    """Disjoint pairs of proportional output columns, if they give ``n_free`` of them."""
    norms = np.linalg.norm(m, axis=0)
    unit = m / np.where(norms > 0, norms, 1.0)
    used = set()
    pairs = []
    n2 = m.shape[1]
    for y in range(n2):
        if y in used or norms[y] == 0:
            continue
        for y2 in range(y + 1, n2):
            if y2 in used or norms[y2] == 0:
                continue
            if np.max(np.abs(unit[:, y] - unit[:, y2])) <= TAU_LIN:
                pairs.append((y, y2))
                used.update((y, y2))
                break
    if len(pairs) != n_free:
        return None
    return tuple(pairs)


def build_dual_basis(channel) -> DualBasis:
    """Dual functions ``f_j`` with ``sum_y W_i(y) f_j(y) = delta_ij``.

    Square channels get ``F = inv(M)``. With fewer inputs than outputs the
    fixed duals come from the pseudo-inverse and the free directions span
    the null space of ``M``; when the null space is spanned by disjoint
    pairs of proportional columns those two-point functions are used.

    Raises
    ------
    SingularChannel
        If the rows are numerically dependent (reciprocal condition number
        below ``KAPPA_MIN``) or there are more inputs than outputs.
    """
    m = _as_matrix(channel)
    n1, n2 = m.shape
    if n1 > n2:
        raise SingularChannel(f"{n1} rows in dimension {n2} cannot be linearly independent")
    s = np.linalg.svd(m, compute_uv=False)
    if s[-1] <= KAPPA_MIN * s[0]:
        raise SingularChannel(
            f"channel rows are linearly dependent (reciprocal condition {s[-1] / s[0]:.2e})"
        )
    pairs = None
    if n1 == n2:
        f = np.linalg.inv(m)
    else:
        pinv = np.linalg.pinv(m)
        n_free = n2 - n1
        pairs = _proportional_pairs(m, n_free)
        if pairs is not None:
            free = np.zeros((n2, n_free))
            for j, (y, y2) in enumerate(pairs):
                # m[:, y] = ratio * m[:, y2]; f = e_y - ratio e_y2 is orthogonal to every row
                ratio = np.linalg.norm(m[:, y]) / np.linalg.norm(m[:, y2])
                free[y, j] = 1.0
                free[y2, j] = -ratio
        else:
            _, _, vt = np.linalg.svd(m)
            free = vt[n1:].T
        f = np.hstack([pinv[:, : n1 - 1], free, pinv[:, n1 - 1:]])
    gram = m @ f
    expected = np.zeros((n1, n2))
    expected[: n1 - 1, : n1 - 1] = np.eye(n1 - 1)
    expected[n1 - 1, n2 - 1] = 1.0
    if np.max(np.abs(gram - expected)) > TAU_LIN:
        raise SingularChannel("dual basis residual exceeds tolerance; channel is ill-conditioned")
    return DualBasis(functions=f, gram=gram, n_inputs=n1, pairs=pairs)


def solve_theta(channel, basis: DualBasis) -> NaturalParameters:
    """Natural parameters that equalize all divergences.

    ``theta_i = H(W_last) - H(W_i)`` for the fixed directions; free
    directions (if any) are left at zero.
    """
    m = _as_matrix(channel)
    n1, n2 = m.shape
    h = row_entropies(m)
    theta = np.zeros(n2 - 1)
    theta[: n1 - 1] = h[-1] - h[:-1]
    funcs = basis.functions[:, : n2 - 1]
    return NaturalParameters(theta=theta, phi=float(logsumexp(funcs @ theta)), functions=funcs)


def _gate(qhat: np.ndarray):
    negative = tuple(int(i) for i in np.flatnonzero(qhat < -TAU_GATE))
    return (Status.GATE_FAILED if negative else Status.VALID), negative


def _solution(m, params, law, qhat, closed_form=False) -> ExactSolution:
    h_ref = row_entropies(m[-1:])[0]
    value = CapacityValue(max(params.phi - h_ref, 0.0))
    residual = np.max(np.abs(qhat @ m - law))
    if residual > TAU_LIN:
        return ExactSolution(value, params, law, qhat, Status.CONDITION_VIOLATED,
                             reason=f"input reconstruction residual {residual:.2e}",
                             closed_form=closed_form)
    status, negative = _gate(qhat)
    return ExactSolution(value, params, law, qhat, status, negative, closed_form=closed_form)


def algorithm1(channel) -> ExactSolution:
    """Exact capacity candidate of a square channel.

    Inverts the row matrix, sets ``theta_i = H(W_n) - H(W_i)``, evaluates
    ``phi``, and reconstructs ``Qhat(x) = sum_y P_theta(y) f_x(y)``. The
    candidate ``phi - H(W_n)`` is the capacity iff ``Qhat >= 0``.
    """
    m = _as_matrix(channel)
    n1, n2 = m.shape
    if n1 != n2:
        raise ValueError(f"algorithm1 needs a square channel, got {n1}x{n2}")
    basis = build_dual_basis(m)
    params = solve_theta(m, basis)
    law = params.density()
    qhat = basis.functions.T @ law
    return _solution(m, params, law, qhat)


def _closed_form_free(basis: DualBasis, s: np.ndarray) -> np.ndarray:
    """Free parameters when each free direction lives on its own pair of outputs."""
    f = basis.functions
    n1 = basis.n_inputs
    out = np.empty(basis.n_free)
    for k, (y, y2) in enumerate(basis.pairs):
        fj = f[:, n1 - 1 + k]
        out[k] = (s[y2] - s[y] + math.log(-fj[y2] / fj[y])) / (fj[y] - fj[y2])
    return out


def _newton_free(free: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Minimize ``log sum_y exp(s + free @ eta)`` by damped Newton from ``eta = 0``."""
    k = free.shape[1]
    eta = np.zeros(k)

    def value(e):
        return logsumexp(s + free @ e)

    phi = value(eta)
    for _ in range(NEWTON_MAX_ITER):
        logp = s + free @ eta
        p = np.exp(logp - logsumexp(logp))
        grad = free.T @ p
        if np.max(np.abs(grad)) <= TAU_GRAD:
            return eta
        centered = free - grad[None, :]
        hess = centered.T @ (p[:, None] * centered)
        try:
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = -grad
        slope = grad @ step
        t = 1.0
        if -slope < 1e-12:
            # inside the quadratic region phi changes below rounding; Armijo cannot tell
            eta = eta + step
            phi = value(eta)
            continue
        while True:
            trial = value(eta + t * step)
            if trial <= phi + 1e-4 * t * slope or t < 1e-12:
                break
            t *= 0.5
        eta = eta + t * step
        phi = trial
    raise NoConvergence(f"free-parameter Newton did not converge in {NEWTON_MAX_ITER} steps")


def _intersection(m: np.ndarray, closed_form: Optional[bool]):
    n1, n2 = m.shape
    basis = build_dual_basis(m)
    base = solve_theta(m, basis)
    if n1 == n2:
        return base.density(), base, False
    if closed_form and basis.pairs is None:
        raise ValueError("free directions are not supported on disjoint output pairs")
    if closed_form is False and basis.pairs is not None:
        # swap the two-point directions for an SVD null-space basis
        pinv = np.linalg.pinv(m)
        _, _, vt = np.linalg.svd(m)
        f = np.hstack([pinv[:, : n1 - 1], vt[n1:].T, pinv[:, n1 - 1:]])
        basis = DualBasis(functions=f, gram=m @ f, n_inputs=n1, pairs=None)
        base = solve_theta(m, basis)
    funcs = basis.functions[:, : n2 - 1]
    fixed = base.theta[: n1 - 1]
    s = funcs[:, : n1 - 1] @ fixed
    if basis.pairs is not None:
        eta = _closed_form_free(basis, s)
    else:
        eta = _newton_free(funcs[:, n1 - 1:], s)
    theta = np.concatenate([fixed, eta])
    params = NaturalParameters(theta=theta, phi=float(logsumexp(funcs @ theta)), functions=funcs)
    return params.density(), params, basis.pairs is not None


def solve_mixture_exponential_intersection(channel, closed_form: Optional[bool] = None):
    """Output law of the capacity saddle point for a channel with ``n1 <= n2``.

    The fixed natural parameters come from :func:`solve_theta`; the free ones
    minimize the log-partition function. When the free directions sit on
    disjoint output pairs the minimizer is written down in closed form.

    Parameters
    ----------
    channel : ClassicalChannel or array_like
    closed_form : bool, optional
        ``None`` picks the closed form whenever it applies, ``False`` forces
        Newton, ``True`` insists on the closed form (``ValueError`` if the
        output pairs do not exist).

    Returns
    -------
    law : ndarray
        The output distribution ``P_theta``.
    params : NaturalParameters
    """
    law, params, _ = _intersection(_as_matrix(channel), closed_form)
    return law, params


def exact_solution(channel) -> ExactSolution:
    """Saddle-point candidate and sign gate for any channel with ``n1 <= n2``."""
    m = _as_matrix(channel)
    n1, n2 = m.shape
    if n1 == 1:
        h = row_entropies(m)[0]
        params = NaturalParameters(np.zeros(0), float(h), np.zeros((n2, 0)))
        return ExactSolution(CapacityValue(0.0), params, m[0].copy(), np.ones(1), Status.VALID)
    if n1 == n2:
        return algorithm1(m)
    law, params, closed = _intersection(m, None)
    qhat, *_ = np.linalg.lstsq(m.T, law, rcond=None)
    return _solution(m, params, law, qhat, closed_form=closed)


def equal_divergence_residual(solution: ExactSolution, channel) -> float:
    """Spread ``max_x D(W_x||P) - min_x D(W_x||P)`` of the divergences to the output law."""
    d = row_divergences(_as_matrix(channel), solution.output_law)
    return float(d.max() - d.min())


def _clean_input(qhat: np.ndarray) -> np.ndarray:
    q = np.clip(qhat, 0.0, None)
    return q / q.sum()


def _verification_gap(m: np.ndarray, q: np.ndarray):
    """``max_x D(W_x||W.q) - sum_x q(x) D(W_x||W.q)`` and the mutual information."""
    out = q @ m
    d = row_divergences(m, out)
    info = float(q @ np.where(q > 0, d, 0.0))
    return float(d.max() - info), info, out


def _reduce(m: np.ndarray, active: list):
    """Solve on ``active`` inputs, dropping negative ones until the gate passes.

    Returns ``(solution, active, reductions)`` with indices relative to ``m``.
    """
    active = list(active)
    reductions = []
    while True:
        sol = exact_solution(m[active])
        if sol.status is Status.VALID:
            return sol, active, reductions
        if sol.status is Status.CONDITION_VIOLATED:
            raise SingularChannel(sol.reason)
        dropped = [active[i] for i in sol.negative]
        reductions.append(tuple(dropped))
        active = [a for i, a in enumerate(active) if i not in sol.negative]


def _embed(m, sol, active):
    q = np.zeros(m.shape[0])
    q[active] = _clean_input(sol.input_candidate)
    return q


def _report_from(m, sol, active, path, kept_outputs, n2_full):
    q = _embed(m, sol, active)
    gap, info, out = _verification_gap(m, q)
    law = np.zeros(n2_full)
    law[kept_outputs] = out
    path.support = tuple(int(i) for i in np.flatnonzero(q > 0))
    return CapacityReport(
        capacity=CapacityValue(sol.capacity),
        optimal_input=q,
        output_law=law,
        path=path,
        verification_gap=gap,
    )


def _subset_search(m, subsets, options, route, tried_offset=0):
    """Try each input subset in order; return the first report that verifies.

    Returns ``(report_or_None, best_lower_bound_report, tried)``.
    """
    best = None
    tried = tried_offset
    for subset in subsets:
        tried += 1
        try:
            sol, active, reductions = _reduce(m, list(subset))
        except (SingularChannel, NoConvergence):
            continue
        path = SolverPath(route=route, reductions=reductions, subset=tuple(subset),
                          closed_form=sol.closed_form)
        q = _embed(m, sol, active)
        gap, info, out = _verification_gap(m, q)
        if gap <= options.tol_eq:
            path.subsets_tried = tried
            return (sol, active, path), best, tried
        if best is None or info > best[3]:
            best = (sol, active, path, info)
    return None, best, tried


def capacity(channel, options: Optional[CapacityOptions] = None, **kwargs) -> CapacityReport:
    """Capacity of a discrete memoryless channel, certified exact.

    Route selection:

    * ``n1 <= n2``: solve the saddle point directly, drop inputs with negative
      reconstructed weight, repeat. If the reduced support fails the check
      below, fall through to the subset search on smaller input sets.
    * ``n1 > n2``: search input subsets of size ``n2`` (exhaustively, or seeded
      by a Blahut-Arimoto run when the enumeration would exceed
      ``options.subset_cap``), then smaller sizes if none verifies.

    Every answer is checked against all inputs of the original channel:
    ``max_x D(W_x||W.Q) - I(Q) <= options.tol_eq``.

    Keyword arguments are forwarded to :class:`CapacityOptions`.
    """
    if options is None:
        options = CapacityOptions(**kwargs)
    elif kwargs:
        raise TypeError("pass either options or keyword overrides, not both")
    ch = channel if isinstance(channel, ClassicalChannel) else ClassicalChannel(channel)
    full = ch.matrix
    n2_full = full.shape[1]
    kept = np.flatnonzero(full.sum(axis=0) > 0)
    m = full[:, kept]
    dropped_outputs = tuple(int(y) for y in np.setdiff1d(np.arange(n2_full), kept))
    n1, n2 = m.shape

    def finish(report):
        report.path.dropped_outputs = dropped_outputs
        if options.oracle:
            report.oracle_check = _oracle_value(full, options)
        return report

    strategy = options.subset
    if strategy not in ("auto", "exhaustive", "hybrid"):
        raise ValueError(f"unknown subset strategy {strategy!r}")

    rejected = None
    if n1 <= n2:
        try:
            sol, active, reductions = _reduce(m, range(n1))
        except SingularChannel:
            if options.fallback:
                return finish(_fallback_report(full, options, kept))
            raise
        route = "algorithm1" if n1 == n2 and not reductions else "mixture-exponential"
        path = SolverPath(route=route, reductions=reductions, closed_form=sol.closed_form)
        report = _report_from(m, sol, active, path, kept, n2_full)
        if report.verification_gap <= options.tol_eq:
            return finish(report)
        # dropping every negative input at once can discard part of the optimal
        # support; search smaller input sets instead
        rejected = tuple(active)
        top = n1 - 1
    else:
        top = n2

    n_top = math.comb(n1, top)
    if strategy == "auto":
        strategy = "exhaustive" if n_top <= options.subset_cap else "hybrid"

    found = best = None
    tried = 0
    if strategy == "hybrid":
        seed = _hybrid_seed(m, top, options)
        found, best, tried = _subset_search(m, [seed], options, "hybrid")
        if found is None and n_top <= options.subset_cap:
            strategy = "exhaustive"
    if found is None and strategy == "exhaustive":
        for size in range(top, 0, -1):
            found, best_size, tried = _subset_search(
                m, itertools.combinations(range(n1), size), options, "subset-search", tried
            )
            if best_size is not None and (best is None or best_size[3] > best[3]):
                best = best_size
            if found is not None:
                break
    if found is not None:
        sol, active, path = found
        path.rejected_support = rejected
        return finish(_report_from(m, sol, active, path, kept, n2_full))

    if options.fallback:
        return finish(_fallback_report(full, options, kept))
    partial = None
    if best is not None:
        sol, active, path, _ = best
        partial = _report_from(m, sol, active, path, kept, n2_full)
    elif rejected is not None:
        partial = report
    if partial is not None:
        partial.oracle_check = _oracle_value(full, options)
    raise SubsetSearchInconclusive(
        "no input subset passed the all-inputs optimality check", report=partial
    )


def _hybrid_seed(m, n2, options) -> tuple:
    try:
        _, q, _ = blahut_arimoto(m, tol=options.oracle_tol, max_iter=options.oracle_max_iter)
    except MaxIterExceeded as exc:
        q = exc.input_dist
    heavy = np.flatnonzero(q >= options.mass_cutoff)
    if heavy.size > n2:
        # stable sort keeps the lower index on ties
        heavy = np.argsort(-q, kind="stable")[:n2]
    return tuple(sorted(int(i) for i in heavy))


def _oracle_value(m, options) -> float:
    try:
        value, _, _ = blahut_arimoto(m, tol=options.oracle_tol, max_iter=options.oracle_max_iter)
    except MaxIterExceeded as exc:
        return float(exc.lower)
    return float(value)


def _fallback_report(full, options, kept) -> CapacityReport:
    try:
        value, q, trace = blahut_arimoto(full, tol=options.oracle_tol,
                                         max_iter=options.oracle_max_iter)
        gap = trace.gap
    except MaxIterExceeded as exc:
        value, q, gap = CapacityValue(exc.lower), exc.input_dist, exc.upper - exc.lower
    return CapacityReport(
        capacity=CapacityValue(value),
        optimal_input=q,
        output_law=q @ full,
        path=SolverPath(route="oracle-fallback",
                        support=tuple(int(i) for i in np.flatnonzero(q > 0))),
        verification_gap=float(gap),
        oracle_check=float(value),
    )
