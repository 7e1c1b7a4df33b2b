"""Hermitian matrix calculus for the classical-quantum solvers.

Hermitian ``n x n`` matrices are identified with real ``n**2`` vectors through
an orthonormal basis for the trace inner product ``Tr(XY)``:

* ``n`` diagonal units ``|j><j|``;
* ``n(n-1)/2`` symmetric pairs ``(|j><k| + |k><j|)/sqrt(2)``;
* ``n(n-1)/2`` antisymmetric pairs ``(i|j><k| - i|k><j|)/sqrt(2)``;

with the off-diagonal pairs ``(j, k)``, ``j > k``, enumerated row by row:
``(1,0), (2,0), (2,1), (3,0), ...``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidDistribution, NotHermitian, RankDeficient
from .prob import TAU_SUM, entropy

TAU_HERM = 1e-10
TAU_PSD = 1e-10
LAMBDA_MIN = 1e-12

SQRT2 = math.sqrt(2.0)

IDENTITY2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def bloch_state(r: Sequence[float]) -> np.ndarray:
    """Qubit density matrix ``(I + r . sigma) / 2`` for a Bloch vector ``r``."""
    rx, ry, rz = r
    return 0.5 * (IDENTITY2 + rx * PAULI_X + ry * PAULI_Y + rz * PAULI_Z)


def hermitian(a, tol: float = TAU_HERM) -> np.ndarray:
    """Check ``a`` is Hermitian to ``tol`` and return its symmetrization ``(a + a^H)/2``."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if a.size and np.max(np.abs(a - a.conj().T)) > tol:
        raise NotHermitian("matrix is not Hermitian")
    return 0.5 * (a + a.conj().T)


def density_matrix(rho, *, tol_psd: float = TAU_PSD, tol_sum: float = TAU_SUM) -> np.ndarray:
    """Validate a density matrix: Hermitian, positive semidefinite, unit trace."""
    rho = hermitian(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol_sum:
        raise InvalidDistribution(f"trace is {tr!r}, not 1")
    if np.linalg.eigvalsh(rho).min() < -tol_psd:
        raise InvalidDistribution("matrix has a negative eigenvalue")
    return rho


def _offdiag_pairs(n: int):
    return [(j, k) for j in range(1, n) for k in range(j)]


def vectorize(a) -> np.ndarray:
    """Real coordinates of a Hermitian matrix in the orthonormal basis above."""
    a = hermitian(a)
    n = a.shape[0]
    pairs = _offdiag_pairs(n)
    rows = [p[0] for p in pairs]
    cols = [p[1] for p in pairs]
    off = a[rows, cols]
    return np.concatenate([a.diagonal().real, SQRT2 * off.real, SQRT2 * off.imag])


def unvectorize(v) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=float)
    n = math.isqrt(v.size)
    if n * n != v.size:
        raise DimensionError(f"vector length {v.size} is not a perfect square")
    pairs = _offdiag_pairs(n)
    m = len(pairs)
    out = np.diag(v[:n].astype(complex))
    if m:
        rows = np.array([p[0] for p in pairs])
        cols = np.array([p[1] for p in pairs])
        vals = (v[n:n + m] + 1j * v[n + m:]) / SQRT2
        out[rows, cols] = vals
        out[cols, rows] = vals.conj()
    return out


def _eigh(a):
    w, u = np.linalg.eigh(0.5 * (a + a.conj().T))
    return w, u


def _apply(w, u, values):
    return (u * values) @ u.conj().T


def matrix_exp(a) -> np.ndarray:
    w, u = _eigh(hermitian(a))
    return _apply(w, u, np.exp(w))


def matrix_log(p, lambda_min: float = LAMBDA_MIN) -> np.ndarray:
    """Logarithm of a positive definite matrix.

    Raises :class:`RankDeficient` when the smallest eigenvalue is below
    ``lambda_min``; the spectrum is never clamped.
    """
    w, u = _eigh(hermitian(p))
    if w.min() < lambda_min:
        raise RankDeficient(f"smallest eigenvalue {w.min():.3e} below {lambda_min:g}")
    return _apply(w, u, np.log(w))


def von_neumann_entropy(rho) -> float:
    """``-Tr rho log rho`` in nats."""
    w = np.linalg.eigvalsh(hermitian(rho))
    return entropy(np.clip(w, 0.0, None))


def quantum_relative_entropy(rho, sigma, lambda_min: float = LAMBDA_MIN) -> float:
    """``Tr rho (log rho - log sigma)``; ``inf`` if ``supp rho`` is not in ``supp sigma``."""
    rho = hermitian(rho)
    sigma = hermitian(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch: {rho.shape} vs {sigma.shape}")
    ws, us = _eigh(sigma)
    # rho expressed in sigma's eigenbasis
    diag = np.einsum("ji,jk,ki->i", us.conj(), rho, us).real
    null = ws < lambda_min
    if np.any(diag[null] > lambda_min):
        return math.inf
    cross = np.sum(diag[~null] * np.log(ws[~null]))
    return float(max(-von_neumann_entropy(rho) - cross, 0.0))


@dataclass(frozen=True)
class CqChannel:
    """Classical-quantum channel: one density matrix per classical input."""

    states: tuple

    def __post_init__(self):
        states = tuple(np.asarray(s, dtype=complex) for s in self.states)
        if not states:
            raise DimensionError("a cq channel needs at least one state")
        dim = states[0].shape
        checked = []
        for i, s in enumerate(states):
            if s.shape != dim:
                raise DimensionError(f"state {i} has shape {s.shape}, expected {dim}")
            try:
                s = density_matrix(s)
            except (InvalidDistribution, NotHermitian) as exc:
                raise type(exc)(f"state {i}: {exc}") from None
            s.setflags(write=False)
            checked.append(s)
        object.__setattr__(self, "states", tuple(checked))

    @property
    def n_inputs(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def stacked(self) -> np.ndarray:
        return np.stack(self.states)

    def restrict_inputs(self, indices: Sequence[int]) -> "CqChannel":
        return CqChannel(tuple(self.states[i] for i in indices))

    @classmethod
    def from_classical(cls, matrix) -> "CqChannel":
        """Embed a classical channel as commuting diagonal states."""
        return cls(tuple(np.diag(np.asarray(row, dtype=complex)) for row in np.asarray(matrix)))


def state_logs(states, lambda_min: float = LAMBDA_MIN):
    """Matrix logarithms and entropies of full-rank states.

    Returns ``(logs, entropies)``; raises :class:`RankDeficient` naming the
    first state whose spectrum dips below ``lambda_min``.
    """
    logs = []
    ents = []
    for i, s in enumerate(states):
        w, u = _eigh(s)
        if w.min() < lambda_min:
            raise RankDeficient(
                f"state {i} is not positive definite (min eigenvalue {w.min():.3e})", index=i
            )
        logs.append(_apply(w, u, np.log(w)))
        ents.append(-float(np.sum(w * np.log(w))))
    return np.stack(logs), np.array(ents)
