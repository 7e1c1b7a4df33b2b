"""Probability vectors, classical channels and Shannon information measures.

All logarithms are natural; conversion to bits happens only when a value
is rendered (see :class:`CapacityValue`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, InvalidDistribution

TAU_SUM = 1e-9
TAU_NEG = 1e-12

LOG2 = float(np.log(2.0))


def as_distribution(p, *, tol_sum: float = TAU_SUM, tol_neg: float = TAU_NEG) -> np.ndarray:
    """Validate ``p`` as a point of the probability simplex.

    Entries in ``[-tol_neg, 0)`` are clipped to zero. The returned array is
    a fresh float64 copy, so callers may mutate it.
    """
    arr = np.array(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidDistribution(f"expected a non-empty 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistribution("distribution has non-finite entries")
    if arr.min() < -tol_neg:
        bad = np.flatnonzero(arr < -tol_neg).tolist()
        raise InvalidDistribution(f"negative entries at indices {bad}")
    total = arr.sum()
    if abs(total - 1.0) > tol_sum:
        raise InvalidDistribution(f"entries sum to {total!r}, not 1")
    arr[arr < 0] = 0.0
    return arr


def as_signed_weights(w, *, tol_sum: float = TAU_SUM) -> np.ndarray:
    """Validate an affine weight vector: any signs, but summing to one."""
    arr = np.array(w, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidDistribution(f"expected a non-empty 1-d vector, got shape {arr.shape}")
    if abs(arr.sum() - 1.0) > tol_sum:
        raise InvalidDistribution(f"weights sum to {arr.sum()!r}, not 1")
    return arr


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


class CapacityValue(float):
    """A capacity in nats that knows how to present itself in bits."""

    @property
    def nats(self) -> float:
        return float(self)

    @property
    def bits(self) -> float:
        return float(self) / LOG2

    def in_units(self, units: str = "nats") -> float:
        if units == "nats":
            return self.nats
        if units == "bits":
            return self.bits
        raise ValueError(f"unknown units {units!r}")

    def __repr__(self):
        return f"CapacityValue({float(self)!r})"


@dataclass(frozen=True)
class ClassicalChannel:
    """Row-stochastic transition matrix; ``matrix[x, y] = W(y|x)``."""

    matrix: np.ndarray
    input_labels: tuple = field(default=None)
    output_labels: tuple = field(default=None)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
            raise DimensionError(f"channel matrix must be 2-d and non-empty, got shape {m.shape}")
        for x, row in enumerate(m):
            try:
                m[x] = as_distribution(row)
            except InvalidDistribution as exc:
                raise InvalidDistribution(f"row {x}: {exc}") from None
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        n1, n2 = m.shape
        inl = tuple(self.input_labels) if self.input_labels is not None else tuple(range(n1))
        outl = tuple(self.output_labels) if self.output_labels is not None else tuple(range(n2))
        if len(inl) != n1 or len(outl) != n2:
            raise DimensionError("label lists do not match the matrix shape")
        object.__setattr__(self, "input_labels", inl)
        object.__setattr__(self, "output_labels", outl)

    @property
    def n_inputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.matrix.shape[1]

    @property
    def shape(self) -> tuple:
        return self.matrix.shape

    def restrict_inputs(self, indices: Sequence[int]) -> "ClassicalChannel":
        idx = list(indices)
        return ClassicalChannel(
            self.matrix[idx], tuple(self.input_labels[i] for i in idx), self.output_labels
        )

    def restrict_outputs(self, indices: Sequence[int]) -> "ClassicalChannel":
        # rows must still sum to one, so only drop outputs that carry no mass
        idx = list(indices)
        return ClassicalChannel(
            self.matrix[:, idx], self.input_labels, tuple(self.output_labels[i] for i in idx)
        )


def channel_matrix(channel) -> np.ndarray:
    """Return the transition matrix of a channel or anything array-like."""
    if isinstance(channel, ClassicalChannel):
        return channel.matrix
    return ClassicalChannel(channel).matrix


def bsc(p: float) -> ClassicalChannel:
    """Binary symmetric channel with crossover probability ``p``."""
    return ClassicalChannel([[1 - p, p], [p, 1 - p]])


def binary_entropy(p: float) -> float:
    return entropy([p, 1.0 - p])


def _xlogx(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p, dtype=float)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def entropy(p) -> float:
    """Shannon entropy in nats with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    return float(max(-_xlogx(p).sum(), 0.0))


def row_entropies(matrix: np.ndarray) -> np.ndarray:
    return -_xlogx(np.asarray(matrix, dtype=float)).sum(axis=-1)


def kl_divergence(p, q) -> float:
    """Relative entropy ``D(p||q)`` in nats; ``inf`` when ``supp p`` is not in ``supp q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DimensionError(f"length mismatch: {p.shape} vs {q.shape}")
    return float(row_divergences(p[None, :], q)[0])


def row_divergences(matrix: np.ndarray, q: np.ndarray) -> np.ndarray:
    """``D(W_x || q)`` for every row ``W_x`` of ``matrix``."""
    matrix = np.asarray(matrix, dtype=float)
    q = np.asarray(q, dtype=float)
    pos = matrix > 0
    if np.any(pos & (q <= 0)[None, :]):
        out = np.empty(matrix.shape[0])
        for x, row in enumerate(matrix):
            s = row > 0
            out[x] = np.inf if np.any(q[s] <= 0) else np.sum(row[s] * np.log(row[s] / q[s]))
        return np.maximum(out, 0.0)
    logratio = np.zeros_like(matrix)
    logratio[pos] = np.log((matrix / np.where(q > 0, q, 1.0)[None, :])[pos])
    return np.maximum((matrix * logratio).sum(axis=1), 0.0)


def output_distribution(input_dist, channel) -> np.ndarray:
    """Output law ``(W . Q)(y) = sum_x W(y|x) Q(x)``."""
    m = channel_matrix(channel)
    q = np.asarray(input_dist, dtype=float)
    if q.shape != (m.shape[0],):
        raise DimensionError(f"input has length {q.size}, channel has {m.shape[0]} inputs")
    return q @ m


def mutual_information(input_dist, channel) -> float:
    """``sum_x Q(x) D(W_x || W.Q)`` in nats."""
    m = channel_matrix(channel)
    q = np.asarray(input_dist, dtype=float)
    out = output_distribution(q, m)
    s = q > 0
    return float(max(np.dot(q[s], row_divergences(m[s], out)), 0.0))
