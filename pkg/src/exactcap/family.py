"""Worked examples with closed forms.

Two families are covered:

* binary-input binary-output channels, solved exactly by :func:`algorithm1`;
* the four-input, three-output family ``W_eps`` with rows::

      W1 = (1-eps, 0,     eps)
      W2 = (0,     1-eps, eps)
      W3 = (1/2,   1/2,   0)
      W4 = (1/2-eps, 1/2-eps, 2 eps)

  whose capacity switches between three closed forms as ``eps`` moves
  through (0, 1/2).

Inputs of the four-input family are labelled 1..4 throughout this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import bisect

from .errors import NoSignChange, SingularChannel
from .exact import algorithm1
from .prob import LOG2, CapacityValue, ClassicalChannel, binary_entropy

EPS_MIN = 1e-6
EPS_MAX = 0.5 - 1e-6

# brackets for the three crossings; the 4-digit values are never used in control flow
G1_BRACKET = (0.3, 0.4)
QHAT_BRACKET = (0.35, 0.45)
G2_BRACKET = (0.4, 0.45)


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not EPS_MIN <= eps <= EPS_MAX:
        raise ValueError(f"epsilon must lie in [{EPS_MIN}, 1/2 - {EPS_MIN}], got {eps!r}")
    return eps


def epsilon_family_channel(eps: float) -> ClassicalChannel:
    eps = float(eps)
    if not 0.0 <= eps <= 0.5:
        raise ValueError(f"epsilon must lie in [0, 1/2], got {eps!r}")
    rows = [
        [1 - eps, 0.0, eps],
        [0.0, 1 - eps, eps],
        [0.5, 0.5, 0.0],
        [0.5 - eps, 0.5 - eps, 2 * eps],
    ]
    return ClassicalChannel(rows, input_labels=(1, 2, 3, 4), output_labels=(1, 2, 3))


def binary_channel_capacity(p: float, q: float):
    """Capacity of the channel with rows ``(1-p, p)`` and ``(1-q, q)``, ``p < q``.

    Two distinct binary rows always pass the sign gate, so the answer comes
    straight from :func:`algorithm1`.

    Returns
    -------
    capacity : CapacityValue
    input_dist : ndarray
    """
    if p == q:
        raise SingularChannel("identical rows carry no information and are not independent")
    if not 0.0 <= p < q <= 1.0:
        raise ValueError("expected 0 <= p < q <= 1")
    sol = algorithm1([[1 - p, p], [1 - q, q]])
    q_in = np.clip(sol.input_candidate, 0.0, None)
    return sol.capacity, q_in / q_in.sum()


def asymmetric_binary_closed_form(p: float, q: float) -> float:
    """``(p h(q) - q h(p))/(q-p) + log(1 + exp(-(q+p)(h(q)-h(p))/(q-p)))``.

    Correct only when ``q = 1 - p``; kept so tests can show it disagrees with
    the exact solver on asymmetric channels.
    """
    hp, hq = binary_entropy(p), binary_entropy(q)
    return (p * hq - q * hp) / (q - p) + math.log1p(math.exp(-(q + p) * (hq - hp) / (q - p)))


@dataclass(frozen=True)
class CandidateCapacitySet:
    """Closed-form candidates for the four-input family at one ``eps`` (nats).

    ``c4``, ``c3`` and ``c1`` are the equal-divergence values of the input
    subsets {1,2,3}, {1,2,4} and {2,3,4}; ``c_star`` is the capacity of {1,2}
    and ``c_dstar`` that of {3,4}.
    """

    epsilon: float
    c1: float
    c3: float
    c4: float
    c_star: float
    c_dstar: float
    h1: float
    h3: float
    h4: float


def aux_entropies(eps: float):
    """``(h1, h3, h4)`` for the four-input family."""
    eps = _check_eps(eps)
    h_e = binary_entropy(eps)
    h_2e = binary_entropy(2 * eps)
    h4 = LOG2 - h_e
    h3 = h_2e + (1 - 2 * eps) * LOG2 - h_e
    h1 = h_2e - 2 * eps * LOG2
    return h1, h3, h4


def _j1_terms(eps):
    a = (1 - 2 * eps) / 4
    b = (1 - 2 * eps) / (2 - 2 * eps)
    t = (1 - 2 * eps) ** ((1 - 2 * eps) / (2 * eps))
    return a ** b, a ** -b, t


def _dstar_weight(eps):
    """Optimal mass on input 4 for the {3,4} subchannel."""
    return 1.0 / (2 * eps + (1 - 2 * eps) ** (-(1 - 2 * eps) / (2 * eps)))


def candidate_capacities(eps: float) -> CandidateCapacitySet:
    eps = _check_eps(eps)
    h1, h3, h4 = aux_entropies(eps)
    h_e = binary_entropy(eps)
    h_2e = binary_entropy(2 * eps)
    c4 = float(np.logaddexp(0.0, h4 / eps - LOG2))
    c3 = float(np.logaddexp(LOG2, -h3 / eps)) + h_2e + (1 - 2 * eps) * LOG2 - 2 * h_e
    ab, a_b, t = _j1_terms(eps)
    c1 = math.log(ab / (1 - eps) + (1 - eps) * a_b + 4 * eps * t) - LOG2
    c_star = (1 - eps) * LOG2
    p = _dstar_weight(eps)
    c_dstar = binary_entropy(2 * eps * p) - p * h_2e
    return CandidateCapacitySet(eps, c1, c3, c4, c_star, c_dstar, h1, h3, h4)


def gate_functions(eps: float):
    """``(g1, g2, g3)``; input 3 of {1,2,3} is non-negative iff ``g1 <= 1``,
    input 4 of {1,2,4} iff ``g2 >= 1``, inputs 1, 2 of {1,2,4} iff ``g3 <= 1``."""
    eps = _check_eps(eps)
    _, h3, h4 = aux_entropies(eps)
    # g1 overflows for small eps; inf keeps the comparison g1 <= 1 meaningful
    with np.errstate(over="ignore"):
        g1 = float((1 - eps) / (2 * eps) * np.exp(h4 / eps))
        g2 = float((1 - eps) / (2 * eps) * np.exp(-h3 / eps))
        g3 = float((1 - 2 * eps) / (2 * eps) * np.exp(-h3 / eps))
    return g1, g2, g3


def qhat_inputs_234(eps: float) -> np.ndarray:
    """Reconstructed weights of inputs 2, 3, 4 on the {2,3,4} subchannel (closed form)."""
    eps = _check_eps(eps)
    ab, a_b, t = _j1_terms(eps)
    norm = ab / (1 - eps) + (1 - eps) * a_b + 4 * eps * t
    v = np.array([
        -ab / (1 - eps) ** 2 + a_b,
        (3 - 2 * eps) / (2 * (1 - eps) ** 2) * ab + (1 - 2 * eps) / 2 * a_b + (4 * eps - 2) * t,
        ab / (2 * (1 - eps) ** 2) - a_b / 2 + 2 * t,
    ])
    return v / norm


def qhat_inputs_123(eps: float) -> np.ndarray:
    """Reconstructed weights of inputs 1, 2, 3 on the {1,2,3} subchannel (closed form)."""
    _, _, h4 = aux_entropies(eps)
    # work relative to exp(phi) to stay finite for small eps
    log_norm = float(np.logaddexp(LOG2, h4 / eps))
    big = math.exp(h4 / eps - log_norm)
    small = math.exp(-log_norm)
    return np.array([big / (2 * eps), big / (2 * eps), 2 * small - (1 - eps) / eps * big])


def find_threshold(f, bracket, tol: float = 1e-12) -> float:
    """Root of ``f`` on ``bracket`` by bisection.

    Raises :class:`NoSignChange` if ``f`` has the same sign at both ends.
    """
    lo, hi = bracket
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return float(lo)
    if fhi == 0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChange(f"f({lo})={flo:.3g} and f({hi})={fhi:.3g} have the same sign")
    return float(bisect(f, lo, hi, xtol=tol, maxiter=200))


@dataclass(frozen=True)
class Thresholds:
    """Crossings that split (0, 1/2) into the capacity branches."""

    g1: float      # {1,2,3} becomes achievable above this
    qhat: float    # input 2 of {2,3,4} turns negative above this
    g2: float      # {1,2,4} becomes achievable above this


@lru_cache(maxsize=None)
def thresholds(tol: float = 1e-12) -> Thresholds:
    return Thresholds(
        g1=find_threshold(lambda e: gate_functions(e)[0] - 1.0, G1_BRACKET, tol),
        qhat=find_threshold(lambda e: qhat_inputs_234(e)[0], QHAT_BRACKET, tol),
        g2=find_threshold(lambda e: gate_functions(e)[1] - 1.0, G2_BRACKET, tol),
    )


def piecewise_capacity(eps: float) -> CapacityValue:
    """Capacity of the four-input family from its three-branch closed form."""
    eps = _check_eps(eps)
    th = thresholds()
    cand = candidate_capacities(eps)
    if eps <= th.g1:
        return CapacityValue(cand.c_star)
    if eps <= th.qhat:
        return CapacityValue(cand.c4)
    return CapacityValue(cand.c_dstar)


def branch_label(eps: float) -> str:
    th = thresholds()
    if eps <= th.g1:
        return "C*"
    if eps <= th.qhat:
        return "C4"
    return "C**"


def achievable_candidates(eps: float) -> dict:
    """Closed-form candidates that are capacities of some input subset at ``eps``.

    ``c_star`` and ``c_dstar`` always qualify; ``c4``, ``c3`` and ``c1`` only
    when the reconstructed weights of their subset are all non-negative.
    """
    cand = candidate_capacities(eps)
    g1, g2, g3 = gate_functions(eps)
    out = {"C*": cand.c_star, "C**": cand.c_dstar}
    if g1 <= 1.0:
        out["C4"] = cand.c4
    if g2 >= 1.0 and g3 <= 1.0:
        out["C3"] = cand.c3
    if np.all(qhat_inputs_234(eps) >= 0):
        out["C1"] = cand.c1
    return out


def achievable_max(eps: float) -> CapacityValue:
    return CapacityValue(max(achievable_candidates(eps).values()))


QHAT_LIMIT = np.array([3 / 5, 7 / 10 - 4 / (5 * math.e), 4 / (5 * math.e) - 3 / 10])


def qhat_limit_check(eps: float = 1e-4):
    """Weights of {2,3,4} at small ``eps`` next to their ``eps -> 0`` limit.

    Returns ``(computed, limit)``; ``computed`` comes from running
    :func:`algorithm1` on the subchannel, not from the closed form.
    """
    sub = epsilon_family_channel(eps).restrict_inputs([1, 2, 3])
    return algorithm1(sub).input_candidate, QHAT_LIMIT.copy()
