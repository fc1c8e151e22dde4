"""Closed-form device-independent key-rate bounds (bits).

Negative values are kept in ``g_prime`` and ``r0_theta_bound`` so their sign
changes can be located; clamping happens in ``g`` and in :func:`rate_report`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .monotones import LOCAL_BOUND, TSIRELSON, chsh_restricted, chsh_value
from .scenario import DistributionTuple, correlators

SLACK = 1e-12
N_MAX = TSIRELSON - LOCAL_BOUND  # 2(sqrt 2 - 1), largest quantum CHSH violation


def binary_entropy(p: float) -> float:
    """``h(p) = -p log2 p - (1-p) log2(1-p)`` with ``h(0) = h(1) = 0``."""
    if not -SLACK <= p <= 1 + SLACK:
        raise DomainError(f"binary entropy argument {p} outside [0, 1]")
    p = min(1.0, max(0.0, p))
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def _entropy(probs) -> float:
    q = np.asarray(probs, dtype=float).ravel()
    q = q[q > 0]
    return float(-(q * np.log2(q)).sum())


def mutual_information_binary(joint) -> float:
    """``I(A:B) = H(A) + H(B) - H(A,B)`` from a 2x2 joint table."""
    J = np.asarray(joint, dtype=float)
    if J.shape != (2, 2):
        raise ValueError(f"expected a 2x2 table, got shape {J.shape}")
    if J.min() < -SLACK or abs(J.sum() - 1.0) > 1e-9:
        raise ValueError("joint table must be nonnegative and sum to 1")
    J = np.clip(J, 0.0, None)
    return max(0.0, _entropy(J.sum(axis=1)) + _entropy(J.sum(axis=0)) - _entropy(J))


def mutual_information_unbiased(corr: float) -> float:
    """Mutual information of two unbiased +-1 bits with correlator ``corr``."""
    return 1.0 - binary_entropy(0.5 + abs(corr) / 2.0)


def _radical(rad):
    # s + s^2/4 (equivalently S^2/4 - 1) hits 1 exactly at the quantum maximum; snap round-off
    rad = min(1.0, max(0.0, rad))
    return 1.0 if rad > 1.0 - 4e-16 else rad


def eve_bound(S: float) -> float:
    """Bound on Eve's information, ``h(1/2 + sqrt(S^2/4 - 1)/2)``; 1 when ``S <= 2``."""
    if S > TSIRELSON + 1e-9:
        raise DomainError(f"S = {S} exceeds the quantum maximum 2*sqrt(2)")
    if S <= LOCAL_BOUND:
        return 1.0
    return binary_entropy(0.5 + math.sqrt(_radical(S * S / 4.0 - 1.0)) / 2.0)


def r0_theta_bound(theta: float) -> float:
    """Lower bound on the single-protocol rate of the substituted theta-family tuple."""
    if not -SLACK <= theta <= math.pi / 2 + SLACK:
        raise DomainError(f"theta = {theta} outside [0, pi/2]")
    sin2 = max(0.0, math.sin(2.0 * theta))
    cos = min(1.0, max(-1.0, math.cos(theta)))
    return 1.0 - binary_entropy(0.5 + cos / 2.0) - binary_entropy(0.5 + math.sqrt(sin2) / 2.0)


def _check_s(s):
    if not -SLACK <= s <= N_MAX + SLACK:
        raise DomainError(f"s = {s} outside [0, 2(sqrt 2 - 1)]")
    return min(N_MAX, max(0.0, s))


def r(s: float) -> float:
    """Eve's information bound as a function of the CHSH violation ``s``."""
    s = _check_s(s)
    return binary_entropy(0.5 + math.sqrt(_radical(s + s * s / 4.0)) / 2.0)


def g_prime(s: float) -> float:
    s = _check_s(s)
    return 1.0 - binary_entropy(0.75 + s / 8.0) - r(s)


def g(s: float) -> float:
    """Nondecreasing lower bound on the key rate in terms of the CHSH violation."""
    return max(0.0, g_prime(s))


def bisect(f, lo, hi, xtol=1e-13):
    """Root of ``f`` on ``[lo, hi]`` given a sign change; plain bisection."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError("no sign change on the bracket")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=1)
def threshold() -> float:
    """Root of ``g_prime`` in ``(0, N_MAX)``: above it the bound ``g`` is positive."""
    return bisect(g_prime, 0.0, N_MAX)


def r0_positivity_edge() -> float:
    """Largest theta in ``[0, pi/2]`` where :func:`r0_theta_bound` is positive."""
    return bisect(r0_theta_bound, math.pi / 4, math.pi / 2)


@dataclass(frozen=True)
class RateReport:
    S: float
    N_tilde: float
    mutual_info: float
    eve_bound: float
    dw_lower: float
    g_of_N: float
    threshold_flag: bool

    def to_dict(self) -> dict:
        return asdict(self)


def rate_report(P: DistributionTuple) -> RateReport:
    """Evaluate every bound for ``P`` (or its best 2x2 restriction).

    ``mutual_info`` belongs to the masked protocol ``A = E A_xi``, ``B = E B_zeta``
    on the restriction's best-correlated input pair; ``dw_lower`` is that value
    minus ``eve_bound(S)``, clamped at zero.
    """
    Q = chsh_restricted(P)
    S = chsh_value(Q)
    N = max(0.0, S - LOCAL_BOUND)
    info = mutual_information_unbiased(float(np.max(np.abs(correlators(Q)))))
    eve = eve_bound(S)
    return RateReport(
        S=S,
        N_tilde=N,
        mutual_info=info,
        eve_bound=eve,
        dw_lower=max(0.0, info - eve),
        g_of_N=g(N),
        threshold_flag=bool(N > threshold()),
    )
