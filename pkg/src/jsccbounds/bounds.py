"""Converse (lower) bound on the minimum power needed to meet a profile.

Any scheme at power P obeys F(Q) <= ln(1 + P*Q), so
P_min >= sup_Q (exp(F(Q)) - 1) / Q.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from jsccbounds.profiles import Profile, ProfileKind, QualityGrid, _check_positive, eval_profile


class Limit(enum.Enum):
    AT_ZERO = "AtZero"
    AT_INFINITY = "AtInfinity"


@dataclass(frozen=True)
class LowerBoundResult:
    p_lower: float
    q_star: float | Limit
    attained: bool


def lower_bound_integrand(p: Profile, q):
    q = _check_positive(q)
    return np.expm1(eval_profile(p, q)) / q


def _limits(p: Profile) -> list[tuple[float, Limit]]:
    # order one: (exp(aQ/(1+aQ)) - 1)/Q -> alpha as Q -> 0
    if p.kind is ProfileKind.RATIONAL_ORDER1:
        return [(p.alpha, Limit.AT_ZERO), (0.0, Limit.AT_INFINITY)]
    if p.kind is ProfileKind.RATIONAL_ORDER2:
        return [(0.0, Limit.AT_ZERO), (0.0, Limit.AT_INFINITY)]
    return []


def lower_bound_pmin(p: Profile, grid: QualityGrid | None = None) -> LowerBoundResult:
    """Maximize the integrand by a log-grid scan plus golden-section refinement."""
    grid = grid or QualityGrid()
    q = grid.values()
    if p.kind is ProfileKind.TABULATED:
        lo, hi = p.q_range
        q = np.unique(np.concatenate([q[(q >= lo) & (q <= hi)], [lo, hi]]))

    vals = lower_bound_integrand(p, q)
    i = int(np.argmax(vals))
    best, q_star, attained = float(vals[i]), float(q[i]), False

    if 0 < i < len(q) - 1:
        attained = True
        a, b, c = q[i - 1], q[i], q[i + 1]
        if vals[i] > vals[i - 1] and vals[i] > vals[i + 1]:
            def neg(x):
                # golden may probe just outside the bracket
                return -float(lower_bound_integrand(p, min(max(x, a), c)))

            x = optimize.golden(neg, brack=(a, b, c), tol=1e-10)
            x = min(max(x, a), c)
            v = -neg(x)
            if v >= best:
                best, q_star = v, float(x)

    for value, tag in _limits(p):
        if value > best:
            best, q_star, attained = value, tag, False

    return LowerBoundResult(p_lower=best, q_star=q_star, attained=attained)
