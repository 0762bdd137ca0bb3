"""Profile compliance and the achievable (upper) bound for order-two profiles.

For a rational order-two target with parameter alpha, the hybrid scheme with
digital layer (p_1, q_1) complies iff its analog power p_a satisfies

* ``p_a >= alpha*q_1 + alpha*q_1**2*p_1`` (quality below the threshold), and
* ``p_a >= g(Q)`` for every ``Q >= q_1``.

The closed-form rule replaces ``sup g`` by the decreasing majorant
``(1/Q + p_1) / ln(1 + p_1*q_1)`` evaluated at ``q_1``; the exact rule maximizes
``g`` numerically. Total power ``p_a + p_1`` is then minimized over a
log-spaced (p_1, q_1) grid with zoom-in refinement.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from jsccbounds.bounds import lower_bound_pmin
from jsccbounds.errors import DomainError, GridTruncationWarning, InternalConsistencyError
from jsccbounds.profiles import Profile, QualityGrid, eval_profile
from jsccbounds.schemes import HybridParams, SchemeParams, scheme_deficit, scheme_fidelity

FEASIBILITY_TOL = 1e-9

# validation grid for order-two results; the above-threshold requirement is driven by Q -> inf
VALIDATION_GRID = QualityGrid(1e-4, 1e6, 4000)


class PaRule(enum.Enum):
    CLOSED_FORM = "closed"
    EXACT = "exact"


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of a compliance check.

    ``margin`` is the worst pointwise margin. For rational profiles it is the
    excess fidelity as a fraction of the target's headroom,
    ``(F - target) / (1 - target)``; for tabulated profiles it is the plain
    difference ``F - target``. Either way its sign is the sign of F - target.
    """

    feasible: bool
    worst_q: float
    margin: float
    normalized: bool


@dataclass(frozen=True)
class GridSpec:
    p1_range: tuple[float, float] = (1e-3, 1e3)
    q1_range: tuple[float, float] = (1e-3, 1e3)
    points_per_axis: int = 60
    refinement_rounds: int = 3

    def __post_init__(self):
        for lo, hi in (self.p1_range, self.q1_range):
            if not 0 < lo < hi:
                raise ValueError(f"invalid search range ({lo}, {hi})")
        if self.points_per_axis < 10:
            raise ValueError("points_per_axis must be at least 10")
        if self.refinement_rounds < 0:
            raise ValueError("refinement_rounds must be nonnegative")


@dataclass(frozen=True)
class UpperBoundResult:
    p_total: float
    params: HybridParams
    alpha: float
    rule: PaRule = PaRule.CLOSED_FORM
    search_log: list[tuple[float, float, float, float]] | None = field(default=None, compare=False)


# -- compliance -----------------------------------------------------------------

def _thresholds(params: SchemeParams) -> tuple[float, ...]:
    return (params.q_1,) if isinstance(params, HybridParams) else params.thresholds


def compliance_margin(params: SchemeParams, profile: Profile, q):
    """Pointwise margin of the scheme over the profile (see FeasibilityReport)."""
    headroom = profile.headroom(q)
    if headroom is None:
        return scheme_fidelity(params, q) - eval_profile(profile, q)
    return 1.0 - scheme_deficit(params, q) / headroom


def compliance_points(params: SchemeParams, grid: QualityGrid, profile: Profile | None = None) -> np.ndarray:
    """Grid points plus each threshold and the float just below it."""
    q = grid.values()
    extra = []
    for qk in _thresholds(params):
        extra += [np.nextafter(qk, 0.0), qk]
    q = np.concatenate([q, [x for x in extra if grid.q_min <= x <= grid.q_max]])
    if profile is not None and not profile.is_rational:
        # table knots are where piecewise-linear targets have kinks
        lo, hi = max(profile.q_range[0], grid.q_min), min(profile.q_range[1], grid.q_max)
        knots = [t for t, _ in profile.table]
        q = np.concatenate([q, knots, [lo, hi]])
        q = q[(q >= lo) & (q <= hi)]
    return np.unique(q)


def check_compliance(
    params: SchemeParams, profile: Profile, grid: QualityGrid | None = None
) -> FeasibilityReport:
    grid = grid or QualityGrid()
    q = compliance_points(params, grid, profile)
    if q.size == 0:
        raise ValueError("quality grid does not overlap the profile's range")
    margins = np.asarray(compliance_margin(params, profile, q))
    i = int(np.argmin(margins))
    m = float(margins[i])
    return FeasibilityReport(
        feasible=m >= -FEASIBILITY_TOL, worst_q=float(q[i]), margin=m, normalized=profile.is_rational
    )


# -- minimum analog power for a given digital layer ----------------------------

def _check_layer(p_1, q_1):
    if not p_1 > 0:
        raise DomainError("p_1 must be positive: the tail bound divides by ln(1 + p_1*q_1)")
    if not q_1 > 0:
        raise DomainError("q_1 must be positive")


def below_threshold_requirement(alpha, p_1, q_1):
    """Analog power needed for Q < q_1; binding as Q -> q_1 from below."""
    return alpha * q_1 + alpha * q_1**2 * p_1


def min_pa_closed_form(alpha: float, p_1: float, q_1: float) -> float:
    _check_layer(p_1, q_1)
    tail = (1.0 / q_1 + p_1) / math.log1p(p_1 * q_1)
    return max(below_threshold_requirement(alpha, p_1, q_1), tail)


def g_requirement(alpha, p_1, q_1, q):
    """Analog power needed at quality q >= q_1 (the function g)."""
    q = np.asarray(q, dtype=float)
    jump = np.log1p(p_1 * q_1)
    headroom = 1.0 / (1.0 + alpha * q**2)
    target = alpha * q**2 * headroom
    return (target - jump) * (1.0 + p_1 * q) / (q * (headroom + jump))


def g_limit(p_1, q_1):
    """Limit of g as Q -> infinity."""
    jump = math.log1p(p_1 * q_1)
    return (1.0 - jump) * p_1 / jump


def sup_g(alpha: float, p_1: float, q_1: float, grid: QualityGrid | None = None) -> float:
    """sup of g over Q >= q_1: log-grid scan, golden refinement, and the Q -> inf limit."""
    grid = grid or QualityGrid()
    upper = max(grid.q_max, q_1 * 1e6)
    q = np.logspace(math.log10(q_1), math.log10(upper), grid.points)
    q[0] = q_1
    g = g_requirement(alpha, p_1, q_1, q)
    i = int(np.argmax(g))
    best = float(g[i])
    if 0 < i < len(q) - 1 and g[i] > g[i - 1] and g[i] > g[i + 1]:
        a, c = q[i - 1], q[i + 1]

        def neg(x):
            return -float(g_requirement(alpha, p_1, q_1, min(max(x, a), c)))

        x = optimize.golden(neg, brack=(a, q[i], c), tol=1e-10)
        best = max(best, -neg(x))
    # for jumps >= 1, g rises toward its (negative) limit and the limit covers the tail
    if g[-1] > g[-2] and math.log1p(p_1 * q_1) < 1:
        warnings.warn(
            f"g still increasing at Q={upper:g} (alpha={alpha}, p_1={p_1}, q_1={q_1})",
            GridTruncationWarning,
            stacklevel=2,
        )
    return max(best, g_limit(p_1, q_1))


def min_pa_exact(alpha: float, p_1: float, q_1: float, grid: QualityGrid | None = None) -> float:
    _check_layer(p_1, q_1)
    return max(below_threshold_requirement(alpha, p_1, q_1), sup_g(alpha, p_1, q_1, grid))


# -- search over (p_1, q_1) ------------------------------------------------------

_EXACT_SCAN = np.logspace(0.0, 8.0, 400)


def _pa_grid(alpha, p1, q1, rule: PaRule):
    """Vectorized min p_a on broadcast arrays p1, q1 (exact rule uses a coarse Q scan)."""
    jump = np.log1p(p1 * q1)
    below = below_threshold_requirement(alpha, p1, q1)
    if rule is PaRule.CLOSED_FORM:
        return np.maximum(below, (1.0 / q1 + p1) / jump)
    q = q1[..., None] * _EXACT_SCAN
    g = g_requirement(alpha, p1[..., None], q1[..., None], q).max(axis=-1)
    g = np.maximum(g, (1.0 - jump) * p1 / jump)
    return np.maximum(below, g)


def _pa_point(alpha, p_1, q_1, rule: PaRule) -> float:
    if rule is PaRule.CLOSED_FORM:
        return min_pa_closed_form(alpha, p_1, q_1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GridTruncationWarning)
        return min_pa_exact(alpha, p_1, q_1)


def _search(alpha, rule, search: GridSpec, log):
    lp_lo, lp_hi = np.log10(search.p1_range)
    lq_lo, lq_hi = np.log10(search.q1_range)
    centre = None
    half_p, half_q = (lp_hi - lp_lo) / 2, (lq_hi - lq_lo) / 2
    best = None  # (p_total, p_1, q_1, p_a)
    for _ in range(search.refinement_rounds + 1):
        if centre is None:
            ap = np.linspace(lp_lo, lp_hi, search.points_per_axis)
            aq = np.linspace(lq_lo, lq_hi, search.points_per_axis)
        else:
            ap = np.linspace(max(lp_lo, centre[0] - half_p), min(lp_hi, centre[0] + half_p), search.points_per_axis)
            aq = np.linspace(max(lq_lo, centre[1] - half_q), min(lq_hi, centre[1] + half_q), search.points_per_axis)
        p1 = 10.0 ** ap[:, None] * np.ones_like(aq)[None, :]
        q1 = np.ones_like(ap)[:, None] * 10.0 ** aq[None, :]
        pa = _pa_grid(alpha, p1, q1, rule)
        total = pa + p1
        if log is not None:
            log.extend(zip(p1.ravel().tolist(), q1.ravel().tolist(), pa.ravel().tolist(), total.ravel().tolist()))
        # rows are ordered by increasing p_1, so argmin breaks ties toward smaller p_1
        i, j = np.unravel_index(int(np.argmin(total)), total.shape)
        cand = (float(total[i, j]), float(p1[i, j]), float(q1[i, j]), float(pa[i, j]))
        if best is None or cand[0] < best[0] or (cand[0] == best[0] and cand[1] < best[1]):
            best = cand
        centre = (math.log10(best[1]), math.log10(best[2]))
        half_p /= 10.0
        half_q /= 10.0
    return best


def optimize_upper_bound(
    alpha: float,
    pa_rule: PaRule = PaRule.CLOSED_FORM,
    search: GridSpec | None = None,
    keep_log: bool = False,
) -> UpperBoundResult:
    """Minimize p_a + p_1 over the digital layer for the order-two profile."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    search = search or GridSpec()
    log = [] if keep_log else None

    _, p_1, q_1, _ = _search(alpha, PaRule.CLOSED_FORM, search, log if pa_rule is PaRule.CLOSED_FORM else None)
    best = (_pa_point(alpha, p_1, q_1, pa_rule) + p_1, p_1, q_1)
    if pa_rule is PaRule.EXACT:
        # the closed-form optimum is a valid candidate, which keeps exact <= closed
        _, e_p1, e_q1, _ = _search(alpha, PaRule.EXACT, search, log)
        cand = (_pa_point(alpha, e_p1, e_q1, pa_rule) + e_p1, e_p1, e_q1)
        if cand[0] < best[0]:
            best = cand

    _, p_1, q_1 = best
    params = HybridParams(_pa_point(alpha, p_1, q_1, pa_rule), p_1, q_1)
    report = check_compliance(params, Profile.order2(alpha), VALIDATION_GRID)
    if not report.feasible:
        raise InternalConsistencyError(f"optimizer result fails compliance: {report} for {params}")
    return UpperBoundResult(params.total, params, alpha, pa_rule, log)


def db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    p_lower: float
    p_upper: float
    p_a: float
    p_1: float
    q_1: float

    @property
    def gap_db(self) -> float:
        return db(self.p_upper / self.p_lower)


def sweep(alphas, pa_rule: PaRule = PaRule.CLOSED_FORM, search: GridSpec | None = None,
          grid: QualityGrid | None = None, workers: int = 1) -> list[SweepRow]:
    """Lower and upper bounds for the order-two profile across alpha values."""

    def one(alpha):
        lo = lower_bound_pmin(Profile.order2(alpha), grid)
        up = optimize_upper_bound(alpha, pa_rule, search)
        if up.p_total < lo.p_lower:
            raise InternalConsistencyError(f"upper bound {up.p_total} below lower bound {lo.p_lower}")
        return SweepRow(alpha, lo.p_lower, up.p_total, up.params.p_a, up.params.p_1, up.params.q_1)

    alphas = [float(a) for a in alphas]
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(one, alphas))
    return [one(a) for a in alphas]
