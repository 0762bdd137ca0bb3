"""Achievable fidelity and finite-bandwidth distortion of the coding schemes.

Three schemes are covered:

* uncoded transmission, ``U = sqrt(P/n) * sum(X)``;
* the hybrid scheme: one analog layer of power ``p_a`` plus one dirty-paper
  coded digital layer of power ``p_1`` decodable for Q >= q_1;
* its K-layer generalization.

The matrix helpers evaluate the general trace/log-det formulas for arbitrary
encoding matrices and are used to cross-check the scalar closed forms.
All logarithms are natural.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from jsccbounds.errors import DegenerateQuantizerError, DomainError, NoRootError
from jsccbounds.profiles import QualityGrid, _check_positive


@dataclass(frozen=True)
class HybridParams:
    p_a: float
    p_1: float
    q_1: float

    def __post_init__(self):
        if self.p_a < 0 or self.p_1 < 0:
            raise ValueError("layer powers must be nonnegative")
        if not self.q_1 > 0:
            raise ValueError("q_1 must be positive")

    @classmethod
    def uncoded(cls, power: float) -> HybridParams:
        """All power in the analog layer; the threshold is then irrelevant."""
        return cls(p_a=power, p_1=0.0, q_1=1.0)

    @property
    def total(self) -> float:
        return self.p_a + self.p_1

    def as_layered(self) -> LayeredParams:
        return LayeredParams(self.p_a, (self.p_1,), (self.q_1,))


@dataclass(frozen=True)
class LayeredParams:
    p_a: float
    layer_powers: tuple[float, ...]
    thresholds: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "layer_powers", tuple(float(x) for x in self.layer_powers))
        object.__setattr__(self, "thresholds", tuple(float(x) for x in self.thresholds))
        if len(self.layer_powers) == 0 or len(self.layer_powers) != len(self.thresholds):
            raise ValueError("need K >= 1 layers with one threshold each")
        if self.p_a < 0 or any(p < 0 for p in self.layer_powers):
            raise ValueError("layer powers must be nonnegative")
        if any(not q > 0 for q in self.thresholds):
            raise ValueError("thresholds must be positive")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly increasing")

    @property
    def total(self) -> float:
        return self.p_a + sum(self.layer_powers)


SchemeParams = Union[HybridParams, LayeredParams]


@dataclass(frozen=True, eq=False)
class MatrixScheme:
    """Encoder matrix K (m x n), quantization-error covariance C_E1 (n x n) and digital power."""

    k_matrix: np.ndarray
    c_e1: np.ndarray
    p_1: float

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.k_matrix, dtype=float))
        c = np.atleast_2d(np.asarray(self.c_e1, dtype=float))
        object.__setattr__(self, "k_matrix", k)
        object.__setattr__(self, "c_e1", c)
        if c.shape != (k.shape[1], k.shape[1]):
            raise ValueError(f"C_E1 must be {k.shape[1]}x{k.shape[1]}, got {c.shape}")
        if not np.allclose(c, c.T, atol=1e-12):
            raise ValueError("C_E1 must be symmetric")
        ev = np.linalg.eigvalsh(c)
        if ev[0] < -1e-12 or ev[-1] > 1 + 1e-12:
            raise ValueError("C_E1 must satisfy 0 <= C_E1 <= I")
        if self.p_1 < 0:
            raise ValueError("p_1 must be nonnegative")
        if not np.all(np.isfinite(k)):
            raise ValueError("K must be finite")

    @property
    def m(self) -> int:
        return self.k_matrix.shape[0]

    @property
    def n(self) -> int:
        return self.k_matrix.shape[1]

    @property
    def analog_power(self) -> float:
        return float(np.sum(self.k_matrix**2)) / self.m

    @classmethod
    def repetition(cls, n: int, p_a: float, p_1: float, beta: float = 1.0) -> MatrixScheme:
        """m = 1, K = [k, ..., k] with n*k**2 = p_a, and C_E1 = beta*I."""
        k = math.sqrt(p_a / n)
        return cls(np.full((1, n), k), beta * np.eye(n), p_1)


@dataclass(frozen=True)
class FidelityCurve:
    q: tuple[float, ...]
    f: tuple[float, ...]

    def __post_init__(self):
        if len(self.q) != len(self.f):
            raise ValueError("q and f must have equal length")
        if any(b <= a for a, b in zip(self.q, self.q[1:])):
            raise ValueError("q must be strictly increasing")
        if any(not x >= 0 for x in self.f):
            raise ValueError("fidelity must be nonnegative")

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.q, self.f))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q", "f"])
        for q, f in zip(self.q, self.f):
            w.writerow([f"{q:.12g}", f"{f:.12g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> FidelityCurve:
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(tuple(float(r["q"]) for r in rows), tuple(float(r["f"]) for r in rows))


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def _check_nonneg(name, x):
    if not x >= 0:
        raise DomainError(f"{name} must be nonnegative, got {x}")


# -- uncoded --------------------------------------------------------------------

def uncoded_fidelity(p: float, q):
    _check_nonneg("power", p)
    q = _check_positive(q)
    return p * q / (1.0 + p * q)


def uncoded_distortion(p: float, n_noise: float, kappa: float) -> float:
    """Distortion of uncoded transmission with bandwidth factor kappa = 1/n."""
    _check_nonneg("power", p)
    _check_nonneg("kappa", kappa)
    n_noise = _check_positive(n_noise)
    return 1.0 - kappa * p / (p + n_noise)


# -- hybrid and layered fidelity ----------------------------------------------

def layer_jumps(lp: LayeredParams) -> np.ndarray:
    """Fidelity jump contributed by each digital layer at its threshold.

    Layer k sees the layers above it as noise, so its jump is
    ln((1 + S_k Q_k) / (1 + S_{k+1} Q_k)) with S_k the power of layers k..K.
    """
    powers = np.asarray(lp.layer_powers)
    tail = np.concatenate([np.cumsum(powers[::-1])[::-1], [0.0]])
    qk = np.asarray(lp.thresholds)
    return np.log1p(powers * qk / (1.0 + tail[1:] * qk))


def hybrid_fidelity(hp: HybridParams, q):
    q = _check_positive(q)
    analog = hp.p_a * q / (1.0 + hp.total * q)
    return _out(analog + np.where(q >= hp.q_1, math.log1p(hp.p_1 * hp.q_1), 0.0))


def multilayer_fidelity(lp: LayeredParams, q):
    q = _check_positive(q)
    analog = lp.p_a * q / (1.0 + lp.total * q)
    jumps = layer_jumps(lp)
    reached = np.asarray(q)[..., None] >= np.asarray(lp.thresholds)
    return _out(analog + np.sum(np.where(reached, jumps, 0.0), axis=-1))


def scheme_fidelity(params: SchemeParams, q):
    if isinstance(params, HybridParams):
        return hybrid_fidelity(params, q)
    return multilayer_fidelity(params, q)


def scheme_deficit(params: SchemeParams, q):
    """1 - F(q), computed so that values near saturation keep their precision."""
    q = _check_positive(q)
    lp = params.as_layered() if isinstance(params, HybridParams) else params
    digital = lp.total - lp.p_a
    base = (1.0 + digital * q) / (1.0 + lp.total * q)
    reached = np.asarray(q)[..., None] >= np.asarray(lp.thresholds)
    return _out(base - np.sum(np.where(reached, layer_jumps(lp), 0.0), axis=-1))


def sample_curve(params: SchemeParams, grid: QualityGrid) -> FidelityCurve:
    q = grid.values()
    return FidelityCurve(tuple(q.tolist()), tuple(np.asarray(scheme_fidelity(params, q)).tolist()))


# -- finite-kappa distortion of the hybrid scheme ----------------------------

def beta_polynomial(n: int, hp: HybridParams, beta):
    """f_n(beta); the decodability condition of the digital layer is f_n(beta) >= 0."""
    c = 1.0 + hp.p_1 * hp.q_1
    return beta**n * (1.0 + hp.total * hp.q_1) * c - beta * hp.p_a * hp.q_1 - c


def beta_root(n: int, hp: HybridParams) -> float:
    """Smallest admissible quantization-error variance, by bisection on (0, 1)."""
    if n < 1:
        raise DomainError(f"n must be a positive integer, got {n}")
    lo, hi = 0.0, 1.0
    if not (beta_polynomial(n, hp, lo) < 0 < beta_polynomial(n, hp, hi)):
        raise NoRootError(f"f_n has no sign change on (0, 1) for {hp}")
    # bisect to machine resolution; at n ~ 1e3 the slope is ~1e5 so 1e-12 in
    # beta alone would leave residuals far above 1e-9
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if beta_polynomial(n, hp, mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo if abs(beta_polynomial(n, hp, lo)) < abs(beta_polynomial(n, hp, hi)) else hi


def beta_choice(n: int, hp: HybridParams) -> float:
    """The simple admissible choice a**(1/n), a = 1/(1 + p_1*q_1)."""
    return (1.0 + hp.p_1 * hp.q_1) ** (-1.0 / n)


def hybrid_distortion_below(hp: HybridParams, q: float, kappa: float) -> float:
    """Distortion for q < q_1 (digital layer undecodable, acts as interference)."""
    q = _check_positive(q)
    _check_nonneg("kappa", kappa)
    if q >= hp.q_1:
        raise DomainError(f"q={q} is not below the threshold q_1={hp.q_1}")
    return 1.0 - kappa * hp.p_a * q / (1.0 + hp.total * q)


def hybrid_distortion_above(hp: HybridParams, q: float, kappa: float) -> float:
    """Distortion for q >= q_1 with quantization-error variance a**kappa."""
    q = _check_positive(q)
    _check_nonneg("kappa", kappa)
    if q < hp.q_1:
        raise DomainError(f"q={q} is below the threshold q_1={hp.q_1}")
    ak = (1.0 + hp.p_1 * hp.q_1) ** (-kappa)
    return ak * (1.0 - kappa * ak * hp.p_a * q / (1.0 + (ak * hp.p_a + hp.p_1) * q))


def hybrid_distortion(hp: HybridParams, q: float, kappa: float) -> float:
    if q >= hp.q_1:
        return hybrid_distortion_above(hp, q, kappa)
    return hybrid_distortion_below(hp, q, kappa)


# -- general matrix formulas ---------------------------------------------------

def _noise_cov(ms: MatrixScheme, n_noise: float) -> np.ndarray:
    n_noise = _check_positive(n_noise)
    return (ms.p_1 + n_noise) * np.eye(ms.m)


def matrix_analog_distortion(ms: MatrixScheme, n_noise: float) -> float:
    """Per-symbol MMSE of X from V = KX + interference + noise."""
    k = ms.k_matrix
    gram = k @ k.T + _noise_cov(ms, n_noise)
    explained = np.sum(k * np.linalg.solve(gram, k))
    return (ms.n - explained) / ms.n


def matrix_refinement_distortion(ms: MatrixScheme, n_noise: float) -> float:
    """Per-symbol MMSE of E_1 once the digital layer has been decoded."""
    kc = ms.k_matrix @ ms.c_e1
    gram = kc @ ms.k_matrix.T + _noise_cov(ms, n_noise)
    explained = np.sum(kc * np.linalg.solve(gram, kc))
    return (np.trace(ms.c_e1) - explained) / ms.n


def dpc_rate_constraint(ms: MatrixScheme, n1: float) -> float:
    """Slack of the digital layer's rate condition at noise level n1 (>= 0 means decodable)."""
    n1 = _check_positive(n1)
    if np.linalg.eigvalsh(ms.c_e1)[0] <= 1e-300:
        raise DegenerateQuantizerError("C_E1 is singular")
    k, c = ms.k_matrix, ms.c_e1
    noise = (ms.p_1 + n1) * np.eye(ms.m)
    _, ld_num = np.linalg.slogdet(k @ c @ k.T + noise)
    _, ld_c = np.linalg.slogdet(c)
    _, ld_den = np.linalg.slogdet(k @ k.T + noise)
    rate = ms.m / (2 * ms.n) * math.log1p(ms.p_1 / n1)
    needed = (ld_num - ld_c - ld_den) / (2 * ms.n)
    return rate - needed
