"""Fidelity-quality profiles and quality grids."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from jsccbounds.errors import DomainError, RangeError


class ProfileKind(enum.Enum):
    RATIONAL_ORDER1 = "order1"
    RATIONAL_ORDER2 = "order2"
    TABULATED = "table"


@dataclass(frozen=True)
class Profile:
    """Target fidelity as a function of channel quality Q = 1/N.

    Rational profiles are ``alpha*Q**r / (1 + alpha*Q**r)`` with r = 1 or 2.
    Tabulated profiles interpolate linearly in (log Q, F).
    """

    kind: ProfileKind
    alpha: float = 1.0
    table: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.kind is ProfileKind.TABULATED:
            if self.table is None or len(self.table) < 2:
                raise ValueError("tabulated profile needs at least 2 points")
            qs = [q for q, _ in self.table]
            fs = [f for _, f in self.table]
            if any(q <= 0 for q in qs):
                raise ValueError("tabulated Q values must be positive")
            if any(b <= a for a, b in zip(qs, qs[1:])):
                raise ValueError("tabulated Q values must be strictly increasing")
            if any(not (f >= 0 and math.isfinite(f)) for f in fs):
                raise ValueError("tabulated F values must be finite and nonnegative")
        elif not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @classmethod
    def order1(cls, alpha: float) -> Profile:
        return cls(ProfileKind.RATIONAL_ORDER1, alpha)

    @classmethod
    def order2(cls, alpha: float) -> Profile:
        return cls(ProfileKind.RATIONAL_ORDER2, alpha)

    @classmethod
    def tabulated(cls, points) -> Profile:
        return cls(ProfileKind.TABULATED, table=tuple((float(q), float(f)) for q, f in points))

    @classmethod
    def from_csv(cls, path: str | Path) -> Profile:
        """Load a tabulated profile from a CSV file with header ``q,f``."""
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [n.strip() for n in reader.fieldnames] != ["q", "f"]:
                raise ValueError(f"{path}: expected header 'q,f'")
            rows = [(float(r["q"]), float(r["f"])) for r in reader]
        return cls.tabulated(rows)

    @property
    def is_rational(self) -> bool:
        return self.kind is not ProfileKind.TABULATED

    @property
    def order(self) -> int:
        if self.kind is ProfileKind.RATIONAL_ORDER1:
            return 1
        if self.kind is ProfileKind.RATIONAL_ORDER2:
            return 2
        raise AttributeError("tabulated profiles have no order")

    @property
    def q_range(self) -> tuple[float, float]:
        if self.table is None:
            return (0.0, math.inf)
        return (self.table[0][0], self.table[-1][0])

    def __call__(self, q):
        return eval_profile(self, q)

    def headroom(self, q):
        """Return 1 - F(q) for rational profiles, computed without cancellation.

        Tabulated profiles have no saturation level; ``None`` is returned.
        """
        if not self.is_rational:
            return None
        q = _check_positive(q)
        return 1.0 / (1.0 + self.alpha * q**self.order)


@dataclass(frozen=True)
class QualityGrid:
    q_min: float = 1e-4
    q_max: float = 1e4
    points: int = 2000
    spacing: str = "log"

    def __post_init__(self):
        if not 0 < self.q_min < self.q_max:
            raise ValueError(f"need 0 < q_min < q_max, got {self.q_min}, {self.q_max}")
        if self.points < 2:
            raise ValueError("grid needs at least 2 points")
        if self.spacing not in ("log", "linear"):
            raise ValueError(f"unknown spacing {self.spacing!r}")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            q = np.logspace(math.log10(self.q_min), math.log10(self.q_max), self.points)
        else:
            q = np.linspace(self.q_min, self.q_max, self.points)
        # pin the endpoints exactly; logspace rounds them
        q[0], q[-1] = self.q_min, self.q_max
        return q


def _check_positive(q):
    arr = np.asarray(q, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"argument must be positive, got {q}")
    return arr if arr.ndim else float(arr)


def eval_profile(p: Profile, q):
    """Evaluate the target fidelity at quality ``q`` (scalar or array)."""
    q = _check_positive(q)
    if p.kind is ProfileKind.TABULATED:
        lo, hi = p.q_range
        if np.any(np.asarray(q) < lo) or np.any(np.asarray(q) > hi):
            raise RangeError(f"q outside tabulated range [{lo}, {hi}]")
        tq = np.log([t[0] for t in p.table])
        tf = np.array([t[1] for t in p.table])
        out = np.interp(np.log(q), tq, tf)
        return out if np.ndim(out) else float(out)
    x = p.alpha * q**p.order
    return x / (1.0 + x)


def noise_to_quality(n):
    """Q = 1/N."""
    n = _check_positive(n)
    return 1.0 / n
