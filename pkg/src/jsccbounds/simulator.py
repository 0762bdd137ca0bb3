"""Monte Carlo check of the finite-n distortion formulas.

The digital layer is not simulated: its codeword enters the receiver as
independent Gaussian interference of variance p_1, which is exactly what the
MMSE formulas assume. Trials are split into fixed-size chunks, each drawing
from its own Philox stream keyed by (seed, chunk index), so results do not
depend on how many workers run the chunks.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from jsccbounds.schemes import MatrixScheme

# normals per chunk
_CHUNK_DRAWS = 1 << 22


@dataclass(frozen=True)
class SimConfig:
    n: int
    power: float
    noise: float
    trials: int
    seed: int = 0
    p_1: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if self.power < 0 or self.p_1 < 0:
            raise ValueError("powers must be nonnegative")
        if not self.noise > 0:
            raise ValueError("noise must be positive")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SimResult:
    mean_distortion: float
    std_error: float
    trials: int
    seed: int
    params: dict

    def to_dict(self) -> dict:
        return {
            "mean": self.mean_distortion,
            "std_error": self.std_error,
            "trials": self.trials,
            "seed": self.seed,
            "params": self.params,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _stream(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


def _moments(x: np.ndarray) -> tuple[int, float, float]:
    mean = float(x.mean())
    return x.size, mean, float(np.sum((x - mean) ** 2))


def _combine(parts) -> tuple[int, float, float]:
    # pairwise update of (count, mean, M2), applied in chunk order
    n, mean, m2 = 0, 0.0, 0.0
    for nb, mb, m2b in parts:
        tot = n + nb
        delta = mb - mean
        mean += delta * nb / tot
        m2 += m2b + delta**2 * n * nb / tot
        n = tot
    return n, mean, m2


def _run_chunks(trials: int, per_chunk: int, work, workers: int) -> tuple[float, float]:
    sizes = [min(per_chunk, trials - s) for s in range(0, trials, per_chunk)]
    jobs = list(enumerate(sizes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda j: work(*j), jobs))
    else:
        parts = [work(*j) for j in jobs]
    n, mean, m2 = _combine(parts)
    se = math.sqrt(m2 / (n - 1) / n) if n > 1 else 0.0
    return mean, se


def simulate_uncoded(cfg: SimConfig, workers: int = 1) -> SimResult:
    """Per-symbol MSE of uncoded transmission with a linear MMSE receiver."""
    gain = math.sqrt(cfg.power / cfg.n)
    coeff = gain / (cfg.power + cfg.p_1 + cfg.noise)
    interference = math.sqrt(cfg.p_1 + cfg.noise)

    def work(chunk, size):
        rng = _stream(cfg.seed, chunk)
        x = rng.standard_normal((size, cfg.n))
        v = gain * x.sum(axis=1) + interference * rng.standard_normal(size)
        err = ((x - coeff * v[:, None]) ** 2).mean(axis=1)
        return _moments(err)

    mean, se = _run_chunks(cfg.trials, max(1, _CHUNK_DRAWS // cfg.n), work, workers)
    return SimResult(mean, se, cfg.trials, cfg.seed, {"kind": "uncoded", **asdict(cfg)})


def simulate_matrix_analog(
    ms: MatrixScheme, noise: float, trials: int, seed: int = 0, workers: int = 1
) -> SimResult:
    """Per-symbol MSE of the analog-layer estimator A_1 = K^T (K K^T + (p_1 + N) I)^-1."""
    if not isinstance(ms, MatrixScheme):
        raise TypeError("expected a MatrixScheme")
    if not noise > 0:
        raise ValueError("noise must be positive")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    k = ms.k_matrix
    gram = k @ k.T + (ms.p_1 + noise) * np.eye(ms.m)
    a1 = np.linalg.solve(gram, k).T  # n x m
    sd = math.sqrt(ms.p_1 + noise)

    def work(chunk, size):
        rng = _stream(seed, chunk)
        x = rng.standard_normal((size, ms.n))
        v = x @ k.T + sd * rng.standard_normal((size, ms.m))
        err = ((x - v @ a1.T) ** 2).mean(axis=1)
        return _moments(err)

    mean, se = _run_chunks(trials, max(1, _CHUNK_DRAWS // (ms.n + ms.m)), work, workers)
    params = {
        "kind": "matrix_analog",
        "k_matrix": k.tolist(),
        "p_1": ms.p_1,
        "noise": noise,
        "m": ms.m,
        "n": ms.n,
    }
    return SimResult(mean, se, trials, seed, params)
