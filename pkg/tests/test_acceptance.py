"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v``.
"""

import csv
import io
import math
import time

import numpy as np
import pytest

from jsccbounds import cli
from jsccbounds.bounds import lower_bound_pmin
from jsccbounds.optimizer import FEASIBILITY_TOL, check_compliance, optimize_upper_bound
from jsccbounds.profiles import Profile, QualityGrid
from jsccbounds.schemes import (
    HybridParams,
    LayeredParams,
    MatrixScheme,
    beta_choice,
    beta_polynomial,
    beta_root,
    hybrid_distortion,
    hybrid_fidelity,
    matrix_analog_distortion,
    matrix_refinement_distortion,
    multilayer_fidelity,
)
from jsccbounds.simulator import SimConfig, simulate_matrix_analog, simulate_uncoded


@pytest.fixture
def report(capsys):
    def _report(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return _report


def _cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    assert code == 0
    return out


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_c01_uncoded_optimal_order1(report):
    t0 = time.perf_counter()
    problems = []
    for alpha in (0.1, 1.0, 10.0):
        lb = lower_bound_pmin(Profile.order1(alpha))
        if not abs(lb.p_lower - alpha) / alpha < 1e-6:
            problems.append(f"lower bound {lb.p_lower} for alpha={alpha}")
        rep = check_compliance(HybridParams.uncoded(alpha), Profile.order1(alpha))
        if not (rep.margin >= -1e-9 and abs(rep.margin) <= 1e-9):
            problems.append(f"margin {rep.margin} for alpha={alpha}")
    dt = time.perf_counter() - t0
    report(1, not problems and dt < 1.0, f"uncoded optimality for order one, {dt:.3f}s {problems}")


def test_c02_slope_consistency(report):
    t0 = time.perf_counter()
    hp = HybridParams(1.0, 1.0, 1.0)
    kappas = (1e-2, 5e-3, 2.5e-3)
    details = []
    ok = True
    for q in (0.5, 1.0, 2.0, 10.0):
        errs = [abs((1 - hybrid_distortion(hp, q, k)) / k - hybrid_fidelity(hp, q)) for k in kappas]
        for a, b in zip(errs, errs[1:]):
            # below q_1 the distortion is exactly linear in kappa: error is rounding only
            converged = b <= 1e-12 and a <= 1e-12
            ok &= converged or (b > 0 and a / b >= 1.5)
        details.append(f"q={q}: " + ", ".join(f"{e:.3g}" for e in errs))
    dt = time.perf_counter() - t0
    report(2, ok and dt < 1.0, f"first-order slope convergence, {dt:.3f}s [{'; '.join(details)}]")


def test_c03_beta_root(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    worst, problems = 0.0, []
    for pa, p1, q1 in rng.uniform(0.1, 10.0, size=(20, 3)):
        hp = HybridParams(pa, p1, q1)
        roots = []
        for n in (1, 10, 100, 1000):
            b = beta_root(n, hp)
            res = abs(beta_polynomial(n, hp, b))
            worst = max(worst, res)
            if res > 1e-9 or not 0 < b < 1:
                problems.append(f"root {b} residual {res} for n={n}, {hp}")
            if beta_polynomial(n, hp, beta_choice(n, hp)) < 0:
                problems.append(f"a^(1/n) inadmissible for n={n}, {hp}")
            roots.append(b)
        if any(b2 <= b1 for b1, b2 in zip(roots, roots[1:])):
            problems.append(f"roots not increasing in n: {roots}")
    dt = time.perf_counter() - t0
    report(3, not problems and dt < 1.0, f"beta root, max residual {worst:.2e}, {dt:.3f}s {problems[:3]}")


def test_c04_matrix_scalar_equivalence(report):
    t0 = time.perf_counter()
    pa, p1, noise = 1.7, 0.6, 0.9
    q = 1 / noise
    hp = HybridParams(pa, p1, 1.1)
    worst = 0.0
    for n in (1, 2, 10, 100):
        kappa = 1 / n
        analog = matrix_analog_distortion(MatrixScheme.repetition(n, pa, p1), noise)
        worst = max(worst, abs(analog - (1 - kappa * pa * q / (1 + (pa + p1) * q))))
        for beta in (beta_choice(n, hp), beta_root(n, hp), 0.37):
            refine = matrix_refinement_distortion(MatrixScheme.repetition(n, pa, p1, beta), noise)
            scalar = beta * (1 - kappa * beta * pa * q / (1 + (beta * pa + p1) * q))
            worst = max(worst, abs(refine - scalar))
    dt = time.perf_counter() - t0
    report(4, worst <= 1e-10 and dt < 1.0, f"matrix vs scalar, max diff {worst:.2e}, {dt:.3f}s")


def test_c05_power_gap_sweep(report, capsys):
    t0 = time.perf_counter()
    rows = _rows(_cli(capsys, "optimize", "--alpha-min", "1e-2", "--alpha-max", "1e4"))
    dt = time.perf_counter() - t0
    alpha = np.array([float(r["alpha"]) for r in rows])
    lower = np.array([float(r["p_lower"]) for r in rows])
    upper = np.array([float(r["p_upper"]) for r in rows])
    gap = np.array([float(r["gap_db"]) for r in rows])
    ordered = bool(np.all(upper >= lower))
    high = gap[alpha >= 1e2]
    # monotone trend: no drop beyond grid noise; flattening: small spread at the high end
    trend = bool(np.all(np.diff(gap) >= -0.05)) or bool(high.mean() >= gap[alpha < 1].mean() - 0.05)
    flat = bool(np.ptp(high) <= 0.5)
    in_band = bool(np.all((high >= 10.0) & (high <= 16.0)))
    detail = (
        f"ordered={ordered} trend={trend} flat={flat} gap_in_[10,16]dB={in_band} "
        f"(gap at alpha>=1e2: {high.min():.3f}..{high.max():.3f} dB), {dt:.1f}s"
    )
    report(5, ordered and trend and flat and in_band and dt < 120, detail)


def test_c06_compliance_curve(report, capsys):
    t0 = time.perf_counter()
    res = optimize_upper_bound(1.0)
    hp = res.params
    out = _cli(capsys, "curve", "--profile", "order2", "--alpha", "1", "--pa", repr(hp.p_a), "--p1", repr(hp.p_1),
               "--q1", repr(hp.q_1), "--q-min", "1e-4", "--q-max", "1e6")
    dt = time.perf_counter() - t0
    rows = _rows(out)
    q = np.array([float(r["q"]) for r in rows])
    f = np.array([float(r["f_scheme"]) for r in rows])
    margin = np.array([float(r["margin"]) for r in rows])
    jump = math.log1p(hp.p_1 * hp.q_1)
    steps = np.diff(f)
    big = np.flatnonzero(steps > 0.5 * jump)
    single = len(big) == 1 and abs(q[big[0] + 1] - hp.q_1) <= 1e-11 * hp.q_1
    size_ok = single and abs(steps[big[0]] - jump) <= 1e-9
    nonneg = bool(margin.min() >= -FEASIBILITY_TOL)
    covers = q[0] <= 1e-4 and q[-1] >= 1e6
    detail = (f"jumps={len(big)} size_err={abs(steps[big[0]] - jump) if len(big) else float('nan'):.2e} "
              f"min margin={margin.min():.3e}, {dt:.2f}s")
    report(6, single and size_ok and nonneg and covers and dt < 5, detail)


def test_c07_uncoded_infeasible(report):
    t0 = time.perf_counter()
    grid = QualityGrid(1e-4, 1e7)
    rep = check_compliance(HybridParams.uncoded(1e6), Profile.order2(1.0), grid)
    dt = time.perf_counter() - t0
    ok = not rep.feasible and rep.worst_q == grid.q_max and dt < 1.0
    report(7, ok, f"feasible={rep.feasible} worst_q={rep.worst_q:g} margin={rep.margin:.3g}, {dt:.3f}s")


def test_c08_monte_carlo(report):
    t0 = time.perf_counter()
    res = simulate_uncoded(SimConfig(n=100, power=1.0, noise=1.0, trials=1_000_000, seed=7))
    z = [abs(res.mean_distortion - 0.995) / res.std_error]
    rng = np.random.default_rng(77)
    for i in range(5):
        m, n = int(rng.integers(1, 3)), int(rng.integers(2, 6))
        ms = MatrixScheme(rng.normal(size=(m, n)), np.eye(n), float(rng.uniform(0, 1)))
        noise = float(rng.uniform(0.2, 2.0))
        sim = simulate_matrix_analog(ms, noise, 200_000, seed=100 + i)
        z.append(abs(sim.mean_distortion - matrix_analog_distortion(ms, noise)) / sim.std_error)
    dt = time.perf_counter() - t0
    report(8, max(z) <= 4 and dt < 30, f"|z| = {', '.join(f'{v:.2f}' for v in z)}, {dt:.1f}s")


def test_c09_multilayer(report):
    t0 = time.perf_counter()
    grid = QualityGrid().values()
    worst = 0.0
    for hp in (HybridParams(1.0, 1.0, 1.0), HybridParams(2.5, 0.3, 0.05), HybridParams(0.2, 4.0, 300.0)):
        worst = max(worst, float(np.max(np.abs(multilayer_fidelity(hp.as_layered(), grid) - hybrid_fidelity(hp, grid)))))
    # jumps from an independent mpmath evaluation of the staircase formulas
    lp = LayeredParams(2.0, (0.5, 1.0, 2.0), (0.5, 2.0, 5.0))
    expected = [0.09531017980432494, 0.3364722366212129, 2.3978952727983707]
    q = np.unique(np.concatenate([grid, lp.thresholds, np.nextafter(lp.thresholds, 0)]))
    f = multilayer_fidelity(lp, q)
    steps = np.diff(f)
    jumps_at = np.flatnonzero(steps > 0.05)
    located = [float(q[i + 1]) for i in jumps_at] == list(lp.thresholds)
    sizes = [float(steps[i]) for i in jumps_at]
    sizes_ok = len(sizes) == 3 and all(abs(a - b) <= 1e-12 for a, b in zip(sizes, expected))
    upward = bool(np.all(steps >= 0))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and located and sizes_ok and upward and dt < 1.0
    report(9, ok, f"K=1 max diff {worst:.1e}, K=3 jumps {['%.12f' % s for s in sizes]}, {dt:.3f}s")


def test_c10_cli_determinism(report, capsys, tmp_path):
    table = tmp_path / "t.csv"
    table.write_text("q,f\n0.1,0\n1,0.5\n10,1.2\n")
    commands = [
        ["bounds", "--profile", "order2", "--alpha-points", "7"],
        ["bounds", "--profile", f"table:{table}", "--format", "json"],
        ["optimize", "--alpha-points", "4", "--pa-rule", "exact"],
        ["curve", "--profile", "order2", "--alpha", "1", "--pa", "3", "--layers", "0.2:1", "--layers", "0.5:4"],
        ["simulate", "--n", "20", "--trials", "20000", "--seed", "5", "--workers", "2"],
    ]
    same = []
    for argv in commands:
        same.append(_cli(capsys, *argv) == _cli(capsys, *argv))
    report(10, all(same), f"byte-identical reruns: {dict(zip((c[0] for c in commands), same))}")
