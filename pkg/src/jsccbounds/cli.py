"""Command-line front end: ``bounds``, ``optimize``, ``curve`` and ``simulate``.

Exit codes: 0 success, 1 usage or validation error, 2 simulation check
failure, 3 internal consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from jsccbounds import __version__
from jsccbounds.bounds import Limit, lower_bound_pmin
from jsccbounds.errors import InternalConsistencyError
from jsccbounds.optimizer import GridSpec, PaRule, compliance_margin, compliance_points, db, sweep
from jsccbounds.profiles import Profile, QualityGrid, eval_profile
from jsccbounds.schemes import (
    HybridParams,
    LayeredParams,
    MatrixScheme,
    hybrid_distortion_below,
    matrix_analog_distortion,
    scheme_fidelity,
)
from jsccbounds.simulator import SimConfig, simulate_matrix_analog, simulate_uncoded

EXIT_OK, EXIT_USAGE, EXIT_CHECK, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    return f"{x:.12g}"


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def _positive_float(s):
    v = float(s)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {s}")
    return v


def _nonneg_float(s):
    v = float(s)
    if not v >= 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be a nonnegative number, got {s}")
    return v


def _layer(s):
    try:
        p, q = s.split(":")
        return float(p), float(q)
    except ValueError:
        raise argparse.ArgumentTypeError(f"layer must be P:Q, got {s!r}") from None


def _add_profile_flags(p):
    p.add_argument("--profile", default="order2", help="order1, order2 or table:PATH (default: order2)")
    p.add_argument("--alpha", type=_positive_float, help="profile parameter for rational profiles")


def _add_alpha_sweep(p):
    p.add_argument("--alpha-min", type=_positive_float)
    p.add_argument("--alpha-max", type=_positive_float)
    p.add_argument("--alpha-points", type=_positive_int)


def _add_grid_flags(p, q_max=1e4):
    p.add_argument("--q-min", type=_positive_float, default=1e-4)
    p.add_argument("--q-max", type=_positive_float, default=q_max)
    p.add_argument("--q-points", type=int, default=2000)


def _add_output_flags(p, formats=("csv", "json")):
    p.add_argument("--out", type=Path, help="write to PATH instead of stdout")
    p.add_argument("--format", choices=formats, default=formats[0])


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jsccbounds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("bounds", help="lower bound on the minimum power")
    _add_profile_flags(p)
    _add_alpha_sweep(p)
    _add_grid_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("optimize", help="lower and upper bounds for the order-two profile")
    p.add_argument("--alpha", type=_positive_float, help="single alpha instead of a sweep")
    _add_alpha_sweep(p)
    p.add_argument("--pa-rule", choices=["closed", "exact"], default="closed")
    _add_grid_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("curve", help="achieved fidelity against the profile")
    _add_profile_flags(p)
    p.add_argument("--pa", type=_nonneg_float, required=True, help="analog-layer power")
    p.add_argument("--p1", type=_nonneg_float, help="digital-layer power (hybrid scheme)")
    p.add_argument("--q1", type=_positive_float, help="digital-layer threshold (hybrid scheme)")
    p.add_argument("--layers", type=_layer, action="append", metavar="P:Q",
                   help="digital layer as power:threshold; repeat for K layers")
    _add_grid_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("simulate", help="Monte Carlo distortion check")
    p.add_argument("--n", type=_positive_int, default=100, help="source symbols per channel use")
    p.add_argument("--power", type=_nonneg_float, default=1.0)
    p.add_argument("--p1", type=_nonneg_float, default=0.0, help="interference power of the digital layer")
    p.add_argument("--noise", type=_positive_float, default=1.0)
    p.add_argument("--trials", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k-matrix", type=Path, help="whitespace-separated K matrix; simulates the matrix analog layer")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--check", action="store_true", help="exit 2 unless within 4 standard errors of the closed form")
    _add_output_flags(p, formats=("json",))
    return parser


# -- helpers --------------------------------------------------------------------

def _profile(args) -> Profile:
    spec = args.profile
    if spec.startswith("table:"):
        return Profile.from_csv(spec[len("table:"):])
    if spec not in ("order1", "order2"):
        raise UsageError(f"unknown profile {spec!r}")
    if args.alpha is None:
        raise UsageError(f"--alpha is required for profile {spec}")
    return Profile.order1(args.alpha) if spec == "order1" else Profile.order2(args.alpha)


def _alphas(args, required: bool) -> list[float]:
    sweep_flags = (args.alpha_min, args.alpha_max, args.alpha_points)
    if args.alpha is not None:
        if any(f is not None for f in sweep_flags):
            raise UsageError("--alpha cannot be combined with --alpha-min/--alpha-max/--alpha-points")
        return [args.alpha]
    if required and all(f is None for f in sweep_flags):
        raise UsageError("give --alpha or an alpha sweep (--alpha-min/--alpha-max/--alpha-points)")
    lo = args.alpha_min if args.alpha_min is not None else 1e-2
    hi = args.alpha_max if args.alpha_max is not None else 1e4
    pts = args.alpha_points if args.alpha_points is not None else 50
    if pts == 1:
        return [lo]
    if not lo < hi:
        raise UsageError("--alpha-min must be below --alpha-max")
    return np.logspace(math.log10(lo), math.log10(hi), pts).tolist()


def _grid(args) -> QualityGrid:
    return QualityGrid(args.q_min, args.q_max, args.q_points)


def _manifest(args, outputs) -> dict:
    params = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())
              if k not in ("command",)}
    return {
        "subcommand": args.command,
        "parameters": params,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "outputs": [str(o) for o in outputs],
    }


def _emit(args, header, rows, extra=None):
    """Write rows as CSV or JSON to stdout or --out, with a manifest."""
    outputs = [args.out] if args.out else []
    if args.format == "json":
        payload = extra if extra is not None else {"columns": header, "rows": [dict(zip(header, r)) for r in rows]}
        payload = {**payload, "manifest": _manifest(args, outputs)}
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
        text = buf.getvalue()
    if args.out:
        args.out.write_text(text)
        if args.format == "csv":
            sidecar = args.out.with_name(args.out.name + ".manifest.json")
            sidecar.write_text(json.dumps(_manifest(args, outputs), sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(text)


# -- subcommands ----------------------------------------------------------------

def _q_star(res):
    return res.q_star.value if isinstance(res.q_star, Limit) else res.q_star


def cmd_bounds(args) -> int:
    grid = _grid(args)
    if args.profile.startswith("table:"):
        if args.alpha is not None:
            raise UsageError("--alpha does not apply to tabulated profiles")
        res = lower_bound_pmin(_profile(args), grid)
        rows = [(None, res.p_lower, _q_star(res))]
    else:
        rows = []
        for a in _alphas(args, required=True):
            args_a = argparse.Namespace(**{**vars(args), "alpha": a})
            res = lower_bound_pmin(_profile(args_a), grid)
            rows.append((a, res.p_lower, _q_star(res)))
    _emit(args, ["alpha", "p_lower", "q_star"], rows)
    return EXIT_OK


def cmd_optimize(args) -> int:
    rule = PaRule(args.pa_rule)
    result = sweep(_alphas(args, required=False), rule, GridSpec(), _grid(args))
    header = ["alpha", "p_lower_db", "p_upper_db", "gap_db", "p_a", "p_1", "q_1", "p_lower", "p_upper"]
    rows = [
        (r.alpha, db(r.p_lower), db(r.p_upper), r.gap_db, r.p_a, r.p_1, r.q_1, r.p_lower, r.p_upper)
        for r in result
    ]
    _emit(args, header, rows)
    return EXIT_OK


def _scheme_params(args):
    if args.layers:
        if args.p1 is not None or args.q1 is not None:
            raise UsageError("--layers cannot be combined with --p1/--q1")
        powers, thresholds = zip(*args.layers)
        return LayeredParams(args.pa, powers, thresholds)
    if args.p1 is None:
        return HybridParams.uncoded(args.pa)
    if args.q1 is None:
        raise UsageError("--p1 requires --q1")
    return HybridParams(args.pa, args.p1, args.q1)


def cmd_curve(args) -> int:
    profile = _profile(args)
    params = _scheme_params(args)
    q = compliance_points(params, _grid(args), profile)
    f_scheme = np.asarray(scheme_fidelity(params, q))
    f_profile = np.asarray(eval_profile(profile, q))
    margin = np.asarray(compliance_margin(params, profile, q))
    rows = list(zip(q.tolist(), f_scheme.tolist(), f_profile.tolist(), margin.tolist()))
    _emit(args, ["q", "f_scheme", "f_profile", "margin"], rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.k_matrix is not None:
        k = np.atleast_2d(np.loadtxt(args.k_matrix, dtype=float))
        ms = MatrixScheme(k, np.eye(k.shape[1]), args.p1)
        res = simulate_matrix_analog(ms, args.noise, args.trials, args.seed, args.workers)
        closed = matrix_analog_distortion(ms, args.noise)
    else:
        cfg = SimConfig(args.n, args.power, args.noise, args.trials, args.seed, args.p1)
        res = simulate_uncoded(cfg, args.workers)
        closed = hybrid_distortion_below(HybridParams(args.power, args.p1, math.inf), 1.0 / args.noise, 1.0 / args.n)
    z = abs(res.mean_distortion - closed)
    ok = bool(z <= 4 * res.std_error)
    payload = {**res.to_dict(), "closed_form": closed, "within_4_std_error": ok}
    _emit(args, None, None, extra=payload)
    if args.check and not ok:
        print(f"check failed: |{res.mean_distortion} - {closed}| > 4 * {res.std_error}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


COMMANDS = {"bounds": cmd_bounds, "optimize": cmd_optimize, "curve": cmd_curve, "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"jsccbounds {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InternalConsistencyError as exc:
        print(f"jsccbounds {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
