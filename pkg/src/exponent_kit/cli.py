"""Command-line front end.

Exit codes: 0 success, 2 invalid input or a failed verification, 3 an
iterative run that hit --max-iters before meeting its tolerance.
"""

import argparse
import csv
import io
import json
import math
import sys
import warnings

import numpy as np

from . import channel as ch
from . import source as src
from .channel import FamilyWeights, SlopeParams
from .curves import channel_exponent_curve, source_exponent_curve
from .iteration import StoppingRule, Termination
from .oracle import agreement_report
from .problem_io import ProblemError, parse_problem

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3

TASKS = ("slope-point", "curve", "verify", "guessing")
ALGORITHMS = {"channel": ch.CHANNEL_ALGORITHMS, "source": src.SOURCE_ALGORITHMS}


class UsageError(ValueError):
    pass


def _floats(text, n=None, name="value"):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from exc
    if n is not None and len(vals) != n:
        raise UsageError(f"{name}: expected {n} numbers, got {len(vals)}")
    return vals


def parse_r_grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--r-grid expects a:b:n, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"--r-grid expects a:b:n, got {text!r}") from exc
    if n < 1 or b < a:
        raise UsageError("--r-grid needs n >= 1 and a <= b")
    return np.linspace(a, b, n)


def build_parser():
    p = argparse.ArgumentParser(prog="exponent-kit", description=__doc__.splitlines()[0])
    p.add_argument("problem", help="JSON problem file")
    p.add_argument("--mode", choices=("channel", "source"),
                   help="problem kind (defaults to the file's type)")
    p.add_argument("--task", choices=TASKS, default="slope-point")
    p.add_argument("--alg", help="inner algorithm id")
    p.add_argument("--lambda", dest="lam", type=float, help="slope lambda in [0, 1]")
    p.add_argument("--rho", type=float, help="Gallager parameter (arimoto, guessing)")
    p.add_argument("--nu", type=float, default=0.0, help="cost/distortion multiplier nu >= 0")
    p.add_argument("--t", help="family weights t1,t2,t3,t4")
    p.add_argument("--gamma", type=float, help="cost budget (channel curves)")
    p.add_argument("--delta", type=float, help="distortion level (source curves, guessing)")
    p.add_argument("--r-grid", help="rate grid a:b:n for curves")
    p.add_argument("--kind", choices=("strong-converse", "error"), default="strong-converse",
                   help="which exponent a curve task computes")
    p.add_argument("--tol", type=float, default=None, help="relative-change tolerance")
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--strict", action="store_true",
                   help="treat a missing zero-distortion column as an error")
    return p


def _stop(args):
    base = StoppingRule()
    return StoppingRule(args.tol if args.tol is not None else base.rel_tol,
                        args.max_iters if args.max_iters is not None else base.max_iters)


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def trace_csv(trace):
    rows = []
    prev = None
    for i, v in enumerate(trace.values, start=1):
        rows.append((i, v, (v - prev) if prev is not None else float("nan")))
        prev = v
    return _csv(("iter", "objective", "delta"), rows)


def _weights(args):
    if args.t is None:
        return None
    try:
        return FamilyWeights(*_floats(args.t, 4, "--t"))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _slope_point(args, prob, mode):
    stop = _stop(args)
    alg = args.alg or ("tz" if mode == "channel" else "gck1")
    if alg == "arimoto" and args.rho is not None:
        if args.rho == 0 or args.rho < -1:
            raise UsageError("--rho must lie in [-1, 0) or (0, inf)")
        run = ch.run_arimoto_channel if mode == "channel" else src.run_arimoto_source
        trace = run(args.rho, args.nu, prob, stop=stop)
    else:
        if args.lam is None:
            raise UsageError("slope-point needs --lambda (or --alg arimoto --rho)")
        params = SlopeParams(args.lam, args.nu)
        solve = ch.theta_min if mode == "channel" else src.theta_s_min
        value, trace = solve(params, prob, alg=alg, t=_weights(args), stop=stop)
        if trace is None:
            _write(_csv(("iter", "objective", "delta"), [(0, value, float("nan"))]), args.out)
            return EXIT_OK
    _write(trace_csv(trace), args.out)
    return EXIT_NOT_CONVERGED if trace.termination is Termination.MAX_ITERS else EXIT_OK


def _curve(args, prob, mode):
    if args.r_grid is None:
        raise UsageError("curve needs --r-grid a:b:n")
    r = parse_r_grid(args.r_grid)
    kind = "strong_converse" if args.kind == "strong-converse" else "error"
    stop = _stop(args)
    if mode == "channel":
        gamma = float(prob.cost.max()) if args.gamma is None else args.gamma
        kw = {"alg": args.alg} if args.alg else {}
        cv = channel_exponent_curve(prob, gamma, r, mode=kind, stop=stop, **kw)
    else:
        if args.delta is None:
            raise UsageError("source curves need --delta")
        kw = {"alg": args.alg} if args.alg else {}
        cv = source_exponent_curve(prob, args.delta, r, mode=kind, stop=stop, **kw)
    _write(_csv(("R", "exponent", "lambda_star", "nu_star"), cv.rows()), args.out)
    return EXIT_OK


def _verify(args, prob, mode):
    lams = [args.lam] if args.lam is not None else [0.0, 0.25, 0.5, 0.75, 1.0]
    report = agreement_report(prob, [SlopeParams(l, args.nu) for l in lams], stop=_stop(args))
    _write(json.dumps(report.to_dict(), indent=2, allow_nan=True) + "\n", args.out)
    return EXIT_OK if report.passed else EXIT_INVALID


def _guessing(args, prob, mode):
    if mode != "source":
        raise UsageError("the guessing task needs a source problem")
    if args.rho is None or args.rho <= 0 or args.delta is None:
        raise UsageError("guessing needs --rho > 0 and --delta")
    value, nu = src.guessing_exponent(args.rho, args.delta, prob, stop=_stop(args))
    out = {"rho": args.rho, "delta": args.delta, "exponent": value, "nu_star": nu}
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def run(args):
    """Execute a parsed configuration.  Returns the exit code."""
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            prob = parse_problem(args.problem, strict=args.strict)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        mode = "channel" if isinstance(prob, ch.ChannelProblem) else "source"
        if args.mode is not None and args.mode != mode:
            raise UsageError(f"--mode {args.mode} does not match a {mode} problem file")
        if args.alg is not None and args.alg not in ALGORITHMS[mode]:
            raise UsageError(f"algorithm {args.alg!r} is not available for {mode} problems; "
                             f"choose from {', '.join(ALGORITHMS[mode])}")
        if args.max_iters is not None and args.max_iters < 1:
            raise UsageError("--max-iters must be positive")
        if args.tol is not None and not (args.tol > 0 and math.isfinite(args.tol)):
            raise UsageError("--tol must be positive")
        task = {"slope-point": _slope_point, "curve": _curve,
                "verify": _verify, "guessing": _guessing}[args.task]
        return task(args, prob, mode)
    except (ProblemError, UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
