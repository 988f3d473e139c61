"""Evaluate the operator, check its moments and error bounds, run convergence sweeps.

Exit codes: 0 success, 1 a check failed, 2 bad usage or invalid parameters.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import config as runconfig
from .experiments import (
    CONVERGENCE_COLUMNS,
    EXAMPLE_COLUMNS,
    ConfigTemplate,
    ScheduleError,
    SweepError,
    TrendError,
    check_trend,
    default_schedule,
    example_run,
    example_sup_errors,
    korovkin_run,
    vanishing_function_run,
)
from .functions import FunctionSpecError, build_function
from .moments import (
    brute_force_central,
    quadratic_coefficient,
    quadratic_coefficient_bound,
    moment_reports,
    central2_envelope,
    sup_central2_bound,
)
from .operator import DegenerateBasisError, EvaluationError, NormalizationMode, evaluate_grid
from .pq_core import PQDomainError
from .rates import MissingMetadataError, Theorem, check_bound_refined
from .tables import render

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2

# m = 0 closed forms must match brute force to this relative tolerance
ORACLE_RTOL = 1e-9
CHAIN_SLACK = 1e-12


class UsageError(Exception):
    pass


def _grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:count, got {text!r}")
    try:
        return float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be lo:hi:count, got {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_output(parser):
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--out", default=None, help="write the table here instead of stdout")


def _add_operator(parser, fn_default=None):
    parser.add_argument("--config", help="key=value run configuration file")
    parser.add_argument("--dump-config", metavar="PATH", help="write the resolved configuration to PATH")
    parser.add_argument("--p", type=float)
    parser.add_argument("--q", type=float)
    parser.add_argument("--n", type=int)
    parser.add_argument("--m", type=int)
    parser.add_argument("--alpha", type=int)
    parser.add_argument("--beta", type=int)
    parser.add_argument("--bn", type=float, help="Chlodowsky scale b_n")
    parser.add_argument("--bn-rule", choices=sorted(runconfig.BN_RULES))
    parser.add_argument("--fn", default=fn_default, help="const:c, linear:a,b, x2, poly:c0,..., sin, hat:c")
    parser.add_argument("--grid", type=_grid, help="lo:hi:count (default 0:b_n:101)")
    parser.add_argument("--mode", choices=[m.value for m in NormalizationMode])
    _add_output(parser)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pqc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate the operator on a grid")
    _add_operator(p)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("moments", help="closed-form moments against brute force")
    _add_operator(p)
    p.set_defaults(handler=cmd_moments)

    p = sub.add_parser("bounds", help="check the error bounds pointwise")
    _add_operator(p)
    p.add_argument(
        "--theorem", default="all", choices=("T1", "T2", "T3", "all"),
        help="T1 Lipschitz, T2 modulus of continuity, T3 derivative modulus",
    )
    p.add_argument("--resolution", type=int, default=2001, help="grid size for the modulus of continuity")
    p.add_argument("--A", type=float, dest="A", help="interval end for the derivative bound (default b_n)")
    p.set_defaults(handler=cmd_bounds)

    p = sub.add_parser("converge", help="error sweep along a parameter schedule")
    p.add_argument("--mode", choices=("korovkin", "vanishing"), default="korovkin")
    p.add_argument("--fn", default="x2")
    p.add_argument("--n-list", type=_int_list, default=[8, 16, 32, 64])
    p.add_argument("--m", type=int, default=0)
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--beta", type=int, default=0)
    p.add_argument("--resolution", type=int, default=201)
    p.add_argument("--x-max", type=float)
    p.add_argument("--weights", choices=[m.value for m in NormalizationMode], default="normalized")
    p.add_argument("--slack", type=float, default=0.10)
    _add_output(p)
    p.set_defaults(handler=cmd_converge)

    p = sub.add_parser("example", help="x**2 on [0, 0.1] with n = 8, 10, m = 1, b_n = (log n)**2")
    p.add_argument("--p", type=float, default=0.95)
    p.add_argument("--q", type=float, default=0.9)
    p.add_argument("--mode", choices=[m.value for m in NormalizationMode], default="raw")
    p.add_argument("--log-base", choices=("e", "10"), default="e")
    _add_output(p)
    p.set_defaults(handler=cmd_example)
    return parser


def _resolve(args) -> runconfig.RunConfig:
    base = runconfig.load(args.config) if args.config else runconfig.RunConfig()
    lo = hi = resolution = None
    if args.grid is not None:
        lo, hi, resolution = args.grid
    overrides = dict(
        p=args.p, q=args.q, n=args.n, m=args.m, alpha=args.alpha, beta=args.beta,
        fn=args.fn, lo=lo, hi=hi, resolution=resolution, mode=args.mode,
        format=args.format, out=args.out,
    )
    if args.bn is not None or args.bn_rule is not None:
        overrides.update(bn=args.bn, bn_rule=args.bn_rule)
        base = runconfig.RunConfig(**{**base.__dict__, "bn": None, "bn_rule": None})
    cfg = base.merged(**overrides)
    if args.dump_config:
        with open(args.dump_config, "w", encoding="utf-8") as fh:
            fh.write(cfg.to_text())
    return cfg


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _note(line):
    print(line, file=sys.stderr)


def _function(cfg, config):
    if cfg.fn is None:
        raise UsageError("missing --fn")
    hi = max(config.max_node, config.b_n)
    return build_function(cfg.fn, hi)


def cmd_eval(args):
    cfg = _resolve(args)
    config = cfg.operator_config()
    f = _function(cfg, config)
    xs = np.linspace(*cfg.grid())
    approx = evaluate_grid(f, xs, config, cfg.mode)
    target = f.values(xs)
    records = [
        {"x": float(x), "target": float(t), "approx": float(a), "abs_err": float(abs(a - t))}
        for x, t, a in zip(xs, target, approx)
    ]
    _emit(render(("x", "target", "approx", "abs_err"), records, cfg.format), cfg.out)
    return EXIT_OK


def _oracle_scale(quantity, config):
    r = int(quantity[-1])
    return config.b_n**r


def cmd_moments(args):
    cfg = _resolve(args)
    config = cfg.operator_config()
    mode = NormalizationMode.parse(cfg.mode)
    xs = np.linspace(*cfg.grid())
    reports = moment_reports(xs, config, mode)
    columns = ("quantity", "x", "closed_form", "brute_force", "abs_gap", "mode")
    _emit(render(columns, [r.__dict__ for r in reports], cfg.format), cfg.out)

    exact_scope = config.m == 0 and mode is NormalizationMode.SUM_NORMALIZED
    failed = False
    for quantity in ("moment0", "moment1", "moment2", "central1", "central2"):
        rows = [r for r in reports if r.quantity == quantity]
        floor = 1e-12 * _oracle_scale(quantity, config)
        ok = all(r.abs_gap <= ORACLE_RTOL * max(abs(r.closed_form), abs(r.brute_force)) + floor for r in rows)
        worst = max(r.abs_gap for r in rows)
        status = ("PASS" if ok else "FAIL") if exact_scope else "GAP"
        failed |= status == "FAIL"
        _note(f"{status} {quantity} max_abs_gap={worst:.3e}")

    margin = quadratic_coefficient_bound(config) - quadratic_coefficient(config)
    status = "PASS" if margin >= -CHAIN_SLACK else ("FAIL" if config.m == 0 else "GAP")
    failed |= status == "FAIL"
    _note(f"{status} quadratic_coefficient bound-coef={margin:.3e}")

    central = brute_force_central(2, xs, config, mode)
    envelope = central2_envelope(xs, config)
    sup_bound = sup_central2_bound(config)
    first = float(np.min(envelope - central))
    second = float(sup_bound - np.max(envelope))
    for name, slack in (("central2<=envelope", first), ("envelope<=sup_bound", second)):
        in_scope = config.m == 0 or name == "envelope<=sup_bound"
        status = "PASS" if slack >= -CHAIN_SLACK else ("FAIL" if in_scope else "GAP")
        failed |= status == "FAIL"
        _note(f"{status} {name} min_slack={slack:.3e}")
    return EXIT_CHECK if failed else EXIT_OK


def cmd_bounds(args):
    cfg = _resolve(args)
    config = cfg.operator_config()
    f = _function(cfg, config)
    xs = np.linspace(*cfg.grid())
    theorems = list(Theorem) if args.theorem == "all" else [Theorem.parse(args.theorem)]
    records = []
    violated = 0
    for theorem in theorems:
        reports, resolution = check_bound_refined(theorem, f, xs, config, args.resolution, args.A, cfg.mode)
        bad = sum(not r.satisfied for r in reports)
        violated += bad
        _note(f"{'PASS' if not bad else 'FAIL'} {theorem.value} violations={bad} omega_resolution={resolution}")
        records.extend(r.__dict__ for r in reports)
    columns = ("theorem", "x", "empirical_error", "bound", "satisfied")
    _emit(render(columns, records, cfg.format), cfg.out)
    return EXIT_CHECK if violated else EXIT_OK


def cmd_converge(args):
    template = ConfigTemplate(m=args.m, alpha=args.alpha, beta=args.beta)
    schedule = default_schedule()
    kind = args.mode
    hi = max(schedule.config(n, template).max_node for n in args.n_list) if args.n_list else 1.0
    f = build_function(args.fn, hi)
    if kind == "korovkin":
        table = korovkin_run(f, args.n_list, schedule, template, args.resolution, args.x_max, args.weights)
        column = "weighted_error"
    else:
        table = vanishing_function_run(f, args.n_list, schedule, template, args.resolution, args.weights)
        column = "sup_error"
    _emit(render(CONVERGENCE_COLUMNS, table.records(), args.format or "csv"), args.out)
    try:
        check_trend(table, column, args.slack)
    except TrendError as exc:
        _note(f"FAIL trend {exc}")
        return EXIT_CHECK
    _note(f"PASS trend {column} ratio(last/first)={table.shrink_ratio(column):.4g}")
    return EXIT_OK


def cmd_example(args):
    rows = example_run(args.p, args.q, args.mode, args.log_base)
    _emit(render(EXAMPLE_COLUMNS, [r.__dict__ for r in rows], args.format or "csv"), args.out)
    sup = example_sup_errors(rows)
    ok = sup[10] < sup[8]
    _note(f"{'PASS' if ok else 'FAIL'} sup_err(n=10)={sup[10]:.6e} < sup_err(n=8)={sup[8]:.6e}")
    return EXIT_OK if ok else EXIT_CHECK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (PQDomainError, runconfig.ConfigError, FunctionSpecError, UsageError,
            MissingMetadataError, OSError) as exc:
        _note(f"error: {exc}")
        return EXIT_USAGE
    except (EvaluationError, DegenerateBasisError, ScheduleError, SweepError) as exc:
        _note(f"error: {exc}")
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
