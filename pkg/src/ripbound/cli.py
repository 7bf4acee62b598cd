"""Command-line entry point: ``ripbound <command> [options]``.

Exit codes: 0 ok, 2 domain error, 3 I/O error, 4 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from ripbound import bounds, chi2, mclab, orderstats
from ripbound import io as rio
from ripbound.errors import CapExceededError, DomainError, ScanNotFoundError, TailUnderflowError

EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_CAP = 0, 2, 3, 4
DEFAULT_SPARSITY = (0.1, 0.01, 0.001)


def _table(header, rows) -> str:
    def cell(v):
        if isinstance(v, float):
            return "" if math.isnan(v) else format(v, ".7g")
        return rio.fmt(v)

    cells = [list(header)] + [[cell(v) for v in r] for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(header))]
    lines = ["  ".join(c[i].ljust(widths[i]) for i in range(len(header))).rstrip() for c in cells]
    return "\n".join(lines) + "\n"


def _emit(args, header, rows, params) -> int:
    rows = list(rows)
    text = rio.to_csv(header, rows) if args.format == "csv" else _table(header, rows)
    if args.out:
        rio.write_with_manifest(args.out, text, args.command, params)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _params(args) -> dict:
    skip = {"command", "func", "out", "format", "svg"}
    return {k: v for k, v in vars(args).items() if k not in skip}


# --- commands ----------------------------------------------------------------

BOUND_HEADER = ["kind", "value", "eps", "delta_internal", "prob_floor", "const_C", "valid", "vacuous", "reason"]


def cmd_bounds(args) -> int:
    dims = bounds.ProblemDims(args.n, args.N, args.s)
    eps_lo = bounds.eps_for_confidence(dims.n, args.confidence, "thm1", args.const_c)
    eps_up = bounds.eps_for_confidence(dims.n, args.confidence, "prop2")
    reports = [
        bounds.lower_bound_delta_plus(dims, eps_lo, args.const_c),
        bounds.lower_bound_delta_minus(dims, eps_lo, args.const_c),
        bounds.upper_bound_delta(dims, eps_up, args.const_c),
    ]
    rows = [[r.kind, r.value, r.eps, r.delta_internal, r.prob_floor, r.const_C, r.valid, r.vacuous, r.reason]
            for r in reports]
    return _emit(args, BOUND_HEADER, rows, _params(args))


def cmd_curve(args) -> int:
    levels = args.sparsity or list(DEFAULT_SPARSITY)
    if args.points < 1:
        raise DomainError(f"--points must be >= 1, got {args.points}")
    if args.rate_max < args.rate_min:
        raise DomainError("--rate-max must be >= --rate-min")
    rates = [float(r) for r in np.linspace(args.rate_min, args.rate_max, args.points)]
    rows = []
    for level in levels:
        rows.extend(bounds.curve(args.N, level, rates, args.confidence, args.const_c, args.c1, args.c2))
    params = _params(args)
    params["sparsity"] = levels
    if args.format == "csv":
        text = rio.curve_csv(rows)
    else:
        text = _table(rio.CURVE_HEADER, ([getattr(r, k) for k in rio.CURVE_HEADER] for r in rows))
    if args.out:
        rio.write_with_manifest(args.out, text, "curve", params)
    else:
        sys.stdout.write(text)
    if args.svg:
        rio.write_with_manifest(args.svg, rio.curve_svg(rows, title=f"RIP constant bounds, N = {args.N}"),
                                "curve", params)
    return EXIT_OK


def cmd_mc(args) -> int:
    dims = bounds.ProblemDims(args.n, args.N, args.s)
    summ = mclab.run_experiment(dims, args.ensemble, args.trials, args.seed, args.confidence, args.const_c)
    rows = [
        ["trials", summ.trials],
        ["eps", summ.eps],
        ["lower_plus", summ.lower_plus.value],
        ["lower_minus", summ.lower_minus.value],
        ["coverage_plus", summ.coverage_plus],
        ["coverage_minus", summ.coverage_minus],
        ["mean_norm_plus", summ.mean_norm_plus],
        ["center", summ.center],
        ["center_gap", summ.center_gap],
        ["center_support", summ.center_support],
        ["degenerate", summ.degenerate],
    ]
    qs = (0.01, 0.05, 0.5, 0.95, 0.99)
    for name, values in summ.quantiles(qs).items():
        rows.extend([f"{name}_q{q:g}", v] for q, v in zip(qs, values))
    return _emit(args, ["metric", "value"], rows, _params(args))


EXACT_HEADER = ["seed", "stream", "s", "delta_plus", "delta_minus", "delta_s", "supports_checked",
                "cert_delta_plus", "cert_delta_minus"]


def cmd_exact(args) -> int:
    rows = []
    for stream in range(args.instances):
        A = mclab.sample_matrix(args.n, args.N, args.ensemble, args.seed, stream)
        ex = mclab.exact_rip(A, args.s, args.cap)
        cert = mclab.adversarial_pair(A, args.s) if args.s >= 2 else None
        rows.append([args.seed, stream, args.s, ex.delta_plus, ex.delta_minus, ex.delta_s, ex.supports_checked,
                     cert.delta_plus_emp if cert else None, cert.delta_minus_emp if cert else None])
    return _emit(args, EXACT_HEADER, rows, _params(args))


def cmd_orderstats(args) -> int:
    eps_grid = args.eps or list(orderstats.DEFAULT_EPS_GRID)
    rep = orderstats.mc_verify_concentration(args.n, args.k, args.trials, args.seed, eps_grid, args.const_c)
    rows = [
        ["trials", rep.trials],
        ["mean_T_k", rep.mean],
        ["sd_T_k", rep.sd],
        ["T", rep.T],
        ["bias", rep.bias],
        ["bias_radius", rep.bias_radius],
    ]
    for eps in eps_grid:
        rows.append([f"coverage_eps_{eps:g}", rep.coverage[eps]])
        rows.append([f"prob_floor_eps_{eps:g}", rep.prob_floor[eps]])
    return _emit(args, ["metric", "value"], rows, _params(args))


def cmd_minmeas(args) -> int:
    s_order, target = args.s, args.delta_target
    if args.algorithm:
        req = bounds.algorithm_requirement(args.algorithm, args.s)
        s_order = req.order * args.s
        target = req.threshold
    if target is None:
        raise DomainError("give --delta-target or --algorithm")
    kinds = ["necessary", "sufficient"] if args.kind == "both" else [args.kind]
    rows = []
    for kind in kinds:
        fn = bounds.min_measurements_necessary if kind == "necessary" else bounds.min_measurements_sufficient
        n = fn(args.N, s_order, target, args.confidence, args.const_c, args.n_max)
        rows.append([kind, args.N, s_order, target, n, n / (s_order * math.log(args.N / s_order))])
    return _emit(args, ["kind", "N", "s", "delta_target", "n", "n_over_s_log_N_over_s"], rows, _params(args))


def cmd_quantile(args) -> int:
    rows = [[a, chi2.quantile(a).t] for a in args.alpha]
    return _emit(args, ["alpha", "t"], rows, _params(args))


def cmd_cte(args) -> int:
    thresholds = list(args.t or [])
    thresholds += [chi2.quantile(a).t for a in (args.alpha or [])]
    if not thresholds:
        raise DomainError("give --t or --alpha")
    rows = []
    for t in thresholds:
        m = chi2.conditional_tail_expectation(t)
        rows.append([m.t, m.T_squared, m.T])
    return _emit(args, ["t", "T_squared", "T"], rows, _params(args))


# --- parser --------------------------------------------------------------------

def _common(p, out=True):
    p.add_argument("--format", choices=("table", "csv"), default="table")
    if out:
        p.add_argument("--out", help="write output here (plus a .manifest file) instead of stdout")


def _confidence(p):
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--const-c", dest="const_c", type=float, default=1.0,
                   help="value used for the unspecified constant C")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ripbound", allow_abbrev=False,
                                     description="RIP constant bounds for Gaussian matrices")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        p.set_defaults(func=func)
        return p

    p = add("bounds", cmd_bounds, "lower and upper RIP bounds for one (n, N, s)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    _confidence(p)
    _common(p)

    p = add("curve", cmd_curve, "bounds along compression rates (CSV, optional SVG)")
    p.add_argument("--N", type=int, default=1000)
    p.add_argument("--sparsity", type=float, action="append", help="s/N; repeatable (default 0.1 0.01 0.001)")
    p.add_argument("--rate-min", dest="rate_min", type=float, default=1.5)
    p.add_argument("--rate-max", dest="rate_max", type=float, default=20.0)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--svg", help="also write an SVG chart, one panel per sparsity level")
    _confidence(p)
    p.add_argument("--format", choices=("table", "csv"), default="csv")
    p.add_argument("--out")

    p = add("mc", cmd_mc, "adversarial certificates against the lower bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--ensemble", choices=mclab.ENSEMBLES, default="gaussian")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    _confidence(p)
    _common(p)

    p = add("exact", cmd_exact, "exact RIP constants of small random matrices by enumeration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--instances", type=int, default=1)
    p.add_argument("--ensemble", choices=mclab.ENSEMBLES, default="gaussian")
    p.add_argument("--cap", type=int, default=mclab.DEFAULT_CAP)
    _common(p)

    p = add("orderstats", cmd_orderstats, "Monte Carlo check of top-k concentration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--eps", type=float, action="append")
    p.add_argument("--const-c", dest="const_c", type=float, default=1.0)
    _common(p)

    p = add("minmeas", cmd_minmeas, "minimal measurement counts from the bounds")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--delta-target", dest="delta_target", type=float)
    p.add_argument("--algorithm", choices=sorted(bounds.ALGORITHMS))
    p.add_argument("--kind", choices=("necessary", "sufficient", "both"), default="both")
    p.add_argument("--n-max", dest="n_max", type=int, default=bounds.DEFAULT_N_MAX)
    _confidence(p)
    _common(p)

    p = add("quantile", cmd_quantile, "chi-squared(1) upper-tail quantile")
    p.add_argument("--alpha", type=float, action="append", required=True)
    _common(p)

    p = add("cte", cmd_cte, "chi-squared(1) conditional tail mean T**2 and T")
    p.add_argument("--t", type=float, action="append")
    p.add_argument("--alpha", type=float, action="append")
    _common(p)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapExceededError as exc:
        print(f"ripbound: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (DomainError, ScanNotFoundError, TailUnderflowError) as exc:
        print(f"ripbound: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"ripbound: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
