"""Command-line driver: ``srmlasso <command> [flags] --out DIR``.

Commands
--------
table1     Lasso versus OLS/FSR summary for one or more ``--p`` values -> table1.json
boxplots   tracked estimates and GR^2 per replication -> boxplots_p<p>.csv
coverage   empirical coverage of one bound -> coverage_<bound>.json
fit        cross-validated Lasso on a CSV file -> fit.json, cv_curve.csv
simulate   one draw of the simulation design -> simulated.csv

Exit status is 0 on success, 1 on a usage error and 2 on a runtime error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import bounds
from .data import SimulationConfig, load_csv, save_csv, save_json, simulate_dgp
from .errors import SRMError
from .experiments import (
    CV_BOUNDS,
    HOLDOUT_BOUNDS,
    boxplot_table,
    run_bound_coverage,
    run_table1,
    write_csv,
)
from .grid import GEOMETRIC, LINEAR, GridSpec
from .selection import cv_lasso

USAGE_ERROR = 1
RUNTIME_ERROR = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageError(message)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _common(sp, multi_p=False):
    sp.add_argument("--out", required=True, help="output directory (created if missing)")
    sp.add_argument("--n", type=_positive_int, default=250, help="training sample size")
    if multi_p:
        sp.add_argument("--p", type=_positive_int, nargs="+", default=[200, 250, 300, 500],
                        help="number of covariates (one or more)")
    else:
        sp.add_argument("--p", type=_positive_int, default=200, help="number of covariates")
    sp.add_argument("--reps", type=_positive_int, default=50, help="replications")
    sp.add_argument("--seed", type=int, default=0, help="master seed (unsigned)")
    sp.add_argument("--k-folds", type=int, default=10, help="cross-validation folds")
    sp.add_argument("--grid-points", type=int, default=100)
    sp.add_argument("--grid-min-ratio", type=float, default=1e-3)
    sp.add_argument("--grid-mode", choices=[GEOMETRIC, LINEAR], default=GEOMETRIC)
    sp.add_argument("--grid-step", type=float, default=None, help="step for the linear grid")
    sp.add_argument("--corr", type=float, default=0.9, help="pairwise covariate correlation")
    sp.add_argument("--noise-sd", type=float, default=1.0)
    sp.add_argument("--varpi", type=float, default=bounds.DEFAULT_VARPI)
    sp.add_argument("--moment-order", type=float, default=bounds.DEFAULT_MOMENT_ORDER)
    sp.add_argument("--workers", type=_positive_int, default=1, help="replications run in parallel")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="srmlasso", description="Cross-validated Lasso experiments and bounds.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _common(sub.add_parser("table1", help="Lasso vs OLS/FSR summary table"), multi_p=True)
    _common(sub.add_parser("boxplots", help="per-replication estimates and GR^2"))
    cov = sub.add_parser("coverage", help="empirical coverage of a bound")
    _common(cov)
    cov.add_argument("--bound", required=True, type=str.upper,
                     choices=list(HOLDOUT_BOUNDS + CV_BOUNDS))
    fit = sub.add_parser("fit", help="cross-validated Lasso on a CSV file")
    _common(fit)
    fit.add_argument("--data", required=True, help="CSV with header y,x1,...,xp")
    _common(sub.add_parser("simulate", help="write one draw of the design to CSV"))
    return parser


def _config(args, p=None) -> SimulationConfig:
    grid = GridSpec(mode=args.grid_mode, num_points=args.grid_points,
                    min_ratio=args.grid_min_ratio, step=args.grid_step)
    return SimulationConfig(n=args.n, p=args.p if p is None else p, corr=args.corr,
                            noise_sd=args.noise_sd, replications=args.reps, seed=args.seed,
                            K=args.k_folds, lambda_grid=grid)


def _table1(args, out: Path) -> None:
    cfg = _config(args, p=args.p[0])
    reports = run_table1(cfg, args.p, workers=args.workers)
    save_json({"designs": {str(p): rep.to_dict() for p, rep in reports.items()}}, out / "table1.json")


def _boxplots(args, out: Path) -> None:
    cfg = _config(args)
    report = run_table1(cfg, (cfg.p,), workers=args.workers)[cfg.p]
    header, rows = boxplot_table(report)
    write_csv(header, rows, out / f"boxplots_p{cfg.p}.csv")


def _coverage(args, out: Path) -> None:
    cfg = _config(args)
    rep = run_bound_coverage(cfg, args.bound, args.reps, args.varpi, args.moment_order,
                             workers=args.workers)
    save_json(rep, out / f"coverage_{args.bound.lower()}.json")


def _fit(args, out: Path) -> None:
    data = load_csv(args.data)
    grid = GridSpec(mode=args.grid_mode, num_points=args.grid_points,
                    min_ratio=args.grid_min_ratio, step=args.grid_step)
    sel = cv_lasso(data, K=args.k_folds, grid=grid, seed=args.seed)
    report = sel.to_dict()
    report["raw_coefficients"] = sel.data.to_raw_coefficients(sel.chosen.coefficients)
    save_json(report, out / "fit.json")
    with open(out / "cv_curve.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda", "mean_ge"] + [f"fold{q + 1}_ge" for q in range(args.k_folds)])
        for pt in sel.cv_curve:
            w.writerow([repr(pt.lambda_), repr(pt.mean_ge)] + [repr(float(v)) for v in pt.fold_ge])


def _simulate(args, out: Path) -> None:
    data, _ = simulate_dgp(_config(args), 0)
    save_csv(data, out / "simulated.csv")


_COMMANDS = {"table1": _table1, "boxplots": _boxplots, "coverage": _coverage,
             "fit": _fit, "simulate": _simulate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return USAGE_ERROR
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _COMMANDS[args.command](args, out)
    except (SRMError, ValueError, OSError) as exc:
        print(f"srmlasso {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
