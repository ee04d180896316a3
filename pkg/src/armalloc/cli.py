"""Command-line entry point.

Usage:
    armalloc design --k 2                       # N=249 at 1:1
    armalloc sweep --k 5 --out sweep.csv --plot-data curve.csv
    armalloc rop --k 2,3,4,5 --power 0.8
    armalloc rmax --k 2,3,4,5 --alpha 0.025
    armalloc reduction --config stampede.cfg --ratios 2,rmax --arms-of-interest 4
    armalloc simulate --k 3 --replicates 100000 --seed 7
    armalloc design --stage two_stage --k 2 --r 2

Exit codes: 0 success, 2 usage/config error, 3 infeasible design,
4 root-bracketing or convergence failure.
"""

from __future__ import annotations

import argparse
import sys
from decimal import Decimal
from pathlib import Path

from . import report
from .errors import BracketError, ConvergenceError, InfeasibleDesignError, InvalidParameterError
from .optimizer import find_r_max, find_r_op, per_arm_reduction_report, solve, sweep
from .simulate import lfc_config, simulate_power_single, simulate_two_stage, simulate_type1_single
from .stats import ceil_product
from .single_stage import dunnett_heuristic_ratio, power_single, type1_error_single
from .two_stage import power_two_stage, type1_error_two_stage

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_CONVERGENCE = 0, 2, 3, 4

_SCENARIO_KEYS = ("stage", "k", "r", "alpha", "power", "sigma", "delta", "delta0", "grid",
                  "budget", "replicates", "seed", "ratio_mode", "form", "c", "n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, help="key = value scenario file; flags override it")
    p.add_argument("--stage", choices=["single", "two_stage", "two-stage"])
    p.add_argument("--k", help="number of active arms (comma list for rop/rmax)")
    p.add_argument("--r", help="allocation ratio R for design/simulate")
    p.add_argument("--alpha")
    p.add_argument("--power")
    p.add_argument("--sigma")
    p.add_argument("--delta")
    p.add_argument("--delta0")
    p.add_argument("--grid", help="start:end:step, default 1.0:5.0:0.1")
    p.add_argument("--budget", help="total-N inflation budget for R_MAX, default 0.03")
    p.add_argument("--replicates")
    p.add_argument("--seed")
    p.add_argument("--ratio-mode", dest="ratio_mode", choices=["nominal", "realized"])
    p.add_argument("--form", choices=["exact", "published"], help="two-stage integral form")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, help="write to this file instead of stdout")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--paper-format", dest="rounded", action="store_true",
                   help="proportions to two decimals, C to four")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="armalloc", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("design", parents=[common], help="solve C and n at one ratio")
    sp = sub.add_parser("sweep", parents=[common], help="solve every ratio on the grid")
    sp.add_argument("--plot-data", type=Path, help="also write the (R, N) curve here")
    sub.add_parser("rop", parents=[common], help="ratio minimizing total N, per K")
    sub.add_parser("rmax", parents=[common], help="largest ratio within the N budget, per K")
    rp = sub.add_parser("reduction", parents=[common], help="per-arm n at chosen ratios")
    rp.add_argument("--ratios", default="2,rmax", help="comma list; 'rmax' means R_MAX")
    rp.add_argument("--arms-of-interest", type=int,
                    help="arms whose patient count reductions are summed")
    mp = sub.add_parser("simulate", parents=[common], help="Monte Carlo check of alpha and power")
    mp.add_argument("--c", help="critical value; solved from the targets when omitted")
    mp.add_argument("--n", help="per-arm (per-stage) n; solved when omitted")
    return parser


def _emit(args, text: str) -> None:
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)


def _render(args, records, columns, kind) -> str:
    return report.render(records, columns, kind, args.format, args.rounded)


def _single_k(cfg) -> int:
    if len(cfg.k) != 1:
        raise InvalidParameterError("k", "this command takes a single K")
    return cfg.k[0]


def cmd_design(args, cfg) -> str:
    k = _single_k(cfg)
    design = solve(cfg.scenario(k), Decimal(repr(cfg.r)))
    return _render(args, [report.design_record(design)], report.DESIGN_COLUMNS, "design")


def cmd_sweep(args, cfg) -> str:
    table = sweep(cfg.scenario(_single_k(cfg)), cfg.grid, workers=args.workers)
    if args.plot_data is not None:
        args.plot_data.write_text(report.render(report.plot_records(table), report.PLOT_COLUMNS,
                                                "plot", args.format, args.rounded))
    return _render(args, report.sweep_records(table), report.SWEEP_COLUMNS, "sweep")


def cmd_rop(args, cfg) -> str:
    rows = []
    for k in cfg.k:
        table = sweep(cfg.scenario(k), cfg.grid, workers=args.workers)
        rop = find_r_op(table)
        rows.append({"K": k, "sqrt_K": dunnett_heuristic_ratio(k), "R_OP": str(rop),
                     "R_OP_low": rop.r_op_low, "R_OP_high": rop.r_op_high,
                     "N_min": rop.min_total_n, "N_baseline": table.baseline.total_n})
    return _render(args, rows, report.ROP_COLUMNS, "rop")


def cmd_rmax(args, cfg) -> str:
    rows = []
    for k in cfg.k:
        table = sweep(cfg.scenario(k), cfg.grid, workers=args.workers)
        rmax = find_r_max(table, cfg.budget)
        row = table.row(rmax)
        rows.append({"K": k, "R_MAX": rmax, "budget": cfg.budget,
                     "N_baseline": table.baseline.total_n, "N_at_R_MAX": row.design.total_n,
                     "N_over_baseline": row.proportion_vs_baseline})
    return _render(args, rows, report.RMAX_COLUMNS, "rmax")


def cmd_reduction(args, cfg) -> str:
    table = sweep(cfg.scenario(_single_k(cfg)), cfg.grid, workers=args.workers)
    ratios = []
    for part in args.ratios.split(","):
        part = part.strip().lower()
        if part == "rmax":
            ratios.append(find_r_max(table, cfg.budget))
        else:
            try:
                ratios.append(Decimal(part))
            except ArithmeticError:
                raise InvalidParameterError("ratios", f"not a number: {part!r}") from None
    try:
        rows = per_arm_reduction_report(table, [Decimal(1)] + ratios, cfg.budget)
    except KeyError as exc:
        raise InvalidParameterError("ratios", exc.args[0]) from None
    return _render(args, report.reduction_records(rows, args.arms_of_interest),
                   report.REDUCTION_COLUMNS, "reduction")


def cmd_simulate(args, cfg) -> str:
    k = _single_k(cfg)
    params = cfg.params(k)
    c, n = cfg.c, cfg.n
    if c is None or n is None:
        design = solve(cfg.scenario(k), Decimal(repr(cfg.r)))
        c = design.critical_value if c is None else c
        n = design.per_arm_n if n is None else n
    # analytic values at the ratio the simulated trial actually realizes
    realized = params.with_ratio(ceil_product(params.ratio, n) / n)
    if cfg.stage == "single":
        alpha_hat = simulate_type1_single(c, n, params, cfg.replicates, cfg.seed, args.workers)
        power_hat = simulate_power_single(c, n, params, cfg.replicates, cfg.seed + 1, args.workers)
        alpha = type1_error_single(c, realized)
        power = power_single(c, n, realized)
    else:
        alpha_hat = simulate_two_stage(c, n, params, cfg.replicates, cfg.seed, workers=args.workers)
        power_hat = simulate_two_stage(c, n, params, cfg.replicates, cfg.seed + 1,
                                       hypothesis=lfc_config(params), workers=args.workers)
        alpha = type1_error_two_stage(c, realized, form=cfg.form)
        power = power_two_stage(c, n, realized, form=cfg.form)
    rows = [{"quantity": q, "stage": cfg.stage, "K": k, "R": Decimal(repr(cfg.r)), "C": c, "n": n,
             "analytic": exact, "estimate": est.estimate, "std_error": est.std_error,
             "replicates": est.replicates, "seed": est.seed, "within_3se": est.within(exact)}
            for q, exact, est in (("alpha", alpha, alpha_hat), ("power", power, power_hat))]
    return _render(args, rows, report.SIMULATE_COLUMNS, "simulate")


COMMANDS = {"design": cmd_design, "sweep": cmd_sweep, "rop": cmd_rop, "rmax": cmd_rmax,
            "reduction": cmd_reduction, "simulate": cmd_simulate}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {key: getattr(args, key, None) for key in _SCENARIO_KEYS}
    try:
        cfg = report.build_config(args.config, **overrides)
        _emit(args, COMMANDS[args.command](args, cfg))
    except (InvalidParameterError, OSError) as exc:
        print(f"armalloc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleDesignError as exc:
        print(f"armalloc: infeasible design: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (BracketError, ConvergenceError) as exc:
        print(f"armalloc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
