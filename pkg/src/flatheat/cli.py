"""Command-line interface: plan, simulate, sweep, tables, figures.

Numeric output uses repr-of-float formatting (shortest round-trip exact);
failures emit a machine-readable JSON object on stderr and a nonzero exit.
"""

import argparse
import json
import sys

from .bench import (SweepSpec, figure_traces, render_tables_text, reproduce_tables,
                    sweep, write_sweep_fit_json, write_sweep_points_csv,
                    write_tables_csv)
from .planner import FlatnessPlanner
from .profiles import parse_profile
from .simulator import (SolverConfig, compare, simulate, write_summary_json,
                        write_trajectory_csv)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValueError(message)


def _add_plan_args(p, with_profile=True):
    if with_profile:
        p.add_argument("--profile", default="step",
                       help="step | zero | constant:<a> | mode:<m>[:<amp>] | samples CSV path")
    p.add_argument("--s", type=float, default=1.6, help="Gevrey order in (1,2)")
    p.add_argument("--tau", type=float, default=0.3, help="zero-control smoothing time")
    p.add_argument("--rprime", type=float, default=0.2, help="active-control duration")
    p.add_argument("--horizon", type=float, default=None,
                   help="total horizon T (default tau + rprime)")
    p.add_argument("--imax", type=int, default=40)
    p.add_argument("--kmax", type=int, default=60)
    p.add_argument("--nmax", type=int, default=30)
    p.add_argument("--precision", choices=["standard", "extended"], default="standard")


def _planner_from(args):
    horizon = args.horizon if args.horizon is not None else args.tau + args.rprime
    return FlatnessPlanner(s=args.s, tau=args.tau, r_prime=args.rprime,
                           horizon=horizon, i_max=args.imax, k_max=args.kmax,
                           n_max=args.nmax, precision=args.precision)


def _cmd_plan(args):
    planner = _planner_from(args).fit(parse_profile(args.profile))
    planner.write_control_trace(args.out_control, grid_points=args.grid)
    l2, linf = planner.control_norms(args.norm_grid)
    payload = {"plan": planner.get_params(), "l2": l2, "linf": linf,
               "control_csv": args.out_control}
    with open(args.out_summary, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.out_control} and {args.out_summary} (L2={l2!r}, Linf={linf!r})")
    return 0


def _cmd_simulate(args):
    planner = _planner_from(args).fit(parse_profile(args.profile))
    solver = SolverConfig(nx=args.nx, dt=args.dt, scheme=args.scheme)
    traj = simulate(parse_profile(args.profile), planner, solver,
                    save_stride=args.save_stride)
    linf_final, l2_final, max_gap = compare(traj, planner)
    write_trajectory_csv(traj, args.out_trajectory, stride=args.csv_stride)
    write_summary_json(args.out_summary, planner, solver,
                       {"terminal_linf": linf_final, "terminal_l2": l2_final,
                        "max_gap": max_gap})
    print(f"wrote {args.out_trajectory} and {args.out_summary} "
          f"(terminal Linf={linf_final!r}, max_gap={max_gap!r})")
    return 0


def _cmd_sweep(args):
    base = _planner_from(args)
    spec = SweepSpec(vary=args.vary,
                     values=[int(v) for v in args.values.split(",")],
                     base=base, profile=parse_profile(args.profile),
                     reference=args.reference)
    fit = sweep(spec)
    write_sweep_points_csv(fit, args.out_points)
    write_sweep_fit_json(fit, args.out_fit)
    print(f"wrote {args.out_points} and {args.out_fit} "
          f"(rate={fit.rate!r}, r2={fit.r_squared!r})")
    return 0


def _cmd_tables(args):
    base = _planner_from(args)
    records = reproduce_tables([float(v) for v in args.s_list.split(",")],
                               [float(v) for v in args.r_list.split(",")],
                               base, grid_points=args.norm_grid)
    write_tables_csv(records, args.out_csv)
    text = render_tables_text(records)
    if args.out_text:
        with open(args.out_text, "w", encoding="utf-8") as fh:
            fh.write(text)
    print(text)
    failures = [r for r in records if r["error"]]
    if failures:
        print(f"{len(failures)} cell(s) failed", file=sys.stderr)
    return 0


def _cmd_figures(args):
    planner = _planner_from(args).fit(parse_profile(args.profile))
    paths = figure_traces(planner, args.outdir)
    print(f"wrote {paths['surface']} and {paths['control']}")
    return 0


def build_parser():
    parser = _Parser(prog="flatheat",
                     description="Flatness-based null control of the boundary-heated rod")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="synthesize a control and export its trace")
    _add_plan_args(p)
    p.add_argument("--grid", type=int, default=1001, help="control trace grid points")
    p.add_argument("--norm-grid", type=int, default=4001, help="norm quadrature grid")
    p.add_argument("--out-control", default="control.csv")
    p.add_argument("--out-summary", default="plan_summary.json")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("simulate", help="verify a plan with the finite-difference solver")
    _add_plan_args(p)
    p.add_argument("--nx", type=int, default=200, help="spatial intervals")
    p.add_argument("--dt", type=float, default=1e-4, help="time step")
    p.add_argument("--scheme", choices=["crank_nicolson", "spectral_splice"],
                   default="crank_nicolson")
    p.add_argument("--save-stride", type=int, default=10,
                   help="keep every Nth step in memory")
    p.add_argument("--csv-stride", type=int, default=10,
                   help="write every Nth saved snapshot")
    p.add_argument("--out-trajectory", default="trajectory.csv")
    p.add_argument("--out-summary", default="simulate_summary.json")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="truncation-order convergence sweep")
    _add_plan_args(p)
    p.add_argument("--vary", choices=["i_max", "k_max", "n_max"], required=True)
    p.add_argument("--values", required=True, help="comma-separated increasing integers")
    p.add_argument("--reference", choices=["richest_truncation", "extended_precision"],
                   default="richest_truncation")
    p.add_argument("--out-points", default="sweep_points.csv")
    p.add_argument("--out-fit", default="sweep_fit.json")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("tables", help="control-effort norms over an (s, R') grid")
    _add_plan_args(p, with_profile=False)
    p.add_argument("--s-list", default="1.5,1.6,1.7,1.8,1.9")
    p.add_argument("--r-list", default="0.15,0.20,0.25,0.30")
    p.add_argument("--norm-grid", type=int, default=4001)
    p.add_argument("--out-csv", default="tables.csv")
    p.add_argument("--out-text", default=None)
    p.set_defaults(func=_cmd_tables)

    p = sub.add_parser("figures", help="state surface and control trace CSVs")
    _add_plan_args(p)
    p.add_argument("--outdir", default="figures")
    p.set_defaults(func=_cmd_figures)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except Exception as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)},
                  sys.stderr, ensure_ascii=False)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
