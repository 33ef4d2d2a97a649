"""Command-line interface.

Subcommands:

* ``simulate``   generate one synthetic dataset and write it as CSV
* ``select``     run the selection criteria on a CSV dataset
* ``experiment`` run a Monte Carlo plan and write CSV/SVG reports
* ``realdata``   row-subsample protocol on a large CSV, Table-style report

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Identical arguments (seed included) produce byte-identical outputs
regardless of the thread count.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .criteria import CRITERION_NAMES, curves_to_csv_rows, evaluate_criteria
from .dataio import (
    load_csv,
    real_data_report,
    standardize,
    subsample_rows,
    write_matrix_csv,
)
from .errors import (
    DegenerateInput,
    FactorStabError,
    InvalidInput,
    NumericalFailure,
    ParseError,
    RankDeficient,
)
from .experiment import (
    desk_plan,
    emit_reports,
    paper_plan,
    parse_plan,
    run_experiment,
)
from .simulate import SimulationConfig, parse_config, simulate_dataset
from .stability import ins_curve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we reserve 2 for data
        raise _UsageError(message)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--kmax", type=int, default=10,
                   help="largest candidate number of factors (default 10)")
    p.add_argument("--splits", type=int, default=10,
                   help="number of random row splits (default 10)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for replications (default 1)")


def _criteria_arg(p: argparse.ArgumentParser):
    p.add_argument("--criteria", default=",".join(CRITERION_NAMES),
                   help="comma list among SC1,SC2,SC3,IC (default all)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="factorstab",
                     description="Stability-based factor number selection")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic dataset")
    _add_common(p_sim)
    p_sim.add_argument("--config", help="plain-text config file (key = value)")
    p_sim.add_argument("--n", type=int, help="rows")
    p_sim.add_argument("--p", type=int, help="columns")
    p_sim.add_argument("--k", type=int, default=4, help="true factor count")
    p_sim.add_argument("--regime", choices=("i", "ii", "iii"),
                       help="named signal regime (K=4)")
    p_sim.add_argument("--mu", help="explicit comma list of signal strengths")
    p_sim.add_argument("--scenario", choices=("S1", "S2"), default="S1")
    p_sim.add_argument("--raw-uniform-scores", action="store_true",
                       help="keep variance-1/12 uniform scores (no rescale)")
    p_sim.add_argument("--out", required=True, help="output CSV path")

    p_sel = sub.add_parser("select", help="criteria on one CSV dataset")
    _add_common(p_sel)
    _criteria_arg(p_sel)
    p_sel.add_argument("--data", required=True, help="input CSV")
    p_sel.add_argument("--header", action="store_true",
                       help="first row is a header")
    p_sel.add_argument("--standardize", action="store_true",
                       help="center/scale columns before selection")
    p_sel.add_argument("--out", help="write per-k criterion curves CSV here")

    p_exp = sub.add_parser("experiment", help="run a Monte Carlo plan")
    _add_common(p_exp)
    p_exp.add_argument("--plan", help="plan file (key = value)")
    p_exp.add_argument("--preset", choices=("desk", "paper"), default="desk",
                       help="stock plan when --plan is absent (default desk)")
    p_exp.add_argument("--replications", type=int, help="override plan R")
    p_exp.add_argument("--out", required=True, help="output directory")

    p_real = sub.add_parser("realdata", help="row-subsample stability report")
    _add_common(p_real)
    _criteria_arg(p_real)
    p_real.add_argument("--data", required=True, help="input CSV")
    p_real.add_argument("--header", action="store_true")
    p_real.add_argument("--first-p", type=int, default=None,
                        help="use only the first P columns")
    p_real.add_argument("--rows", type=int, required=True,
                        help="rows per subsample")
    p_real.add_argument("--draws", type=int, default=100,
                        help="number of subsamples (default 100)")
    p_real.add_argument("--out", help="output directory for the CSV report")
    return parser


def _cmd_simulate(args) -> int:
    if args.config:
        config = parse_config(Path(args.config).read_text(encoding="utf-8"),
                              source=args.config)
        if args.seed:
            config = SimulationConfig(**{**config.__dict__, "seed": args.seed})
    else:
        if args.n is None or args.p is None:
            raise _UsageError("simulate needs --config or both --n and --p")
        mu = tuple(float(m) for m in args.mu.split(",")) if args.mu else None
        config = SimulationConfig(
            n=args.n, p=args.p, n_factors=args.k, scenario=args.scenario,
            seed=args.seed, regime=args.regime, mu=mu,
            unit_variance_factors=not args.raw_uniform_scores,
        )
    data = simulate_dataset(config)
    write_matrix_csv(data.x, args.out)
    print(f"wrote {config.n}x{config.p} dataset ({config.scenario}, "
          f"K={config.n_factors}) to {args.out}")
    return EXIT_OK


def _cmd_select(args) -> int:
    data = load_csv(args.data, has_header=args.header)
    if args.standardize:
        data = standardize(data)
    criteria = tuple(c.strip() for c in args.criteria.split(",") if c.strip())
    curve = ins_curve(data.values, args.kmax, args.splits, args.seed)
    curves = evaluate_criteria(data.values, curve, names=criteria)
    print(f"{data.shape[0]} rows x {data.shape[1]} columns, "
          f"kmax={args.kmax}, splits={args.splits}")
    print("criterion  selected k")
    for name in criteria:
        print(f"{name:<9}  {curves[name].selected_k}")
    if args.out:
        Path(args.out).write_text(
            "\n".join(curves_to_csv_rows([curves[c] for c in criteria])) + "\n",
            encoding="utf-8",
        )
        print(f"curves written to {args.out}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    if args.plan:
        plan = parse_plan(Path(args.plan).read_text(encoding="utf-8"),
                          source=args.plan)
    else:
        plan = desk_plan() if args.preset == "desk" else paper_plan()
    overrides = {}
    if args.replications is not None:
        overrides["replications"] = args.replications
    if args.threads != 1:
        overrides["workers"] = args.threads
    if args.seed:
        overrides["seed"] = args.seed
    if overrides:
        plan = type(plan)(**{**plan.__dict__, **overrides})
    result = run_experiment(plan, progress=print)
    written = emit_reports(result, args.out)
    print(f"{len(written)} report files in {args.out}")
    if result.failed_cells:
        print(f"{len(result.failed_cells)} cell(s) failed; see failures.csv",
              file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_realdata(args) -> int:
    data = load_csv(args.data, has_header=args.header)
    if args.first_p is not None:
        if not 1 <= args.first_p <= data.shape[1]:
            raise InvalidInput(f"--first-p {args.first_p} out of range")
        data = type(data)(values=data.values[:, : args.first_p],
                          columns=None, source=data.source)
    draws = subsample_rows(data, args.rows, args.draws, args.seed)
    draws = [standardize(d) for d in draws]
    criteria = tuple(c.strip() for c in args.criteria.split(",") if c.strip())
    report = real_data_report(draws, args.kmax, args.splits, criteria,
                              seed=args.seed)
    print(f"{args.draws} subsamples of {args.rows} rows, "
          f"{report.pair_count} dataset pairs")
    print(report.format_table())
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        (outdir / "realdata.csv").write_text(report.to_csv(), encoding="utf-8")
        print(f"report written to {outdir / 'realdata.csv'}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "select": _cmd_select,
    "experiment": _cmd_experiment,
    "realdata": _cmd_realdata,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, InvalidInput, DegenerateInput) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalFailure, RankDeficient) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FactorStabError as exc:  # anything else package-specific
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
