"""Command-line front end: generate, check, simulate, analyze, converge, plot.

Exit codes: 0 success, 2 usage error, 3 schema/parse error, 4 I/O error.
Individual design failures never fail the process -- they are data and
land in the output files as status/validity classes.
"""

from __future__ import annotations

import argparse
import sys

from . import dataset
from .analysis import build_report, subset_rows, write_report
from .convergence import DEFAULT_SUBDIVISIONS, convergence_study
from .errors import ParseError, SchemaError
from .geometry import check_buildable
from .loadcases import LoadCase, SimulationConfig, load_config
from .plots import emit_plots
from .sampling import generate_designs, run_batch

_CASE_NAMES = {
    "inplane": LoadCase.IN_PLANE,
    "transverse": LoadCase.TRANSVERSE,
    "eccentric": LoadCase.ECCENTRIC,
}


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("value must be >= 1")
    return value


def _subdivision_list(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a comma-separated integer list") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("subdivisions must be positive integers")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bikeframe",
        description="Parametric bicycle-frame structural analysis pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="emit a seeded design file")
    p.add_argument("--count", type=_positive_int, required=True, help="number of designs (>= 1)")
    p.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    p.add_argument("--out", required=True, help="design file to write")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("check", help="per-row geometric feasibility report")
    p.add_argument("--in", dest="in_path", required=True, help="design file")
    p.add_argument("--out", required=True, help="feasibility report to write")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("simulate", help="run the three load cases over a design file")
    p.add_argument("--in", dest="in_path", required=True, help="design file")
    p.add_argument("--config", default=None, help="flat key=value config file (defaults if omitted)")
    p.add_argument("--out", required=True, help="results file to write")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker parallelism (default 1)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="validity, Pareto, correlation, and summary reports")
    p.add_argument("--in", dest="in_path", required=True, help="results file")
    p.add_argument("--out-dir", required=True, help="directory for report files")
    p.add_argument("--subset", type=_positive_int, default=None, help="analyze a seeded random subset")
    p.add_argument("--seed", type=int, default=0, help="subset seed (default 0)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("plot", help="scatter/histogram data files plus rendered figures")
    p.add_argument("--in", dest="in_path", required=True, help="results file")
    p.add_argument("--out-dir", required=True, help="directory for plot files")
    p.add_argument("--subset", type=_positive_int, default=None, help="plot a seeded random subset")
    p.add_argument("--seed", type=int, default=0, help="subset seed (default 0)")
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("converge", help="elements-per-tube sweep for one design row")
    p.add_argument("--in", dest="in_path", required=True, help="design file")
    p.add_argument("--row", default=None, help="row_id to sweep (default: first row)")
    p.add_argument("--case", choices=sorted(_CASE_NAMES) + ["all"], default="all")
    p.add_argument(
        "--subdivisions",
        type=_subdivision_list,
        default=list(DEFAULT_SUBDIVISIONS),
        help="comma-separated levels (default 1,2,4,8,16,32)",
    )
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--out", required=True, help="sweep table to write")
    p.set_defaults(func=_cmd_converge)

    return parser


def _load_sim_config(path) -> SimulationConfig:
    return load_config(path) if path else SimulationConfig()


def _cmd_generate(args) -> int:
    table = generate_designs(args.count, args.seed)
    dataset.write_designs(args.out, table)
    print(f"wrote {len(table)} designs to {args.out}")
    return 0


def _cmd_check(args) -> int:
    table = dataset.read_designs(args.in_path)
    reports = [check_buildable(params) for params in table.rows]
    dataset.write_feasibility_report(args.out, table.ids, reports)
    bad = sum(1 for r in reports if not r.feasible)
    print(f"checked {len(table)} designs: {len(table) - bad} feasible, {bad} infeasible")
    return 0


def _cmd_simulate(args) -> int:
    table = dataset.read_designs(args.in_path)
    config = _load_sim_config(args.config)
    results = run_batch(table, config, jobs=args.jobs)
    dataset.write_results(args.out, results)
    counts: dict[str, int] = {}
    for cls in results.validity:
        counts[cls] = counts.get(cls, 0) + 1
    for cls in sorted(counts):
        print(f"{cls}: {counts[cls]}")
    print(f"wrote {len(results)} results to {args.out}")
    return 0


def _cmd_analyze(args) -> int:
    results = dataset.read_results(args.in_path)
    if args.subset is not None:
        results = subset_rows(results, args.subset, args.seed)
    report = build_report(results)
    written = write_report(report, args.out_dir)
    print(
        f"analyzed {len(results)} rows over {len(report.objective_labels)} objectives: "
        f"{len(report.non_dominated_ids)} non-dominated"
    )
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_plot(args) -> int:
    results = dataset.read_results(args.in_path)
    if args.subset is not None:
        results = subset_rows(results, args.subset, args.seed)
    written = emit_plots(results, out_dir=args.out_dir)
    print(f"wrote {len(written)} plot files to {args.out_dir}")
    return 0


def _cmd_converge(args) -> int:
    table = dataset.read_designs(args.in_path)
    if not len(table):
        raise ParseError(f"{args.in_path}: no design rows")
    if args.row is None:
        params = table.rows[0]
    else:
        try:
            params = table.rows[table.ids.index(args.row)]
        except ValueError:
            raise ParseError(f"{args.in_path}: no row with row_id {args.row!r}") from None
    case = None if args.case == "all" else _CASE_NAMES[args.case]
    rows = convergence_study(params, case=case, subdivisions=args.subdivisions,
                             config=_load_sim_config(args.config))
    dataset.write_convergence_table(args.out, rows)
    print(f"wrote {len(rows)}-row sweep to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 3
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
