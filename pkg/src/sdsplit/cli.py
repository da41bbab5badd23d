"""Command line interface: ``sdsplit {mscp,table,split,solve,sweep,validate}``.

Exit codes: 0 success, 1 validation failure or infeasibility, 2 usage error,
3 external solver failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import shlex
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .instance import ParseError, format_solution, format_tsplib, parse_solution, read_instance
from .partitions import mscp, mscp_table
from .rules import SplitPolicy, as_fraction
from .solver import (
    ExternalSolverError,
    InfeasibleError,
    SolverNotFoundError,
    SolverParams,
    ValidationFailed,
)
from .solver.lkh import SOLVER_ENV
from .sweep import DEFAULT_K_BARS, DEFAULT_QS, best_record, evaluate, records_to_csv, run_sweep, size_record
from .transform import expand, validate

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _invocation(argv: Sequence[str]) -> str:
    return "sdsplit " + " ".join(shlex.quote(a) for a in argv)


def _int_list(text: str) -> list[int]:
    items = [t for t in text.replace(" ", "").split(",") if t]
    if not items:
        raise argparse.ArgumentTypeError("empty list")
    out = []
    for item in items:
        if "-" in item:
            lo, hi = item.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(item))
    return out


def _q_list(text: str) -> list:
    items = [t for t in text.replace(" ", "").split(",") if t]
    if not items:
        raise argparse.ArgumentTypeError("empty q set")
    return [as_fraction(t) for t in items]


def _load_instance(args):
    path = Path(args.instance)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read instance {path}: {exc}") from None
    return read_instance(text, args.rounding, args.customers, args.capacity, args.fleet)


def _solver_params(args) -> SolverParams:
    return SolverParams(
        seed=args.seed,
        runs=args.runs,
        max_trials=args.max_trials,
        time_limit=args.time_limit,
        backend=args.backend,
        external_path=args.solver_path or os.environ.get(SOLVER_ENV),
    )


def _bks_for(args, name: str) -> Optional[float]:
    if args.bks is not None:
        return args.bks
    if args.bks_file:
        with open(args.bks_file, newline="") as fh:
            for row in csv.DictReader(line for line in fh if not line.startswith("#")):
                if row["instance"] == name:
                    return float(row["bks"])
    return None


def _write(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text)


# --------------------------------------------------------------------------- commands


def cmd_mscp(args) -> int:
    mu = mscp(args.n, args.k)
    print(f"{mu} (size {len(mu)})")
    return EXIT_OK


def cmd_table(args) -> int:
    table = mscp_table(args.n_max, args.k_max)
    cols = list(range(1, args.n_max + 1))
    if args.format == "csv":
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["k"] + cols)
        for k, row in enumerate(table, start=1):
            w.writerow([k] + row)
    else:
        width = max(3, len(str(args.n_max)) + 1)
        print("k\\n" + "".join(f"{n:>{width}}" for n in cols))
        for k, row in enumerate(table, start=1):
            print(f"{k:>3}" + "".join(f"{v:>{width}}" for v in row))
    return EXIT_OK


def cmd_split(args) -> int:
    instance = _load_instance(args)
    policy = SplitPolicy.from_rule(args.rule, args.k_bar, args.q)
    expanded, origin = expand(instance, policy)
    rec = size_record(instance, policy)
    header = _invocation(args.argv)
    if args.out:
        text = format_tsplib(expanded)
        _write(args.out, text.replace("\n", f"\nCOMMENT : {header}\n", 1))
    if args.origin_out:
        _write(args.origin_out, f"# {header}\n" + origin.to_csv())
    if args.format == "csv":
        print(records_to_csv([rec]), end="")
    else:
        print(f"prob size {rec.prob_size}, full size {rec.full_size}, ratio {rec.ratio_percent:.2f}%")
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = _load_instance(args)
    policy = SplitPolicy.from_rule(args.rule, args.k_bar, args.q)
    record, solution = evaluate(instance, policy, _solver_params(args), _bks_for(args, instance.name))
    _write(args.out, format_solution(solution, instance.name, [_invocation(args.argv)]))
    if args.format == "csv":
        print(records_to_csv([record]), end="")
    else:
        parts = [
            f"instance {record.instance}",
            f"k_bar {record.k_bar}",
            f"q {float(record.q):.2f}",
            f"prob size {record.prob_size}",
            f"cost {record.row()[6]}",
        ]
        if record.gap_percent is not None:
            parts.append(f"gap {record.gap_percent:.3f}%")
        parts += [f"splits {record.n_splits}", f"time {record.time_seconds:.2f}s"]
        print(", ".join(parts))
    return EXIT_OK


def cmd_sweep(args) -> int:
    instance = _load_instance(args)
    records = run_sweep(
        instance,
        args.k_bar,
        args.q,
        _solver_params(args),
        _bks_for(args, instance.name),
        args.rule,
        args.jobs,
    )
    text = records_to_csv(records)
    _write(args.out, records_to_csv(records, [_invocation(args.argv)]))
    print(text, end="")
    best = best_record(records)
    if best is not None:
        print(f"# best k_bar={best.k_bar} q={float(best.q):.2f} cost={best.row()[6]}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    instance = _load_instance(args)
    try:
        solution = parse_solution(Path(args.solution).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read solution {args.solution}: {exc}") from None
    report = validate(instance, solution)
    if report.ok:
        print("ok")
        return EXIT_OK
    unknown = [v for v in report.violations if v.kind == "unknown-node"]
    if unknown:
        print(
            f"error: solution names node ids not in instance {instance.name} "
            f"(which has nodes 0..{len(instance.nodes) - 1})",
            file=sys.stderr,
        )
    print(report.to_text(), end="")
    return EXIT_INVALID


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdsplit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("text", "csv"), default="text")

    inst = argparse.ArgumentParser(add_help=False)
    inst.add_argument("instance", help="TSPLIB CVRP or Solomon VRPTW file")
    inst.add_argument("--customers", type=int, help="keep only the first N customers")
    inst.add_argument("--capacity", type=int, help="override the vehicle capacity")
    inst.add_argument("--fleet", type=int, help="fleet size (default: k_min)")
    inst.add_argument("--rounding", choices=("nint", "exact"), help="cost rounding mode")

    policy = argparse.ArgumentParser(add_help=False)
    policy.add_argument("--rule", choices=("lossless", "denom20", "denom25"), default="lossless")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--seed", type=int, default=0)
    solver.add_argument("--runs", type=int, default=3)
    solver.add_argument("--max-trials", type=int, default=100)
    solver.add_argument("--time-limit", type=float, default=60.0, help="seconds")
    solver.add_argument("--backend", choices=("internal", "external"), default="internal")
    solver.add_argument("--solver-path", help=f"external solver binary (env {SOLVER_ENV})")
    solver.add_argument("--bks", type=float, help="best known solution for the gap column")
    solver.add_argument("--bks-file", help="CSV with instance,bks columns")

    p = sub.add_parser("mscp", parents=[fmt], help="minimum-size coalescing partition")
    p.add_argument("n", type=int)
    p.add_argument("k", type=int)
    p.set_defaults(func=cmd_mscp)

    p = sub.add_parser("table", parents=[fmt], help="table of partition sizes")
    p.add_argument("n_max", type=int, nargs="?", default=20)
    p.add_argument("k_max", type=int, nargs="?", default=10)
    p.set_defaults(func=cmd_table)

    for name, func, help_ in (
        ("split", cmd_split, "expand an instance"),
        ("solve", cmd_solve, "expand, solve and merge back"),
    ):
        parents = [inst, policy, fmt] + ([solver] if name == "solve" else [])
        p = sub.add_parser(name, parents=parents, help=help_)
        p.add_argument("--k-bar", type=int, default=2)
        p.add_argument("--q", type=as_fraction, default=as_fraction(0))
        p.add_argument("--out", help="output file")
        if name == "split":
            p.add_argument("--origin-out", help="origin map CSV")
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", parents=[inst, policy, solver], help="(k_bar, q) grid")
    p.add_argument("--k-bar", type=_int_list, default=list(DEFAULT_K_BARS), help="e.g. 2,3 or 2-8")
    p.add_argument("--q", type=_q_list, default=list(DEFAULT_QS), help="e.g. 0,0.05,0.2")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV output file")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", parents=[inst], help="check a solution file")
    p.add_argument("solution")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleError, ValidationFailed) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SolverNotFoundError, ExternalSolverError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
