"""Sizes and (optionally) costs over the (k_bar, q) grid for one instance.

Usage: python3 scripts/eil22_sweep.py path/to/eil22.vrp [--solve] [--backend external]
"""

import argparse
import sys
from pathlib import Path

from sdsplit.instance import read_instance
from sdsplit.rules import SplitPolicy
from sdsplit.solver import SolverParams
from sdsplit.sweep import DEFAULT_K_BARS, DEFAULT_QS, best_record, distinct_grid, records_to_csv, run_sweep, size_record


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("instance")
    ap.add_argument("--solve", action="store_true")
    ap.add_argument("--backend", default="internal", choices=["internal", "external"])
    ap.add_argument("--bks", type=float, default=None)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    inst = read_instance(Path(args.instance).read_text())
    if args.solve:
        params = SolverParams(runs=2, max_trials=200, backend=args.backend)
        records = run_sweep(inst, DEFAULT_K_BARS, DEFAULT_QS, params, args.bks, jobs=args.jobs)
        best = best_record(records)
        if best is not None:
            print(f"# best k_bar={best.k_bar} q={float(best.q):.2f} cost={best.best_cost}", file=sys.stderr)
    else:
        records = [size_record(inst, p) for p in distinct_grid(inst, DEFAULT_K_BARS, DEFAULT_QS)]
    sys.stdout.write(records_to_csv(records, [f"{inst.name} fleet={inst.fleet_size}"]))
    print(f"# k_bar=2 q=0.40 size: {size_record(inst, SplitPolicy(k_bar=2, q=0.4)).prob_size}", file=sys.stderr)


if __name__ == "__main__":
    main()
