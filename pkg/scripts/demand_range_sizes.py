"""Problem-size ratio of lossless expansions on random-demand copies of an instance.

For each demand range and seed, reports prob size / full size at a few
(k_bar, q) settings. Sizes only; no routing.
"""

import argparse
from pathlib import Path
import statistics

from sdsplit.instance import DEMAND_RANGES, generate_random, read_instance
from sdsplit.rules import SplitPolicy, full_size, problem_size


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("instance")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--capacity", type=int, default=160)
    ap.add_argument("--k-bar", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--q", type=float, nargs="+", default=[0.0, 0.2, 0.4])
    args = ap.parse_args()
    base = read_instance(Path(args.instance).read_text())
    print("range,k_bar,q,mean_ratio_percent,min,max")
    for name in sorted(DEMAND_RANGES):
        for k in args.k_bar:
            for q in args.q:
                ratios = []
                for seed in range(args.seeds):
                    inst = generate_random(base, name, seed, args.capacity)
                    ratios.append(100 * problem_size(inst, SplitPolicy(k_bar=k, q=q)) / full_size(inst))
                print(f"{name},{k},{q:.2f},{statistics.mean(ratios):.2f},{min(ratios):.2f},{max(ratios):.2f}")


if __name__ == "__main__":
    main()
