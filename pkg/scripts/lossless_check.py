"""Check on random small instances that expanding, solving and merging loses nothing.

Each instance is solved exactly as an SDVRP by brute force and then through
the expansion with the internal solver; the two costs are compared.
"""

import argparse
import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from oracles import sdvrp_optimum  # noqa: E402
from sdsplit import Node, SplitPolicy, VrpInstance, expand, merge_back, validate  # noqa: E402
from sdsplit.solver import SolverParams, solve  # noqa: E402


def toy(rng, name):
    n = rng.randint(1, 4)
    nodes = [Node(0, rng.randint(0, 20), rng.randint(0, 20))]
    nodes += [Node(i, rng.randint(0, 20), rng.randint(0, 20), rng.randint(1, 9)) for i in range(1, n + 1)]
    return VrpInstance(name, tuple(nodes), rng.randint(5, 12), None, "exact")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    equal = 0
    for i in range(args.count):
        inst = toy(rng, f"toy{i}")
        expanded, origin = expand(inst, SplitPolicy(k_bar=inst.fleet_size))
        merged = merge_back(solve(expanded, SolverParams(seed=i)), origin)
        assert validate(inst, merged).ok
        opt = sdvrp_optimum(inst)[0]
        equal += abs(merged.cost - opt) <= 1e-6
        print(f"{inst.name} n={inst.n_customers} opt={opt:.3f} merged={merged.cost:.3f}")
    print(f"# {equal}/{args.count} at the optimum")


if __name__ == "__main__":
    main()
