"""Print the minimum-size coalescing partition sizes for n <= 20, k <= 10.

Cells are checked against a bitmask brute force for n <= --check-n
(defaults to 12; 18 takes a few seconds per row).
"""

import argparse
import functools
import itertools
import time

from sdsplit.partitions import enumerate_partitions, mscp_table


@functools.lru_cache(maxsize=None)
def _coalesces(lam, gam):
    full = (1 << len(lam)) - 1

    @functools.lru_cache(maxsize=None)
    def go(i, used):
        if i == len(gam):
            return used == full
        free = [j for j in range(len(lam)) if not used >> j & 1]
        for r in range(1, len(free) + 1):
            for combo in itertools.combinations(free, r):
                if sum(lam[j] for j in combo) == gam[i]:
                    mask = used
                    for j in combo:
                        mask |= 1 << j
                    if go(i + 1, mask):
                        return True
        return False

    return go(0, 0)


def brute_size(n, k):
    targets = [tuple(p.parts) for p in enumerate_partitions(n, k)]
    for m in range(1, n + 1):
        for lam in enumerate_partitions(n, m):
            if len(lam.parts) == m and all(_coalesces(tuple(lam.parts), g) for g in targets):
                return m
    return n


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--check-n", type=int, default=12)
    args = ap.parse_args()
    start = time.perf_counter()
    table = mscp_table(args.n, args.k)
    print(f"# built in {time.perf_counter() - start:.3f}s")
    print("k\\n " + " ".join(f"{n:>2}" for n in range(1, args.n + 1)))
    for k, row in enumerate(table, 1):
        print(f"{k:>3} " + " ".join(f"{v:>2}" for v in row))
    bad = [
        (k, n)
        for k in range(1, args.k + 1)
        for n in range(1, min(args.n, args.check_n) + 1)
        if brute_size(n, k) != table[k - 1][n - 1]
    ]
    print(f"# brute force n <= {args.check_n}: " + ("all cells agree" if not bad else f"mismatch at {bad}"))


if __name__ == "__main__":
    main()
