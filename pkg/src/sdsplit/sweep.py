"""(k_bar, q) parameter sweeps over one instance."""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .instance import Solution, VrpInstance
from .rules import SplitPolicy, as_fraction, full_size, problem_size, split_demand
from .solver import InfeasibleError, SolverParams, solve
from .transform import count_splits, expand, gap, merge_back, validate

DEFAULT_K_BARS = tuple(range(2, 9))
DEFAULT_QS = tuple(Fraction(i, 20) for i in range(21))


@dataclass(frozen=True)
class SweepRecord:
    instance: str
    k_bar: int
    q: Fraction
    prob_size: int
    full_size: int
    ratio_percent: float
    best_cost: Optional[float] = None
    gap_percent: Optional[float] = None
    time_seconds: Optional[float] = None
    n_splits: Optional[int] = None

    def row(self) -> list[str]:
        def fmt(v, spec):
            return "" if v is None else format(v, spec)

        return [
            self.instance,
            str(self.k_bar),
            f"{float(self.q):.2f}",
            str(self.prob_size),
            str(self.full_size),
            f"{self.ratio_percent:.2f}",
            "" if self.best_cost is None else (str(self.best_cost) if isinstance(self.best_cost, int) else f"{self.best_cost:.2f}"),
            fmt(self.gap_percent, ".3f"),
            fmt(self.time_seconds, ".2f"),
            fmt(self.n_splits, "d"),
        ]


FIELDS = [f.name for f in fields(SweepRecord)]


def size_record(instance: VrpInstance, policy: SplitPolicy, full: Optional[int] = None) -> SweepRecord:
    full = full_size(instance) if full is None else full
    prob = problem_size(instance, policy)
    return SweepRecord(instance.name, policy.k_bar, policy.q, prob, full, 100.0 * prob / full)


def evaluate(
    instance: VrpInstance,
    policy: SplitPolicy,
    params: SolverParams,
    bks: Optional[float] = None,
    full: Optional[int] = None,
) -> tuple[SweepRecord, Solution]:
    """Expand, solve, merge back and score one policy."""
    start = time.perf_counter()
    expanded, origin = expand(instance, policy)
    merged = merge_back(solve(expanded, params), origin)
    elapsed = time.perf_counter() - start
    report = validate(instance, merged)
    if not report.ok:
        raise RuntimeError("merged solution is invalid:\n" + report.to_text())
    base = size_record(instance, policy, full)
    record = SweepRecord(
        *astuple(base)[:6],
        best_cost=merged.cost,
        gap_percent=None if bks is None else gap(merged.cost, bks),
        time_seconds=elapsed,
        n_splits=count_splits(merged),
    )
    return record, merged


def distinct_grid(
    instance: VrpInstance, k_bars: Iterable[int], qs: Iterable, rule: str = "lossless"
) -> list[SplitPolicy]:
    """Policies for the grid, keeping only the highest q among identical expansions."""
    qs = sorted({as_fraction(q) for q in qs}, reverse=True)
    policies = []
    for k in sorted(set(k_bars)):
        seen = set()
        for q in qs:
            policy = SplitPolicy.from_rule(rule, k, q)
            sig = tuple(split_demand(c.demand, instance.capacity, policy).parts for c in instance.customers)
            if sig not in seen:
                seen.add(sig)
                policies.append(policy)
    return sorted(policies, key=lambda p: (p.k_bar, p.q))


def _run_one(args):
    instance, policy, params, bks, full = args
    try:
        return evaluate(instance, policy, params, bks, full)[0]
    except InfeasibleError:
        return size_record(instance, policy, full)


def run_sweep(
    instance: VrpInstance,
    k_bars: Sequence[int] = DEFAULT_K_BARS,
    qs: Sequence = DEFAULT_QS,
    params: SolverParams = SolverParams(),
    bks: Optional[float] = None,
    rule: str = "lossless",
    jobs: int = 1,
) -> list[SweepRecord]:
    """One record per distinct expansion; infeasible grid points keep empty result fields."""
    full = full_size(instance)
    tasks = [(instance, p, params, bks, full) for p in distinct_grid(instance, k_bars, qs, rule)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_one, tasks))
    else:
        records = [_run_one(t) for t in tasks]
    return sorted(records, key=lambda r: (r.k_bar, r.q))


def best_record(records: Iterable[SweepRecord]) -> Optional[SweepRecord]:
    """Lowest cost, then shortest runtime, then smaller problem, then smaller k_bar."""
    solved = [r for r in records if r.best_cost is not None]
    if not solved:
        return None
    return min(solved, key=lambda r: (r.best_cost, round(r.time_seconds, 2), r.prob_size, r.k_bar))


def records_to_csv(records: Iterable[SweepRecord], header: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIELDS)
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()
