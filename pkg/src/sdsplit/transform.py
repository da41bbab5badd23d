"""Reduce a split-delivery instance to an unsplittable one and map solutions back."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

from .instance import Node, Route, Solution, VrpInstance, Visit, solution_cost
from .rules import SplitPolicy, split_demand

COST_TOL = 1e-6
TIME_TOL = 1e-9


@dataclass(frozen=True)
class OriginMap:
    """``entries[copy_id] = (original customer id, piece size)``; entry 0 is the depot."""

    source: VrpInstance
    entries: tuple[tuple[int, int], ...]
    copies: dict[int, tuple[int, ...]] = field(init=False, compare=False)

    def __post_init__(self):
        copies: dict[int, list[int]] = {}
        for copy_id, (orig, _) in enumerate(self.entries):
            if copy_id:
                copies.setdefault(orig, []).append(copy_id)
        object.__setattr__(self, "copies", {o: tuple(c) for o, c in copies.items()})

    def original(self, copy_id: int) -> int:
        if not 0 < copy_id < len(self.entries):
            raise KeyError(f"copy id {copy_id} is not in the origin map")
        return self.entries[copy_id][0]

    def pieces(self, customer: int) -> list[int]:
        return [self.entries[c][1] for c in self.copies[customer]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["copy", "original", "piece"])
        for copy_id, (orig, piece) in enumerate(self.entries):
            if copy_id:
                writer.writerow([copy_id, orig, piece])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, source: VrpInstance, text: str) -> "OriginMap":
        entries = [(0, 0)]
        lines = (line for line in text.splitlines() if not line.startswith("#"))
        for i, row in enumerate(csv.DictReader(lines), start=1):
            if int(row["copy"]) != i:
                raise ValueError(f"origin map rows must be numbered 1..n, row {i} is {row['copy']}")
            entries.append((int(row["original"]), int(row["piece"])))
        return cls(source, tuple(entries))


def expand(instance: VrpInstance, policy: SplitPolicy) -> tuple[VrpInstance, OriginMap]:
    """Replace each customer by co-located copies carrying its demand pieces."""
    nodes = [instance.nodes[0]]
    entries = [(0, 0)]
    for cust in instance.customers:
        for piece in split_demand(cust.demand, instance.capacity, policy):
            if piece > instance.capacity:
                raise AssertionError(f"piece {piece} of customer {cust.id} exceeds capacity")
            nodes.append(
                Node(len(nodes), cust.x, cust.y, piece, cust.window, cust.service_time)
            )
            entries.append((cust.id, piece))
    q = policy.q
    tag = f"{policy.kind[:5]}-k{policy.k_bar}-q{float(q):g}"
    expanded = VrpInstance(
        f"{instance.name}-{tag}",
        tuple(nodes),
        instance.capacity,
        instance.fleet_size,
        instance.rounding,
    )
    return expanded, OriginMap(instance, tuple(entries))


def merge_back(expanded_solution: Solution, origin: OriginMap) -> Solution:
    """Collapse copies of one customer within a route into a single visit.

    The merged visit sits where the first copy appeared.  The result is re-costed
    on the original instance.
    """
    routes = []
    for route in expanded_solution.routes:
        order: list[int] = []
        qty: dict[int, int] = {}
        for visit in route.visits:
            orig = origin.original(visit.node)
            if orig not in qty:
                order.append(orig)
                qty[orig] = 0
            qty[orig] += visit.quantity
        if order:
            routes.append(Route(Visit(o, qty[o]) for o in order))
    merged = Solution(routes)
    return Solution(merged.routes, solution_cost(origin.source, merged))


def count_splits(solution: Solution) -> int:
    """Sum over customers of (number of routes visiting it) - 1."""
    visits: dict[int, int] = {}
    for route in solution.routes:
        for node in set(route.nodes):
            visits[node] = visits.get(node, 0) + 1
    return sum(r - 1 for r in visits.values())


def gap(best: float, bks: float) -> float:
    """Percent distance of ``best`` above the best known solution ``bks``."""
    if bks <= 0:
        raise ValueError(f"best known solution must be positive, got {bks}")
    return 100.0 * (best - bks) / bks


@dataclass(frozen=True)
class Violation:
    kind: str
    route: Optional[int] = None
    node: Optional[int] = None
    amount: Optional[float] = None

    def __str__(self) -> str:
        def show(v):
            return "-" if v is None else (f"{v:g}" if isinstance(v, float) else str(v))

        return f"{self.kind} route={show(self.route)} node={show(self.node)} amount={show(self.amount)}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def add(self, kind, route=None, node=None, amount=None):
        self.violations.append(Violation(kind, route, node, amount))

    def to_text(self) -> str:
        return "".join(f"{v}\n" for v in self.violations)


def validate(
    instance: VrpInstance, solution: Solution, allow_split: bool = True
) -> ValidationReport:
    """Check capacity, demand coverage, fleet size and time windows.

    With ``allow_split=False`` every customer must be visited exactly once (the
    unsplittable problem).  A stated ``solution.cost`` that differs from the
    recomputed cost is reported too.
    """
    report = ValidationReport()
    n = len(instance.nodes)
    delivered = [0] * n
    visited_by: list[list[int]] = [[] for _ in range(n)]
    routes = [r for r in solution.routes if r.visits]
    if len(routes) > instance.fleet_size:
        report.add("fleet", amount=len(routes) - instance.fleet_size)
    bad_ids = False
    for r, route in enumerate(routes):
        for v in route.visits:
            if not 0 < v.node < n:
                report.add("unknown-node", r, v.node)
                bad_ids = True
            elif v.quantity < 1:
                report.add("non-positive-delivery", r, v.node, v.quantity)
        if bad_ids:
            continue
        for v in route.visits:
            delivered[v.node] += v.quantity
            visited_by[v.node].append(r)
        if route.load > instance.capacity:
            report.add("capacity", r, amount=route.load - instance.capacity)
        if instance.has_time_windows:
            _check_windows(instance, r, route.nodes, report)
    if bad_ids:
        return report
    for cust in instance.customers:
        short = cust.demand - delivered[cust.id]
        if short:
            report.add("coverage", node=cust.id, amount=short)
        if not allow_split and len(visited_by[cust.id]) > 1:
            report.add("split", node=cust.id, amount=len(visited_by[cust.id]))
    if solution.cost is not None:
        actual = solution_cost(instance, Solution(routes))
        if abs(actual - solution.cost) > COST_TOL * max(1.0, abs(actual)):
            report.add("cost-mismatch", amount=solution.cost - actual)
    return report


def _check_windows(instance: VrpInstance, r: int, nodes, report: ValidationReport) -> None:
    depot = instance.nodes[0]
    time = depot.window[0]
    prev = 0
    for node_id in nodes:
        node = instance.nodes[node_id]
        time += instance.travel_time(prev, node_id)
        if time > node.window[1] + TIME_TOL:
            report.add("time-window", r, node_id, time - node.window[1])
        time = max(time, node.window[0]) + node.service_time
        prev = node_id
    time += instance.travel_time(prev, 0)
    if time > depot.window[1] + TIME_TOL:
        report.add("depot-window", r, 0, time - depot.window[1])
