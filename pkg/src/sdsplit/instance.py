"""Instances, solutions, file formats and random demand generation.

Node 0 is always the depot.  Costs follow the instance's rounding mode:
``"nint"`` rounds Euclidean distances half-up to integers (TSPLIB), ``"exact"``
keeps them as floats.  Travel times for time windows are always the exact
distances.
"""

from __future__ import annotations

import dataclasses
import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Optional, Sequence

ROUNDING_MODES = ("nint", "exact")

# demand ranges as fractions of capacity; bounds are ceil(fraction * Q)
DEMAND_RANGES = {
    "D1": (Fraction(1, 100), Fraction(10, 100)),
    "D2": (Fraction(10, 100), Fraction(30, 100)),
    "D3": (Fraction(10, 100), Fraction(50, 100)),
    "D4": (Fraction(10, 100), Fraction(90, 100)),
    "D5": (Fraction(30, 100), Fraction(70, 100)),
    "D6": (Fraction(70, 100), Fraction(90, 100)),
}


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float
    demand: int = 0
    window: Optional[tuple[float, float]] = None
    service_time: float = 0.0


@dataclass(frozen=True)
class VrpInstance:
    name: str
    nodes: tuple[Node, ...]
    capacity: int
    fleet_size: Optional[int] = None
    rounding: str = "nint"

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if len(self.nodes) < 1:
            raise ValueError("an instance needs a depot")
        if self.capacity < 1:
            raise ValueError(f"capacity must be positive, got {self.capacity}")
        if self.rounding not in ROUNDING_MODES:
            raise ValueError(f"rounding must be one of {ROUNDING_MODES}, got {self.rounding!r}")
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise ValueError(f"node at position {i} has id {node.id}")
        if self.nodes[0].demand != 0:
            raise ValueError("depot demand must be 0")
        for node in self.nodes[1:]:
            if node.demand < 1:
                raise ValueError(f"customer {node.id} has non-positive demand {node.demand}")
        windows = [n.window is not None for n in self.nodes]
        if any(windows) and not all(windows):
            raise ValueError("either every node or no node carries a time window")
        for node in self.nodes:
            if node.window is not None and node.window[0] > node.window[1]:
                raise ValueError(f"node {node.id} has an empty window {node.window}")
            if node.service_time < 0:
                raise ValueError(f"node {node.id} has negative service time")
        if self.fleet_size is None:
            object.__setattr__(self, "fleet_size", k_min(self))
        elif self.fleet_size < 1:
            raise ValueError(f"fleet size must be positive, got {self.fleet_size}")

    @property
    def customers(self) -> tuple[Node, ...]:
        return self.nodes[1:]

    @property
    def n_customers(self) -> int:
        return len(self.nodes) - 1

    @property
    def has_time_windows(self) -> bool:
        return self.nodes[0].window is not None

    @property
    def total_demand(self) -> int:
        return sum(n.demand for n in self.nodes)

    def distance(self, i: int, j: int) -> float:
        a, b = self.nodes[i], self.nodes[j]
        return math.hypot(a.x - b.x, a.y - b.y)

    def edge_cost(self, i: int, j: int):
        return round_cost(self.distance(i, j), self.rounding)

    travel_time = distance

    @cached_property
    def cost_matrix(self) -> list[list]:
        n = len(self.nodes)
        return [[self.edge_cost(i, j) for j in range(n)] for i in range(n)]

    @cached_property
    def time_matrix(self) -> list[list[float]]:
        n = len(self.nodes)
        return [[self.distance(i, j) for j in range(n)] for i in range(n)]


def round_cost(distance: float, rounding: str):
    if rounding == "nint":
        return int(math.floor(distance + 0.5))
    return distance


def k_min(instance: VrpInstance) -> int:
    """Smallest fleet that can carry the total demand."""
    return max(1, -(-instance.total_demand // instance.capacity))


def edge_cost(instance: VrpInstance, i: int, j: int):
    return instance.edge_cost(i, j)


class Visit(NamedTuple):
    node: int
    quantity: int


@dataclass(frozen=True)
class Route:
    """Visits between two depot stops; the depot itself is not stored."""

    visits: tuple[Visit, ...]

    def __init__(self, visits):
        object.__setattr__(self, "visits", tuple(Visit(int(n), int(q)) for n, q in visits))

    @property
    def load(self) -> int:
        return sum(v.quantity for v in self.visits)

    @property
    def nodes(self) -> list[int]:
        return [v.node for v in self.visits]

    def __len__(self) -> int:
        return len(self.visits)


@dataclass(frozen=True)
class Solution:
    routes: tuple[Route, ...]
    cost: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "routes", tuple(self.routes))


def route_cost(instance: VrpInstance, nodes: Sequence[int]):
    cost = 0
    prev = 0
    for node in nodes:
        cost += instance.edge_cost(prev, node)
        prev = node
    return cost + instance.edge_cost(prev, 0) if nodes else 0


def solution_cost(instance: VrpInstance, solution: Solution):
    """Total depot-to-depot travel cost under the instance's rounding mode."""
    return sum((route_cost(instance, r.nodes) for r in solution.routes), 0)


def full_routes(instance: VrpInstance, node_routes: Sequence[Sequence[int]]) -> Solution:
    """Solution delivering each listed node's whole demand (unsplit routes)."""
    routes = [Route((n, instance.nodes[n].demand) for n in r) for r in node_routes if r]
    sol = Solution(routes)
    return Solution(sol.routes, solution_cost(instance, sol))


# --------------------------------------------------------------------------- TSPLIB


def _num(token: str, line: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"{what}: {token!r} is not a number", line) from None


def _int(token: str, line: int, what: str) -> int:
    value = _num(token, line, what)
    if value != int(value):
        raise ParseError(f"{what}: {token!r} is not an integer", line)
    return int(value)


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


_SECTIONS = (
    "NODE_COORD_SECTION",
    "DEMAND_SECTION",
    "DEPOT_SECTION",
    "SERVICE_TIME_SECTION",
    "TIME_WINDOW_SECTION",
)
_ROW_WIDTH = {
    "NODE_COORD_SECTION": 3,
    "DEMAND_SECTION": 2,
    "SERVICE_TIME_SECTION": 2,
    "TIME_WINDOW_SECTION": 3,
}


def parse_tsplib(
    text: str, rounding: str = "nint", fleet_size: Optional[int] = None
) -> VrpInstance:
    """Read a TSPLIB-style CVRP file (EUC_2D only).

    ``SERVICE_TIME_SECTION`` and ``TIME_WINDOW_SECTION`` are accepted as in the
    LKH-3 CVRPTW dialect.  The fleet is ``fleet_size``, else the ``VEHICLES``
    header, else :func:`k_min`.  Nodes are renumbered so that the depot is 0 and
    the remaining nodes keep file order.
    """
    header: dict[str, str] = {}
    rows: dict[str, list[tuple[int, list[str]]]] = {}
    depots: list[int] = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        word = line.split()[0].rstrip(":")
        if word in _SECTIONS:
            section = word
            rows.setdefault(section, [])
            continue
        if word == "EOF":
            break
        if section is None or (":" in line and not _looks_numeric(line)):
            if ":" not in line:
                raise ParseError(f"malformed header line {line!r}", lineno)
            key, value = line.split(":", 1)
            header[key.strip().upper()] = value.strip()
            section = None
            continue
        tokens = line.split()
        if section == "DEPOT_SECTION":
            for tok in tokens:
                val = _int(tok, lineno, "DEPOT_SECTION")
                if val == -1:
                    section = "DEPOT_DONE"
                    break
                depots.append(val)
            continue
        if section == "DEPOT_DONE":
            raise ParseError(f"unexpected data after DEPOT_SECTION terminator: {line!r}", lineno)
        if len(tokens) != _ROW_WIDTH[section]:
            raise ParseError(
                f"{section} row needs {_ROW_WIDTH[section]} fields, got {len(tokens)}", lineno
            )
        rows[section].append((lineno, tokens))

    for key in ("DIMENSION", "CAPACITY"):
        if key not in header:
            raise ParseError(f"missing {key} header")
    ewt = header.get("EDGE_WEIGHT_TYPE", "EUC_2D").upper()
    if ewt != "EUC_2D":
        raise ParseError(f"only EDGE_WEIGHT_TYPE EUC_2D is supported, got {ewt}")
    try:
        dim = int(header["DIMENSION"])
        capacity = int(header["CAPACITY"])
    except ValueError as exc:
        raise ParseError(f"malformed DIMENSION/CAPACITY header: {exc}") from None
    for sec in ("NODE_COORD_SECTION", "DEMAND_SECTION"):
        if sec not in rows:
            raise ParseError(f"missing {sec}")
        if len(rows[sec]) != dim:
            raise ParseError(f"{sec} has {len(rows[sec])} rows but DIMENSION is {dim}")

    coords = {}
    for lineno, tok in rows["NODE_COORD_SECTION"]:
        coords[_int(tok[0], lineno, "node id")] = (
            _num(tok[1], lineno, "x"),
            _num(tok[2], lineno, "y"),
        )
    demand = {}
    for lineno, tok in rows["DEMAND_SECTION"]:
        nid = _int(tok[0], lineno, "node id")
        if nid not in coords:
            raise ParseError(f"DEMAND_SECTION names unknown node {nid}", lineno)
        demand[nid] = _int(tok[1], lineno, "demand")
        if demand[nid] < 0:
            raise ParseError(f"negative demand {demand[nid]} for node {nid}", lineno)
    service = {}
    for lineno, tok in rows.get("SERVICE_TIME_SECTION", []):
        service[_int(tok[0], lineno, "node id")] = _num(tok[1], lineno, "service time")
    windows = {}
    for lineno, tok in rows.get("TIME_WINDOW_SECTION", []):
        windows[_int(tok[0], lineno, "node id")] = (
            _num(tok[1], lineno, "ready time"),
            _num(tok[2], lineno, "due time"),
        )
    if windows and set(windows) != set(coords):
        raise ParseError("TIME_WINDOW_SECTION does not cover every node")

    depot = depots[0] if depots else min(coords)
    if len(depots) > 1:
        raise ParseError("multiple depots are not supported")
    if depot not in coords:
        raise ParseError(f"depot {depot} is not a node")
    order = [depot] + [nid for nid in coords if nid != depot]
    nodes = []
    for new_id, nid in enumerate(order):
        x, y = coords[nid]
        nodes.append(
            Node(new_id, x, y, demand[nid], windows.get(nid), service.get(nid, 0.0))
        )
    if fleet_size is None and "VEHICLES" in header:
        fleet_size = int(header["VEHICLES"])
    try:
        return VrpInstance(header.get("NAME", "unnamed"), tuple(nodes), capacity, fleet_size, rounding)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def _looks_numeric(line: str) -> bool:
    return bool(re.match(r"^[-+]?\d", line))


def format_tsplib(instance: VrpInstance, scale: float = 1) -> str:
    """Canonical TSPLIB text; ``parse_tsplib`` of the result restores the instance.

    ``scale`` multiplies coordinates and times (used to carry decimals through
    solvers that round EUC_2D distances).
    """
    tw = instance.has_time_windows
    lines = [
        f"NAME : {instance.name}",
        f"TYPE : {'CVRPTW' if tw else 'CVRP'}",
        f"DIMENSION : {len(instance.nodes)}",
        f"CAPACITY : {instance.capacity}",
        f"VEHICLES : {instance.fleet_size}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        "NODE_COORD_SECTION",
    ]
    lines += [f"{n.id + 1} {_fmt(n.x * scale)} {_fmt(n.y * scale)}" for n in instance.nodes]
    lines.append("DEMAND_SECTION")
    lines += [f"{n.id + 1} {n.demand}" for n in instance.nodes]
    if tw:
        lines.append("SERVICE_TIME_SECTION")
        lines += [f"{n.id + 1} {_fmt(n.service_time * scale)}" for n in instance.nodes]
        lines.append("TIME_WINDOW_SECTION")
        lines += [
            f"{n.id + 1} {_fmt(n.window[0] * scale)} {_fmt(n.window[1] * scale)}"
            for n in instance.nodes
        ]
    lines += ["DEPOT_SECTION", "1", "-1", "EOF"]
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------- Solomon


def parse_solomon(
    text: str,
    customers: Optional[int] = None,
    capacity: Optional[int] = None,
    rounding: str = "exact",
    fleet_size: Optional[int] = None,
) -> VrpInstance:
    """Read a Solomon VRPTW file.

    ``customers`` keeps only the first N customers and ``capacity`` overrides Q; when
    either is given the name becomes ``<name>.<N>.<Q>`` (e.g. ``C101.25.30``).
    The fleet defaults to :func:`k_min`, not the file's vehicle count.
    """
    lines = text.splitlines()
    name = None
    file_capacity = None
    rows: list[tuple[int, list[str]]] = []
    state = "name"
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        upper = line.upper()
        if state == "name":
            name = line
            state = "vehicle"
        elif state == "vehicle":
            if upper.startswith("NUMBER"):
                state = "vehicle_row"
        elif state == "vehicle_row":
            tokens = line.split()
            if len(tokens) != 2:
                raise ParseError(f"expected vehicle number and capacity, got {line!r}", lineno)
            _int(tokens[0], lineno, "vehicle number")
            file_capacity = _int(tokens[1], lineno, "capacity")
            state = "customer"
        elif state == "customer":
            if upper.startswith("CUST"):
                state = "rows"
        elif state == "rows":
            if not rows and not _looks_numeric(line):
                continue  # column headings
            tokens = line.split()
            if len(tokens) != 7:
                raise ParseError(f"customer row needs 7 fields, got {len(tokens)}", lineno)
            rows.append((lineno, tokens))
    if file_capacity is None:
        raise ParseError("missing VEHICLE section with NUMBER/CAPACITY")
    if not rows:
        raise ParseError("missing CUSTOMER rows")

    nodes = []
    keep = len(rows) if customers is None else customers + 1
    if keep > len(rows):
        raise ParseError(f"asked for {customers} customers, file has {len(rows) - 1}")
    for new_id, (lineno, tok) in enumerate(rows[:keep]):
        cid, x, y, demand, ready, due, service = (
            _int(t, lineno, f) for t, f in zip(tok, ("id", "x", "y", "demand", "ready", "due", "service"))
        )
        if demand < 0:
            raise ParseError(f"negative demand {demand} for customer {cid}", lineno)
        if new_id > 0 and demand == 0:
            raise ParseError(f"customer {cid} has zero demand", lineno)
        nodes.append(Node(new_id, x, y, demand, (ready, due), service))

    q = capacity if capacity is not None else file_capacity
    if customers is not None or capacity is not None:
        name = f"{name}.{keep - 1}.{q}"
    try:
        return VrpInstance(name, tuple(nodes), q, fleet_size, rounding)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def format_solomon(instance: VrpInstance) -> str:
    if not instance.has_time_windows:
        raise ValueError("Solomon format requires time windows")
    lines = [
        instance.name,
        "",
        "VEHICLE",
        "NUMBER     CAPACITY",
        f"{instance.fleet_size:>5} {instance.capacity:>12}",
        "",
        "CUSTOMER",
        "CUST NO.  XCOORD.   YCOORD.    DEMAND   READY TIME  DUE DATE   SERVICE   TIME",
        "",
    ]
    for n in instance.nodes:
        fields = (n.id, n.x, n.y, n.demand, n.window[0], n.window[1], n.service_time)
        lines.append(" ".join(f"{_fmt(v):>10}" for v in fields))
    return "\n".join(lines) + "\n"


def read_instance(
    text: str,
    rounding: Optional[str] = None,
    customers: Optional[int] = None,
    capacity: Optional[int] = None,
    fleet_size: Optional[int] = None,
) -> VrpInstance:
    """Detect the format (TSPLIB if it has a NODE_COORD_SECTION) and parse."""
    if "NODE_COORD_SECTION" in text:
        inst = parse_tsplib(text, rounding or "nint", fleet_size)
        if capacity is not None or customers is not None:
            nodes = inst.nodes if customers is None else inst.nodes[: customers + 1]
            inst = VrpInstance(
                inst.name, nodes, capacity or inst.capacity, fleet_size, inst.rounding
            )
        return inst
    return parse_solomon(text, customers, capacity, rounding or "exact", fleet_size)


# --------------------------------------------------------------------------- generator


def demand_bounds(demand_range: str, capacity: int) -> tuple[int, int]:
    lo, hi = DEMAND_RANGES[demand_range]
    return math.ceil(lo * capacity), math.ceil(hi * capacity)


def generate_random(
    base: VrpInstance, demand_range: str, seed: int, capacity: int = 160
) -> VrpInstance:
    """Copy ``base``'s coordinates with uniform integer demands from a named range."""
    if demand_range not in DEMAND_RANGES:
        raise ValueError(f"unknown demand range {demand_range!r}; use one of {sorted(DEMAND_RANGES)}")
    lo, hi = demand_bounds(demand_range, capacity)
    rng = random.Random(seed)
    nodes = [dataclasses.replace(base.nodes[0], demand=0)]
    nodes += [dataclasses.replace(n, demand=rng.randint(lo, hi)) for n in base.customers]
    return VrpInstance(f"{base.name}{demand_range}", tuple(nodes), capacity, None, base.rounding)


# --------------------------------------------------------------------------- solutions


def format_solution(solution: Solution, name: str = "", header: Sequence[str] = ()) -> str:
    """``ROUTE node:qty ...`` lines; ``#`` lines are comments."""
    lines = [f"# {h}" for h in header]
    if name:
        lines.append(f"NAME {name}")
    if solution.cost is not None:
        cost = solution.cost
        lines.append(f"COST {_fmt(cost) if isinstance(cost, int) else repr(float(cost))}")
    for route in solution.routes:
        lines.append("ROUTE " + " ".join(f"{v.node}:{v.quantity}" for v in route.visits))
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> Solution:
    routes = []
    cost = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        key = key.upper()
        if key == "NAME":
            continue
        if key == "COST":
            cost = _num(rest.strip(), lineno, "cost")
            cost = int(cost) if cost.is_integer() else cost
        elif key == "ROUTE":
            visits = []
            for tok in rest.split():
                node, sep, qty = tok.partition(":")
                if not sep:
                    raise ParseError(f"visit {tok!r} must look like node:quantity", lineno)
                visits.append((_int(node, lineno, "node"), _int(qty, lineno, "quantity")))
            routes.append(Route(visits))
        else:
            raise ParseError(f"unknown solution line {line!r}", lineno)
    return Solution(routes, cost)
