import math

import pytest
from hypothesis import given, strategies as st

from conftest import DATA, make_instance
from sdsplit.instance import (
    DEMAND_RANGES,
    Node,
    ParseError,
    Route,
    Solution,
    VrpInstance,
    demand_bounds,
    edge_cost,
    format_solomon,
    format_solution,
    format_tsplib,
    full_routes,
    generate_random,
    k_min,
    parse_solomon,
    parse_solution,
    parse_tsplib,
    read_instance,
    route_cost,
    solution_cost,
)

TOY = (DATA / "toy.vrp").read_text()
SOLOMON = (DATA / "toy_solomon.txt").read_text()


# --------------------------------------------------------------------------- data model


def test_toy_parses(toy):
    assert toy.name == "toy2"
    assert toy.n_customers == 2
    assert toy.capacity == 10
    assert [c.demand for c in toy.customers] == [7, 5]
    assert toy.fleet_size == k_min(toy) == 2
    assert not toy.has_time_windows


@pytest.mark.parametrize(
    "kwargs, message",
    [
        (dict(capacity=0), "capacity"),
        (dict(rounding="floor"), "rounding"),
        (dict(fleet_size=0), "fleet"),
    ],
)
def test_instance_validation(kwargs, message):
    base = dict(name="x", nodes=(Node(0, 0, 0), Node(1, 1, 1, 3)), capacity=5)
    base.update(kwargs)
    with pytest.raises(ValueError, match=message):
        VrpInstance(**base)


def test_instance_rejects_bad_nodes():
    with pytest.raises(ValueError, match="depot demand"):
        VrpInstance("x", (Node(0, 0, 0, 1), Node(1, 1, 1, 3)), 5)
    with pytest.raises(ValueError, match="non-positive"):
        VrpInstance("x", (Node(0, 0, 0), Node(1, 1, 1, 0)), 5)
    with pytest.raises(ValueError, match="id"):
        VrpInstance("x", (Node(0, 0, 0), Node(2, 1, 1, 3)), 5)
    with pytest.raises(ValueError, match="every node"):
        VrpInstance("x", (Node(0, 0, 0, window=(0, 9)), Node(1, 1, 1, 3)), 5)
    with pytest.raises(ValueError, match="empty window"):
        VrpInstance("x", (Node(0, 0, 0, window=(0, 9)), Node(1, 1, 1, 3, (5, 4))), 5)
    with pytest.raises(ValueError, match="service"):
        VrpInstance("x", (Node(0, 0, 0, window=(0, 9)), Node(1, 1, 1, 3, (0, 4), -1)), 5)


def test_k_min_exact_multiple():
    inst = make_instance([(0, 0), (1, 0), (2, 0)], [10, 20], 10)
    assert k_min(inst) == 3
    assert make_instance([(0, 0), (3, 4), (-3, 4)], [7, 5], 10).fleet_size == 2


@given(st.lists(st.integers(1, 500), min_size=1, max_size=30), st.integers(1, 400))
def test_k_min_covers_demand(demands, capacity):
    inst = make_instance([(i, 0) for i in range(len(demands) + 1)], demands, capacity)
    assert k_min(inst) * capacity >= sum(demands)
    assert (k_min(inst) - 1) * capacity < sum(demands)


def test_edge_costs():
    inst = make_instance([(0, 0), (3, 4), (1, 1), (0, 0)], [1, 1, 1], 5)
    assert edge_cost(inst, 0, 1) == 5
    assert edge_cost(inst, 0, 2) == 1
    assert edge_cost(inst, 0, 3) == 0
    exact = make_instance([(0, 0), (1, 1)], [1], 5, rounding="exact")
    assert exact.edge_cost(0, 1) == pytest.approx(math.sqrt(2))
    assert inst.travel_time(0, 2) == pytest.approx(math.sqrt(2))


def test_rounding_is_half_up():
    inst = make_instance([(0, 0), (0.5, 0), (2.5, 0)], [1, 1], 5)
    assert inst.edge_cost(0, 1) == 1
    assert inst.edge_cost(0, 2) == 3


coords = st.lists(st.tuples(st.integers(-100, 100), st.integers(-100, 100)), min_size=2, max_size=8)


@given(coords, st.sampled_from(["nint", "exact"]))
def test_costs_symmetric_and_zero_on_diagonal(points, rounding):
    inst = make_instance(points, [1] * (len(points) - 1), 5, rounding=rounding)
    m = inst.cost_matrix
    for i in range(len(points)):
        assert m[i][i] == 0
        for j in range(len(points)):
            assert m[i][j] == m[j][i]


def test_route_and_solution_cost(toy):
    assert route_cost(toy, [1]) == 10
    assert route_cost(toy, []) == 0
    assert solution_cost(toy, Solution(())) == 0
    sol = full_routes(toy, [[1], [2]])
    assert sol.cost == 20
    assert Route([(1, 7)]).load == 7
    assert full_routes(toy, [[1, 2]]).cost == 16


# --------------------------------------------------------------------------- TSPLIB


def test_tsplib_round_trip(toy):
    again = parse_tsplib(format_tsplib(toy))
    assert again == toy
    assert format_tsplib(again) == format_tsplib(toy)


def test_tsplib_round_trip_with_windows():
    inst = make_instance(
        [(0, 0), (3, 4), (-3, 4)],
        [7, 5],
        10,
        rounding="exact",
        windows=[(0, 100), (5, 20), (0, 50.5)],
        service=[0, 2, 3.5],
    )
    text = format_tsplib(inst)
    assert "TYPE : CVRPTW" in text
    assert parse_tsplib(text, rounding="exact") == inst


def test_tsplib_renumbers_depot():
    text = TOY.replace("DEPOT_SECTION\n1\n", "DEPOT_SECTION\n2\n").replace("2 7\n", "2 0\n").replace("1 0\n", "1 7\n")
    inst = parse_tsplib(text)
    assert (inst.nodes[0].x, inst.nodes[0].y) == (3, 4)
    assert [c.demand for c in inst.customers] == [7, 5]


def test_tsplib_vehicles_header():
    inst = parse_tsplib(TOY.replace("CAPACITY : 10", "CAPACITY : 10\nVEHICLES : 5"))
    assert inst.fleet_size == 5
    assert parse_tsplib(TOY, fleet_size=3).fleet_size == 3


def _line_of(text, needle):
    return text.splitlines().index(needle) + 1


@pytest.mark.parametrize(
    "mutate, pattern",
    [
        (lambda t: t.replace("3 5\nDEPOT", "DEPOT"), "DEMAND_SECTION has 2 rows"),
        (lambda t: t.replace("DIMENSION : 3\n", ""), "missing DIMENSION"),
        (lambda t: t.replace("EUC_2D", "GEO"), "EUC_2D"),
        (lambda t: t.split("DEMAND_SECTION")[0], "missing DEMAND_SECTION"),
        (lambda t: t.replace("DIMENSION : 3", "DIMENSION : 4"), "DIMENSION is 4"),
        (lambda t: t.replace("2 7\n", "2 -7\n"), "negative demand"),
    ],
)
def test_tsplib_errors(mutate, pattern):
    with pytest.raises(ParseError, match=pattern):
        parse_tsplib(mutate(TOY))


def test_tsplib_errors_carry_line_numbers():
    bad = TOY.replace("2 3 4\n", "2 3 x\n")
    with pytest.raises(ParseError) as info:
        parse_tsplib(bad)
    assert info.value.line == _line_of(bad, "2 3 x")
    assert str(info.value).startswith(f"line {info.value.line}:")
    short = TOY.replace("2 7\n", "2\n")
    with pytest.raises(ParseError, match="DEMAND_SECTION row") as info:
        parse_tsplib(short)
    assert info.value.line == _line_of(short, "2")


# --------------------------------------------------------------------------- Solomon


def test_solomon_parse():
    inst = parse_solomon(SOLOMON)
    assert inst.name == "TOY101"
    assert inst.has_time_windows
    assert inst.n_customers == 6
    assert inst.capacity == 200
    assert inst.fleet_size == 1
    assert inst.nodes[1].window == (912, 967)
    assert inst.nodes[1].service_time == 90
    assert inst.rounding == "exact"


def test_solomon_truncate_and_override():
    inst = parse_solomon(SOLOMON, customers=3, capacity=30)
    assert inst.name == "TOY101.3.30"
    assert inst.n_customers == 3
    assert inst.fleet_size == math.ceil(50 / 30)
    assert parse_solomon(SOLOMON, capacity=30).fleet_size == 4


def test_solomon_round_trip():
    inst = parse_solomon(SOLOMON)
    assert parse_solomon(format_solomon(inst)) == inst


@pytest.mark.parametrize(
    "mutate, pattern",
    [
        (lambda t: t.replace("10        912", "-10        912"), "negative demand"),
        (lambda t: t.replace("10        912", "0        912"), "zero demand"),
        (lambda t: t.replace("45         68", "45.5         68"), "not an integer"),
        (lambda t: t.replace("  25         200", "  25"), "vehicle number and capacity"),
        (lambda t: t.replace("967         90", "967"), "7 fields"),
    ],
)
def test_solomon_errors(mutate, pattern):
    with pytest.raises(ParseError, match=pattern):
        parse_solomon(mutate(SOLOMON))


def test_solomon_too_few_customers():
    with pytest.raises(ParseError, match="asked for 9"):
        parse_solomon(SOLOMON, customers=9)


def test_read_instance_detects_format():
    assert read_instance(TOY).name == "toy2"
    assert read_instance(SOLOMON).has_time_windows
    cut = read_instance(TOY, customers=1, capacity=20)
    assert cut.n_customers == 1 and cut.capacity == 20


# --------------------------------------------------------------------------- generator


def test_demand_bounds():
    assert demand_bounds("D6", 160) == (112, 144)
    assert demand_bounds("D1", 160) == (2, 16)
    assert set(DEMAND_RANGES) == {"D1", "D2", "D3", "D4", "D5", "D6"}


@given(st.sampled_from(sorted(DEMAND_RANGES)), st.integers(0, 10**6))
def test_generated_demands_in_range(name, seed):
    base = parse_tsplib(TOY)
    inst = generate_random(base, name, seed)
    lo, hi = demand_bounds(name, 160)
    assert all(lo <= c.demand <= hi for c in inst.customers)
    assert inst.capacity == 160
    assert inst == generate_random(base, name, seed)
    assert [(n.x, n.y) for n in inst.nodes] == [(n.x, n.y) for n in base.nodes]


def test_generator_rejects_unknown_range(toy):
    with pytest.raises(ValueError, match="D7"):
        generate_random(toy, "D7", 0)


# --------------------------------------------------------------------------- solution files


def test_solution_round_trip():
    sol = Solution((Route([(1, 4), (2, 5)]), Route([(1, 3)])), 26)
    text = format_solution(sol, "toy2", ["made by hand"])
    assert text.startswith("# made by hand\nNAME toy2\nCOST 26\n")
    assert parse_solution(text) == sol
    exact = Solution((Route([(1, 7)]),), 10.25)
    assert parse_solution(format_solution(exact)) == exact


def test_solution_parse_errors():
    with pytest.raises(ParseError, match="node:quantity"):
        parse_solution("ROUTE 1 2\n")
    with pytest.raises(ParseError, match="line 2"):
        parse_solution("COST 3\nTOUR 1:1\n")
