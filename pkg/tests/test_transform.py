import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_instance, realize
from oracles import sdvrp_solutions
from sdsplit.instance import Route, Solution, full_routes
from sdsplit.rules import SplitPolicy, expanded_size
from sdsplit.transform import (
    OriginMap,
    Violation,
    count_splits,
    expand,
    gap,
    merge_back,
    validate,
)


def two_customers(**kw):
    return make_instance([(0, 0), (3, 4), (-3, 4)], [7, 5], 10, **kw)


def windowed():
    return make_instance(
        [(0, 0), (3, 4), (-3, 4)],
        [7, 5],
        10,
        rounding="exact",
        windows=[(0, 40), (0, 6), (8, 30)],
        service=[0, 2, 1],
    )


# --------------------------------------------------------------------------- expand


def test_expand_two_customers():
    inst = two_customers()
    expanded, origin = expand(inst, SplitPolicy(k_bar=2))
    assert expanded.n_customers == 6
    assert [c.demand for c in expanded.customers] == [4, 2, 1, 3, 1, 1]
    assert origin.pieces(1) == [4, 2, 1]
    assert origin.pieces(2) == [3, 1, 1]
    assert origin.copies == {1: (1, 2, 3), 2: (4, 5, 6)}
    assert expanded.capacity == inst.capacity
    assert expanded.fleet_size == inst.fleet_size
    for copy in expanded.customers:
        src = inst.nodes[origin.original(copy.id)]
        assert (copy.x, copy.y) == (src.x, src.y)
    assert expanded.cost_matrix[1][2] == 0


def test_expand_high_threshold_is_identity():
    inst = two_customers()
    expanded, origin = expand(inst, SplitPolicy(k_bar=2, q=1))
    assert expanded.nodes[1:] == inst.nodes[1:]
    assert origin.copies == {1: (1,), 2: (2,)}


def test_expand_copies_windows_and_service():
    inst = windowed()
    expanded, origin = expand(inst, SplitPolicy(k_bar=2))
    for copy in expanded.customers:
        src = inst.nodes[origin.original(copy.id)]
        assert copy.window == src.window
        assert copy.service_time == src.service_time
    assert expanded.has_time_windows


def test_expanded_name_tags_policy():
    expanded, _ = expand(two_customers(), SplitPolicy(k_bar=3, q=Fraction(1, 4)))
    assert expanded.name == "made-lossl-k3-q0.25"


@given(
    st.lists(st.integers(1, 60), min_size=1, max_size=8),
    st.integers(1, 40),
    st.integers(1, 6),
    st.fractions(0, 1),
    st.sampled_from(["lossless", "denom20", "denom25"]),
)
def test_expand_invariants(demands, capacity, k, q, rule):
    inst = make_instance([(i, i) for i in range(len(demands) + 1)], demands, capacity)
    policy = SplitPolicy.from_rule(rule, k, q)
    expanded, origin = expand(inst, policy)
    assert expanded.n_customers == expanded_size(inst, policy)
    for cust in inst.customers:
        assert sum(origin.pieces(cust.id)) == cust.demand
    assert all(c.demand <= capacity for c in expanded.customers)


def test_origin_map_csv_round_trip():
    inst = two_customers()
    _, origin = expand(inst, SplitPolicy(k_bar=2))
    text = "# sdsplit split ...\n" + origin.to_csv()
    assert text.splitlines()[1] == "copy,original,piece"
    again = OriginMap.from_csv(inst, text)
    assert again == origin
    with pytest.raises(ValueError, match="numbered"):
        OriginMap.from_csv(inst, "copy,original,piece\n2,1,7\n")


def test_origin_map_unknown_copy():
    _, origin = expand(two_customers(), SplitPolicy(k_bar=2))
    with pytest.raises(KeyError):
        origin.original(7)
    with pytest.raises(KeyError):
        origin.original(0)


# --------------------------------------------------------------------------- merge back


def test_merge_consecutive_copies():
    inst = two_customers()
    _, origin = expand(inst, SplitPolicy(k_bar=2))
    sol = Solution([Route([(1, 4), (2, 2)]), Route([(3, 1), (4, 3), (5, 1), (6, 1)])])
    merged = merge_back(sol, origin)
    assert merged.routes[0].visits == ((1, 6),)
    assert merged.routes[1].visits == ((1, 1), (2, 5))
    assert merged.cost == 10 + 16
    assert count_splits(merged) == 1
    assert validate(inst, merged).ok


def test_merge_non_consecutive_copies_at_first_occurrence():
    inst = two_customers()
    _, origin = expand(inst, SplitPolicy(k_bar=2))
    sol = Solution([Route([(1, 4), (4, 3), (2, 2), (3, 1)]), Route([(5, 1), (6, 1)])])
    merged = merge_back(sol, origin)
    assert merged.routes[0].visits == ((1, 7), (2, 3))
    assert merged.cost == 16 + 10


def test_merge_rejects_unknown_copy():
    _, origin = expand(two_customers(), SplitPolicy(k_bar=2))
    with pytest.raises(KeyError):
        merge_back(Solution([Route([(9, 1)])]), origin)


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.integers(1, 9), min_size=1, max_size=4),
    st.integers(5, 12),
    st.integers(1, 3),
    st.integers(0, 10**6),
)
def test_merge_never_adds_cost(demands, capacity, k, seed):
    rng = random.Random(seed)
    points = [(0, 0)] + [(rng.randint(-20, 20), rng.randint(-20, 20)) for _ in demands]
    inst = make_instance(points, demands, capacity, fleet=len(demands) * 3, rounding="exact")
    expanded, origin = expand(inst, SplitPolicy(k_bar=k))
    copies = [c.id for c in expanded.customers]
    rng.shuffle(copies)
    routes = [[] for _ in range(rng.randint(1, len(copies)))]
    for c in copies:
        routes[rng.randrange(len(routes))].append(c)
    sol = full_routes(expanded, routes)
    merged = merge_back(sol, origin)
    assert merged.cost <= sol.cost + 1e-9
    report = validate(inst, merged)
    assert report.kinds() <= {"capacity"}


# --------------------------------------------------------------------------- scoring


def test_count_splits():
    assert count_splits(Solution([Route([(1, 7)]), Route([(2, 5)])])) == 0
    three = Solution([Route([(1, 2)]), Route([(1, 2), (2, 5)]), Route([(1, 3)])])
    assert count_splits(three) == 2


def test_gap():
    assert gap(375, 375) == 0
    assert round(gap(1003, 1002), 3) == 0.100
    assert gap(990, 1000) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        gap(1, 0)


# --------------------------------------------------------------------------- validation


def test_validate_feasible_by_hand():
    inst = two_customers()
    sol = Solution([Route([(1, 7)]), Route([(2, 5)])], 20)
    assert validate(inst, sol).ok
    assert validate(inst, sol, allow_split=False).ok


def test_validate_capacity():
    inst = two_customers(fleet=3)
    report = validate(inst, Solution([Route([(1, 7), (2, 4)]), Route([(2, 1)])]))
    assert report.kinds() == {"capacity"}
    assert report.violations[0] == Violation("capacity", 0, None, 1)


def test_validate_coverage_and_split():
    inst = two_customers()
    report = validate(inst, Solution([Route([(1, 6)]), Route([(2, 5)])]))
    assert report.violations == [Violation("coverage", node=1, amount=1)]
    split = Solution([Route([(1, 5)]), Route([(1, 2), (2, 5)])])
    assert validate(inst, split).ok
    assert validate(inst, split, allow_split=False).kinds() == {"split"}


def test_validate_fleet_and_ids():
    inst = two_customers()
    many = Solution([Route([(1, 3)]), Route([(1, 4)]), Route([(2, 5)])])
    assert validate(inst, many).kinds() == {"fleet"}
    bad = validate(inst, Solution([Route([(3, 1)]), Route([(2, 0)])]))
    assert bad.kinds() == {"unknown-node", "non-positive-delivery"}


def test_validate_cost_mismatch():
    inst = two_customers()
    report = validate(inst, Solution([Route([(1, 7)]), Route([(2, 5)])], 19))
    assert report.kinds() == {"cost-mismatch"}
    assert str(report.violations[0]) == "cost-mismatch route=- node=- amount=-1"


def test_validate_time_windows():
    inst = windowed()
    # arrive at 1 at t=5 (window ends 6), leave 7, reach 2 at 13, leave 14, home 19
    assert validate(inst, Solution([Route([(1, 7), (2, 3)])]), allow_split=True).kinds() == {"coverage"}
    ok = Solution([Route([(1, 7)]), Route([(2, 5)])])
    assert validate(inst, ok).ok
    late = validate(inst, Solution([Route([(2, 5), (1, 7)])]))
    assert late.kinds() == {"capacity", "time-window"}
    assert [v.node for v in late.violations if v.kind == "time-window"] == [1]


def test_validate_waits_for_early_arrival():
    inst = windowed()
    # reach 2 at t=5, wait until 8, serve 1, home at 14
    assert validate(inst, Solution([Route([(2, 5)]), Route([(1, 7)])])).ok


def test_validate_depot_window():
    inst = make_instance(
        [(0, 0), (3, 4)], [5], 10, rounding="exact", windows=[(0, 9), (0, 9)], service=[0, 1]
    )
    report = validate(inst, Solution([Route([(1, 5)])]))
    assert report.violations == [Violation("depot-window", 0, 0, pytest.approx(2.0))]
    assert report.to_text() == "depot-window route=0 node=0 amount=2\n"


# --------------------------------------------------------------------------- lossless recovery


@pytest.mark.parametrize("seed", range(15))
def test_every_split_plan_is_realisable(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    demands = [rng.randint(1, 9) for _ in range(n)]
    capacity = rng.randint(5, 12)
    points = [(0, 0)] + [(rng.randint(-10, 10), rng.randint(-10, 10)) for _ in range(n)]
    inst = make_instance(points, demands, capacity, rounding="exact")
    k_bar = inst.fleet_size
    _, origin = expand(inst, SplitPolicy(k_bar=k_bar))
    for cost, routes, alloc in sdvrp_solutions(inst, per_routing=10, limit=150):
        if any(sum(c in r for r in routes) > k_bar for c in range(1, n + 1)):
            continue
        expanded_sol = realize(origin, routes, alloc)
        assert expanded_sol is not None
        merged = merge_back(expanded_sol, origin)
        assert merged.cost == pytest.approx(cost)
        for r, route in enumerate(merged.routes):
            assert dict(route.visits) == alloc[r]
        assert validate(inst, merged).ok
