"""Built-in CVRP/CVRPTW heuristic: savings construction plus local search.

Solutions are kept feasible at all times.  The search minimises the pair
(routes beyond the fleet limit, travel cost) lexicographically, so a move that
removes a surplus route is accepted even if it costs distance.  Ties in the
savings list and in move scans go to the lowest node index.
"""

from __future__ import annotations

import random
import time
from typing import Optional

from ..instance import Solution, VrpInstance, full_routes, k_min

EPS = 1e-9


class InfeasibleError(RuntimeError):
    """No solution fits the fleet, capacity and time windows."""


class _Problem:
    def __init__(self, instance: VrpInstance):
        self.c = instance.cost_matrix
        self.t = instance.time_matrix
        self.demand = [n.demand for n in instance.nodes]
        self.capacity = instance.capacity
        self.fleet = instance.fleet_size
        self.tw = instance.has_time_windows
        if self.tw:
            self.ready = [n.window[0] for n in instance.nodes]
            self.due = [n.window[1] for n in instance.nodes]
            self.service = [n.service_time for n in instance.nodes]
        self.customers = list(range(1, len(instance.nodes)))

    def load(self, route) -> int:
        d = self.demand
        return sum(d[v] for v in route)

    def cost(self, route):
        if not route:
            return 0
        c = self.c
        total = c[0][route[0]] + c[route[-1]][0]
        for a, b in zip(route, route[1:]):
            total += c[a][b]
        return total

    def time_ok(self, route) -> bool:
        if not self.tw:
            return True
        t, ready, due, service = self.t, self.ready, self.due, self.service
        now = ready[0]
        prev = 0
        for v in route:
            now += t[prev][v]
            if now > due[v] + EPS:
                return False
            if now < ready[v]:
                now = ready[v]
            now += service[v]
            prev = v
        return now + t[prev][0] <= due[0] + EPS

    def feasible(self, route) -> bool:
        return self.load(route) <= self.capacity and self.time_ok(route)


class _State:
    """Routes with cached loads and costs."""

    def __init__(self, prob: _Problem, routes):
        self.prob = prob
        self.routes = [list(r) for r in routes if r]
        self.loads = [prob.load(r) for r in self.routes]
        self.costs = [prob.cost(r) for r in self.routes]

    def copy(self) -> "_State":
        s = _State.__new__(_State)
        s.prob = self.prob
        s.routes = [list(r) for r in self.routes]
        s.loads = list(self.loads)
        s.costs = list(self.costs)
        return s

    @property
    def excess(self) -> int:
        return max(0, len(self.routes) - self.prob.fleet)

    @property
    def total(self):
        return sum(self.costs)

    def key(self):
        return (self.excess, self.total)

    def set_route(self, i: int, route) -> None:
        self.routes[i] = route
        self.loads[i] = self.prob.load(route)
        self.costs[i] = self.prob.cost(route)

    def drop_empty(self) -> None:
        keep = [i for i, r in enumerate(self.routes) if r]
        self.routes = [self.routes[i] for i in keep]
        self.loads = [self.loads[i] for i in keep]
        self.costs = [self.costs[i] for i in keep]


def _better(new_excess: int, delta, old_excess: int) -> bool:
    return new_excess < old_excess or (new_excess == old_excess and delta < -EPS)


# --------------------------------------------------------------------------- construction


def savings_routes(prob: _Problem, rng: Optional[random.Random] = None) -> list[list[int]]:
    """Parallel Clarke-Wright savings; ``rng`` perturbs the saving values for restarts."""
    c = prob.c
    cust = prob.customers
    pairs = []
    for ii, i in enumerate(cust):
        for j in cust[ii + 1:]:
            s = c[0][i] + c[0][j] - c[i][j]
            if rng is not None:
                s = s * (1 + 0.3 * rng.random())
            pairs.append((-s, i, j))
    pairs.sort()
    route_of = {v: [v] for v in cust}
    n_routes = len(cust)
    for neg_s, i, j in pairs:
        if neg_s >= 0 and n_routes <= prob.fleet:
            break
        ri, rj = route_of[i], route_of[j]
        if ri is rj:
            continue
        if prob.load(ri) + prob.load(rj) > prob.capacity:
            continue
        merged = None
        # join so that i and j become neighbours
        for cand in _joins(ri, rj, i, j):
            if prob.time_ok(cand):
                merged = cand
                break
        if merged is None:
            continue
        for v in merged:
            route_of[v] = merged
        n_routes -= 1
    seen = set()
    routes = []
    for v in cust:
        r = route_of[v]
        if id(r) not in seen:
            seen.add(id(r))
            routes.append(r)
    return routes


def _joins(ri, rj, i, j):
    out = []
    if ri[-1] == i and rj[0] == j:
        out.append(ri + rj)
    if rj[-1] == j and ri[0] == i:
        out.append(rj + ri)
    if ri[-1] == i and rj[-1] == j:
        out.append(ri + rj[::-1])
    if ri[0] == i and rj[0] == j:
        out.append(ri[::-1] + rj)
    return out


def eliminate_routes(state: _State) -> None:
    """Dissolve surplus routes by cheapest feasible insertion of their customers."""
    prob = state.prob
    progress = True
    while state.excess > 0 and progress:
        progress = False
        for idx in sorted(range(len(state.routes)), key=lambda i: (state.loads[i], i)):
            trial = state.copy()
            victims = trial.routes[idx]
            trial.routes[idx] = []
            trial.loads[idx] = 0
            trial.costs[idx] = 0
            if all(_cheapest_insert(trial, v, skip=idx) for v in sorted(victims, key=lambda v: -prob.demand[v])):
                trial.drop_empty()
                state.routes, state.loads, state.costs = trial.routes, trial.loads, trial.costs
                progress = True
                break


def _cheapest_insert(state: _State, v: int, skip: int = -1, allow_new: bool = False) -> bool:
    prob = state.prob
    c = prob.c
    best = None
    for ri, route in enumerate(state.routes):
        if ri == skip or state.loads[ri] + prob.demand[v] > prob.capacity:
            continue
        for pos in range(len(route) + 1):
            a = route[pos - 1] if pos else 0
            b = route[pos] if pos < len(route) else 0
            delta = c[a][v] + c[v][b] - c[a][b]
            if best is not None and delta >= best[0] - EPS:
                continue
            cand = route[:pos] + [v] + route[pos:]
            if prob.time_ok(cand):
                best = (delta, ri, cand)
    if best is None:
        if allow_new and prob.time_ok([v]):
            state.routes.append([v])
            state.loads.append(prob.demand[v])
            state.costs.append(prob.cost([v]))
            return True
        return False
    state.set_route(best[1], best[2])
    return True


def packing_routes(prob: _Problem, rng: random.Random) -> Optional[list[list[int]]]:
    """Fleet-first construction: open at most ``fleet`` routes, insert big demands first."""
    order = sorted(prob.customers, key=lambda v: (-prob.demand[v] - rng.random(), v))
    state = _State(prob, [])
    for v in order:
        if not _cheapest_insert(state, v, allow_new=len(state.routes) < prob.fleet):
            return None
    return state.routes


# --------------------------------------------------------------------------- local search


def _relocate(state: _State) -> bool:
    prob = state.prob
    c, d, cap = prob.c, prob.demand, prob.capacity
    routes = state.routes
    excess = state.excess
    for ai, A in enumerate(routes):
        for pi, u in enumerate(A):
            p = A[pi - 1] if pi else 0
            n = A[pi + 1] if pi + 1 < len(A) else 0
            gain = c[p][u] + c[u][n] - c[p][n]
            emptied = len(A) == 1
            for bi, B in enumerate(routes):
                same = bi == ai
                if not same and state.loads[bi] + d[u] > cap:
                    continue
                base = A[:pi] + A[pi + 1:] if same else B
                new_excess = max(0, len(routes) - 1 - prob.fleet) if emptied and not same else excess
                for pos in range(len(base) + 1):
                    if same and pos == pi:
                        continue
                    a = base[pos - 1] if pos else 0
                    b = base[pos] if pos < len(base) else 0
                    delta = c[a][u] + c[u][b] - c[a][b] - gain
                    if not _better(new_excess, delta, excess):
                        continue
                    cand = base[:pos] + [u] + base[pos:]
                    if not prob.time_ok(cand):
                        continue
                    if same:
                        state.set_route(ai, cand)
                    else:
                        state.set_route(bi, cand)
                        state.set_route(ai, A[:pi] + A[pi + 1:])
                        state.drop_empty()
                    return True
            # move to a fresh route while the fleet has room
            if len(routes) < prob.fleet and not emptied:
                delta = c[0][u] + c[u][0] - gain
                if delta < -EPS and prob.time_ok([u]):
                    state.set_route(ai, A[:pi] + A[pi + 1:])
                    state.routes.append([u])
                    state.loads.append(d[u])
                    state.costs.append(prob.cost([u]))
                    return True
    return False


def _exchange(state: _State) -> bool:
    prob = state.prob
    c, d, cap = prob.c, prob.demand, prob.capacity
    routes = state.routes
    excess = state.excess
    for ai in range(len(routes)):
        A = routes[ai]
        for bi in range(ai + 1, len(routes)):
            B = routes[bi]
            for pi, u in enumerate(A):
                pu = A[pi - 1] if pi else 0
                nu = A[pi + 1] if pi + 1 < len(A) else 0
                for pj, v in enumerate(B):
                    if state.loads[ai] - d[u] + d[v] > cap or state.loads[bi] - d[v] + d[u] > cap:
                        continue
                    pv = B[pj - 1] if pj else 0
                    nv = B[pj + 1] if pj + 1 < len(B) else 0
                    delta = (
                        c[pu][v] + c[v][nu] - c[pu][u] - c[u][nu]
                        + c[pv][u] + c[u][nv] - c[pv][v] - c[v][nv]
                    )
                    if not _better(excess, delta, excess):
                        continue
                    newA = A[:pi] + [v] + A[pi + 1:]
                    newB = B[:pj] + [u] + B[pj + 1:]
                    if prob.time_ok(newA) and prob.time_ok(newB):
                        state.set_route(ai, newA)
                        state.set_route(bi, newB)
                        return True
    return False


def _two_opt(state: _State) -> bool:
    prob = state.prob
    c = prob.c
    for ri, R in enumerate(state.routes):
        m = len(R)
        for i in range(m - 1):
            p = R[i - 1] if i else 0
            for j in range(i + 1, m):
                n = R[j + 1] if j + 1 < m else 0
                delta = c[p][R[j]] + c[R[i]][n] - c[p][R[i]] - c[R[j]][n]
                if delta < -EPS:
                    cand = R[:i] + R[i:j + 1][::-1] + R[j + 1:]
                    if prob.time_ok(cand):
                        state.set_route(ri, cand)
                        return True
    return False


def _two_opt_star(state: _State) -> bool:
    prob = state.prob
    c, d, cap = prob.c, prob.demand, prob.capacity
    routes = state.routes
    excess = state.excess
    for ai in range(len(routes)):
        A = routes[ai]
        pre_a = [0]
        for v in A:
            pre_a.append(pre_a[-1] + d[v])
        for bi in range(ai + 1, len(routes)):
            B = routes[bi]
            pre_b = [0]
            for v in B:
                pre_b.append(pre_b[-1] + d[v])
            for i in range(len(A) + 1):
                a1 = A[i - 1] if i else 0
                a2 = A[i] if i < len(A) else 0
                for j in range(len(B) + 1):
                    if (i == 0 and j == 0) or (i == len(A) and j == len(B)):
                        continue
                    if pre_a[i] + pre_b[-1] - pre_b[j] > cap or pre_b[j] + pre_a[-1] - pre_a[i] > cap:
                        continue
                    b1 = B[j - 1] if j else 0
                    b2 = B[j] if j < len(B) else 0
                    delta = c[a1][b2] + c[b1][a2] - c[a1][a2] - c[b1][b2]
                    newA = A[:i] + B[j:]
                    newB = B[:j] + A[i:]
                    empties = (not newA) + (not newB)
                    new_excess = max(0, len(routes) - empties - prob.fleet)
                    if not _better(new_excess, delta, excess):
                        continue
                    if prob.time_ok(newA) and prob.time_ok(newB):
                        state.set_route(ai, newA)
                        state.set_route(bi, newB)
                        state.drop_empty()
                        return True
    return False


MOVES = (_relocate, _exchange, _two_opt, _two_opt_star)


def local_search(state: _State, deadline: float = float("inf")) -> _State:
    """First-improvement descent over relocate, exchange, 2-opt and 2-opt*."""
    while time.monotonic() < deadline:
        if not any(move(state) for move in MOVES):
            break
    return state


def perturb(state: _State, rng: random.Random, strength: int) -> _State:
    """Random feasible relocations, ignoring cost."""
    prob = state.prob
    s = state.copy()
    for _ in range(strength):
        nonempty = [i for i, r in enumerate(s.routes) if r]
        ai = rng.choice(nonempty)
        A = s.routes[ai]
        pi = rng.randrange(len(A))
        u = A[pi]
        targets = [
            bi for bi in range(len(s.routes))
            if bi != ai and s.loads[bi] + prob.demand[u] <= prob.capacity
        ]
        if not targets:
            continue
        bi = rng.choice(targets)
        B = s.routes[bi]
        pos = rng.randrange(len(B) + 1)
        cand = B[:pos] + [u] + B[pos:]
        if prob.time_ok(cand):
            s.set_route(bi, cand)
            s.set_route(ai, A[:pi] + A[pi + 1:])
    s.drop_empty()
    return s


# --------------------------------------------------------------------------- driver


def check_instance(instance: VrpInstance, prob: _Problem) -> None:
    if k_min(instance) > instance.fleet_size:
        raise InfeasibleError(
            f"fleet of {instance.fleet_size} cannot carry demand {instance.total_demand} "
            f"with capacity {instance.capacity} (needs {k_min(instance)})"
        )
    for v in prob.customers:
        if prob.demand[v] > prob.capacity:
            raise InfeasibleError(f"node {v} demand {prob.demand[v]} exceeds capacity")
        if not prob.time_ok([v]):
            raise InfeasibleError(f"node {v} cannot be served within its time window")


def solve_routes(
    instance: VrpInstance,
    seed: int = 0,
    runs: int = 3,
    max_trials: int = 100,
    time_limit: float = 60.0,
) -> list[list[int]]:
    prob = _Problem(instance)
    check_instance(instance, prob)
    if not prob.customers:
        return []
    deadline = time.monotonic() + time_limit
    n = len(prob.customers)
    strength = max(2, min(10, n // 8))
    best: Optional[_State] = None
    for run in range(runs):
        rng = random.Random(f"{seed}:{run}")
        starts = [savings_routes(prob, None if run == 0 else rng)]
        packed = packing_routes(prob, rng)
        if packed is not None:
            starts.append(packed)
        for routes in starts:
            cur = _State(prob, routes)
            eliminate_routes(cur)
            local_search(cur, deadline)
            run_best = cur.copy()
            for _ in range(max_trials):
                if time.monotonic() >= deadline:
                    break
                trial = local_search(perturb(cur, rng, strength), deadline)
                if trial.key() <= cur.key() or trial.excess < cur.excess:
                    cur = trial
                    if cur.key() < run_best.key():
                        run_best = cur.copy()
            if best is None or run_best.key() < best.key():
                best = run_best
        if time.monotonic() >= deadline:
            break
    if best is None or best.excess > 0:
        raise InfeasibleError(
            f"could not fit {n} customers into {instance.fleet_size} routes"
        )
    return best.routes


def solve_internal(instance: VrpInstance, params) -> Solution:
    routes = solve_routes(
        instance,
        seed=params.seed,
        runs=params.runs,
        max_trials=params.max_trials,
        time_limit=params.time_limit,
    )
    return full_routes(instance, routes)
