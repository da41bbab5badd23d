import os
import sys
from pathlib import Path

import pytest

from sdsplit import Node, Partition, Route, Solution, VrpInstance, parse_tsplib
from sdsplit.partitions import CoalesceError, greedy_coalesce

DATA = Path(__file__).parent / "data"
BENCHMARK_ENV = "SDSPLIT_BENCHMARKS"

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if call.when == "setup" and call.excinfo is not None:
        outcome = "SKIP" if call.excinfo.errisinstance(pytest.skip.Exception) else "FAIL"
        _criteria[number] = (title, outcome, call.excinfo.exconly().splitlines()[0])
    elif call.when == "call":
        if call.excinfo is None:
            _criteria[number] = (title, "PASS", f"{call.duration:.2f}s")
        elif call.excinfo.errisinstance(pytest.skip.Exception):
            _criteria[number] = (title, "SKIP", str(call.excinfo.value))
        else:
            _criteria[number] = (title, "FAIL", call.excinfo.exconly().splitlines()[0][:120])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, outcome, detail = _criteria[number]
        terminalreporter.write_line(f"criterion {number:>2} {outcome:<4} {title} ({detail})")


def benchmark_file(*names):
    """Locate a user-supplied benchmark instance, or None."""
    dirs = [Path(os.environ[BENCHMARK_ENV])] if os.environ.get(BENCHMARK_ENV) else []
    dirs.append(DATA / "benchmarks")
    for d in dirs:
        for name in names:
            if (d / name).is_file():
                return d / name
    return None


@pytest.fixture
def toy():
    return parse_tsplib((DATA / "toy.vrp").read_text())


@pytest.fixture
def toy_path():
    return DATA / "toy.vrp"


@pytest.fixture
def solomon_path():
    return DATA / "toy_solomon.txt"


def make_instance(points, demands, capacity, fleet=None, rounding="nint", windows=None, service=None):
    nodes = []
    for i, (x, y) in enumerate(points):
        nodes.append(
            Node(
                i,
                x,
                y,
                demands[i - 1] if i else 0,
                windows[i] if windows else None,
                service[i] if service else 0.0,
            )
        )
    return VrpInstance("made", tuple(nodes), capacity, fleet, rounding)


def realize(origin, routes, deliveries):
    """Expanded-instance solution that carries out a split-delivery plan.

    ``routes`` are customer tuples and ``deliveries[r][c]`` the amount route r
    brings to c.  Each customer's pieces are grouped greedily onto its routes.
    Returns None when some customer cannot be realised (too many routes for its
    pieces).
    """
    owner = {}
    for c, copies in origin.copies.items():
        on = [r for r in range(len(routes)) if c in deliveries[r]]
        ordered = sorted(on, key=lambda r: -deliveries[r][c])
        gamma = Partition(deliveries[r][c] for r in ordered)
        try:
            groups = greedy_coalesce(Partition(origin.pieces(c)), gamma).groups
        except CoalesceError:
            return None
        for r, group in zip(ordered, groups):
            owner[(r, c)] = [copies[i] for i in group]
    out = []
    for r, members in enumerate(routes):
        visits = [(cp, origin.entries[cp][1]) for c in members for cp in owner[(r, c)]]
        out.append(Route(visits))
    return Solution(out)


@pytest.fixture
def fake_solver(tmp_path):
    """Executable wrapper around tests/fake_lkh.py."""
    script = tmp_path / "fake-lkh"
    script.write_text(f'#!/bin/sh\nexec "{sys.executable}" "{Path(__file__).parent / "fake_lkh.py"}" "$@"\n')
    script.chmod(0o755)
    return str(script)
