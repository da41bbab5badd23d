"""File-based adapter for LKH-3 style solvers.

The problem file is TSPLIB-extended (CVRP, or CVRPTW with service times and
windows); the parameter file is ``KEY = VALUE`` lines.  In the tour the solver
writes, node 1 is the depot and ids above DIMENSION are extra depot copies, one
per additional vehicle.  Costs are never taken from the tour file.
"""

from __future__ import annotations

import logging
import os
import re
import shutil
import subprocess
import tempfile
from pathlib import Path
from string import Template
from typing import Optional

from ..instance import ParseError, Solution, VrpInstance, format_tsplib, full_routes

log = logging.getLogger(__name__)

SOLVER_ENV = "SDSPLIT_SOLVER"
# exact-cost instances carry two decimals through the solver's integer distances
EXACT_SCALE = 100

PARAMETER_TEMPLATE = Template(
    "PROBLEM_FILE = $problem_file\n"
    "TOUR_FILE = $tour_file\n"
    "RUNS = $runs\n"
    "MAX_TRIALS = $max_trials\n"
    "SEED = $seed\n"
    "TIME_LIMIT = $time_limit\n"
    "SPECIAL\n"
)


class SolverNotFoundError(FileNotFoundError):
    pass


class ExternalSolverError(RuntimeError):
    pass


def coordinate_scale(instance: VrpInstance) -> int:
    return 1 if instance.rounding == "nint" else EXACT_SCALE


def write_solver_files(
    instance: VrpInstance,
    params,
    problem_file: str = "problem.vrp",
    tour_file: str = "solution.tour",
    template: Template = PARAMETER_TEMPLATE,
) -> tuple[str, str]:
    """Return ``(problem_text, parameter_text)`` for one solver call."""
    problem = format_tsplib(instance, scale=coordinate_scale(instance))
    parameters = template.substitute(
        problem_file=problem_file,
        tour_file=tour_file,
        runs=params.runs,
        max_trials=params.max_trials,
        seed=params.seed,
        time_limit=f"{float(params.time_limit):g}",
    )
    return problem, parameters


def parse_solver_tour(text: str, instance: VrpInstance) -> Solution:
    """Routes from a TOUR_SECTION; the cost is recomputed from the instance."""
    dim = len(instance.nodes)
    max_id = dim + instance.fleet_size - 1
    ids: list[int] = []
    in_tour = False
    stated = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        m = re.search(r"Length\s*=\s*(-?[\d.]+)", line)
        if m and not in_tour:
            stated = float(m.group(1))
        if line.upper().startswith("TOUR_SECTION"):
            in_tour = True
            continue
        if not in_tour:
            continue
        if line.upper() == "EOF":
            break
        done = False
        for tok in line.split():
            try:
                val = int(tok)
            except ValueError:
                raise ParseError(f"tour entry {tok!r} is not an integer", lineno) from None
            if val == -1:
                done = True
                break
            if not 1 <= val <= max_id:
                raise ParseError(f"tour names unknown node {val}", lineno)
            ids.append(val)
        if done:
            break
    if not in_tour:
        raise ParseError("missing TOUR_SECTION")

    routes: list[list[int]] = [[]]
    seen: set[int] = set()
    for val in ids:
        if val == 1 or val > dim:
            routes.append([])
            continue
        node = val - 1
        if node in seen:
            raise ParseError(f"node {node} appears twice in the tour")
        seen.add(node)
        routes[-1].append(node)
    # the tour is a cycle: a leading partial route continues the trailing one
    if ids and ids[0] != 1 and ids[0] <= dim and len(routes) > 1:
        routes[-1].extend(routes.pop(0))
    missing = [v for v in range(1, dim) if v not in seen]
    if missing:
        raise ParseError(f"tour is missing node {missing[0]}" + (f" and {len(missing) - 1} more" if len(missing) > 1 else ""))
    solution = full_routes(instance, routes)
    if stated is not None and instance.rounding == "nint" and abs(stated - solution.cost) > 0.5:
        log.warning("solver reported length %s, recomputed cost is %s", stated, solution.cost)
    return solution


def find_solver(path: Optional[str] = None) -> str:
    candidate = path or os.environ.get(SOLVER_ENV) or shutil.which("LKH") or shutil.which("LKH-3")
    if not candidate:
        raise SolverNotFoundError(f"solver not found: pass --solver-path or set {SOLVER_ENV}")
    resolved = shutil.which(candidate) or (candidate if Path(candidate).is_file() else None)
    if resolved is None:
        raise SolverNotFoundError(f"solver not found: {candidate}")
    return resolved


def solve_external(instance: VrpInstance, params) -> Solution:
    """Run the external solver in a private temporary directory."""
    exe = find_solver(params.external_path)
    with tempfile.TemporaryDirectory(prefix="sdsplit-") as tmp:
        tmp_path = Path(tmp)
        problem_path = tmp_path / "problem.vrp"
        par_path = tmp_path / "params.par"
        tour_path = tmp_path / "solution.tour"
        problem, parameters = write_solver_files(instance, params, str(problem_path), str(tour_path))
        problem_path.write_text(problem)
        par_path.write_text(parameters)
        try:
            proc = subprocess.run(
                [exe, str(par_path)],
                cwd=tmp,
                capture_output=True,
                text=True,
                timeout=float(params.time_limit) * params.runs + 60,
            )
        except subprocess.TimeoutExpired as exc:
            raise ExternalSolverError(f"solver timed out after {exc.timeout:.0f} s") from None
        except OSError as exc:
            raise SolverNotFoundError(f"cannot run solver {exe}: {exc}") from None
        if proc.returncode != 0:
            tail = (proc.stderr or proc.stdout).strip().splitlines()[-5:]
            raise ExternalSolverError(f"solver exited with {proc.returncode}: " + " | ".join(tail))
        if not tour_path.exists():
            raise ExternalSolverError("solver wrote no tour file")
        return parse_solver_tour(tour_path.read_text(), instance)
