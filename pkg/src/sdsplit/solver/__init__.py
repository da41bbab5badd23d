"""Solvers for the unsplittable (expanded) instances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..instance import Solution, VrpInstance
from ..transform import validate
from .internal import InfeasibleError, solve_internal
from .lkh import (
    ExternalSolverError,
    SolverNotFoundError,
    parse_solver_tour,
    solve_external,
    write_solver_files,
)

__all__ = [
    "SolverParams",
    "solve",
    "solve_internal",
    "solve_external",
    "write_solver_files",
    "parse_solver_tour",
    "InfeasibleError",
    "ExternalSolverError",
    "SolverNotFoundError",
    "ValidationFailed",
]


class ValidationFailed(RuntimeError):
    def __init__(self, report):
        self.report = report
        super().__init__("solver returned an invalid solution:\n" + report.to_text())


@dataclass(frozen=True)
class SolverParams:
    seed: int = 0
    runs: int = 3
    max_trials: int = 100
    time_limit: float = 60.0
    backend: str = "internal"
    external_path: Optional[str] = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if self.max_trials < 1:
            raise ValueError(f"max_trials must be >= 1, got {self.max_trials}")
        if not self.time_limit > 0:
            raise ValueError(f"time_limit must be positive, got {self.time_limit}")
        if self.backend not in ("internal", "external"):
            raise ValueError(f"backend must be internal or external, got {self.backend!r}")


def solve(instance: VrpInstance, params: SolverParams = SolverParams()) -> Solution:
    """Solve with the chosen backend and validate the result locally."""
    if params.backend == "internal":
        solution = solve_internal(instance, params)
    else:
        solution = solve_external(instance, params)
    report = validate(instance, solution, allow_split=False)
    if not report.ok:
        raise ValidationFailed(report)
    return solution
