"""Solver-by-problem benchmark execution and CSV output."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..anderson_accel import AndersonConfig
from ..driver import SolveReport, run
from ..krylov_accel import KrylovConfig
from ..qp_model import QpProblem, TerminationConfig, load_problem
from .generators import default_suite, generate
from .profiles import PerfProfile, profile

MEASURES = ("iterations", "t_applications", "wall_time")


@dataclass
class SolverSpec:
    """A named solver configuration for the run matrix."""

    name: str
    accel: KrylovConfig | AndersonConfig | None = None
    rho: float = 0.1


@dataclass
class BenchMatrix:
    """Problems (paths or generator specs), solver configs, and the budget."""

    problems: list
    solvers: list[SolverSpec]
    measure: str = "t_applications"

    def __post_init__(self):
        if not self.problems or not self.solvers:
            raise ValueError("problems and solvers must be nonempty")
        if self.measure not in MEASURES:
            raise ValueError(f"measure must be one of {MEASURES}")


def default_solvers(memory: int = 15) -> list[SolverSpec]:
    """The solver line-up the benchmark compares by default."""
    return [
        SolverSpec("plain", None),
        SolverSpec("anderson_i1", AndersonConfig(memory=memory, interval=1)),
        SolverSpec("anderson_i10", AndersonConfig(memory=memory, interval=10)),
        SolverSpec(
            "krylov_alt_t1",
            KrylovConfig(memory=memory, tries=(memory + 1,), mode="alt"),
        ),
        SolverSpec(
            "krylov_alt_t3",
            KrylovConfig(
                memory=memory,
                tries=(memory + 1 - 2 * (memory // 3), memory + 1 - memory // 3, memory + 1),
                mode="alt",
            ),
        ),
    ]


def default_bench_matrix(measure: str = "t_applications") -> BenchMatrix:
    return BenchMatrix(problems=default_suite(), solvers=default_solvers(), measure=measure)


def _materialize(problem_spec) -> tuple[str, QpProblem]:
    """Accept (name, kind, params) generator specs or instance file paths."""
    if isinstance(problem_spec, (str, Path)):
        return Path(problem_spec).stem, load_problem(problem_spec)
    name, kind, params = problem_spec
    return name, generate(kind, **params)


@dataclass
class BenchCell:
    problem: str
    solver: str
    report: SolveReport
    budget: float


@dataclass
class BenchResult:
    cells: list[BenchCell]
    budgets: np.ndarray  # problems x solvers, inf for failures
    problem_names: list[str]
    solver_names: list[str]
    perf: PerfProfile = field(default=None)


def run_bench_matrix(
    matrix: BenchMatrix, eps: float, max_iters: int = 20000
) -> BenchResult:
    """Run every (problem, solver) cell and assemble the profile.

    Iteration-style budgets are deterministic and run once; wall-time budgets
    use the better of two runs, as timing noise would otherwise dominate.
    """
    term = TerminationConfig(eps=eps, max_iters=max_iters)
    loaded = [_materialize(p) for p in matrix.problems]
    n_p, n_s = len(loaded), len(matrix.solvers)
    budgets = np.full((n_p, n_s), np.inf)
    cells = []
    for ip, (pname, prob) in enumerate(loaded):
        for isv, spec in enumerate(matrix.solvers):
            t0 = time.perf_counter()
            report = run(prob, accel=spec.accel, rho=spec.rho, term=term)
            wall = time.perf_counter() - t0
            if matrix.measure == "wall_time":
                t0 = time.perf_counter()
                run(prob, accel=spec.accel, rho=spec.rho, term=term)
                wall = min(wall, time.perf_counter() - t0)
            report.wall_time = wall
            if report.status == "solved":
                budgets[ip, isv] = {
                    "iterations": report.iterations,
                    "t_applications": report.t_applications,
                    "wall_time": wall,
                }[matrix.measure]
            cells.append(BenchCell(pname, spec.name, report, budgets[ip, isv]))
    perf = profile(budgets) if np.isfinite(budgets).any() else None
    return BenchResult(
        cells=cells,
        budgets=budgets,
        problem_names=[name for name, _ in loaded],
        solver_names=[s.name for s in matrix.solvers],
        perf=perf,
    )


def write_results_csv(result: BenchResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "problem",
                "solver",
                "status",
                "iterations",
                "t_applications",
                "accepted",
                "rejected",
                "wall_ms",
                "r_p",
                "r_d",
                "pd",
            ]
        )
        for cell in result.cells:
            rep = cell.report
            res = rep.residual_trace[-1][1]
            writer.writerow(
                [
                    cell.problem,
                    cell.solver,
                    rep.status,
                    rep.iterations,
                    rep.t_applications,
                    rep.accepted,
                    rep.rejected,
                    f"{rep.wall_time * 1e3:.3f}",
                    repr(res.r_p),
                    repr(res.r_d),
                    repr(res.pd),
                ]
            )


def write_profile_csv(result: BenchResult, path) -> None:
    if result.perf is None:
        raise ValueError("no profile available (nothing was solved)")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau"] + result.solver_names)
        for i, tau in enumerate(result.perf.taus):
            writer.writerow(
                [repr(float(tau))]
                + [repr(float(v)) for v in result.perf.samples[:, i]]
            )
