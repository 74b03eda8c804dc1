"""Benchmark tooling: instance generators, performance profiles, CLI."""

from .generators import default_suite, generate
from .microbench import micro_bench, random_sparse
from .profiles import PerfProfile, profile
from .runner import (
    BenchMatrix,
    BenchResult,
    SolverSpec,
    default_bench_matrix,
    default_solvers,
    run_bench_matrix,
    write_profile_csv,
    write_results_csv,
)

__all__ = [
    "BenchMatrix",
    "BenchResult",
    "PerfProfile",
    "SolverSpec",
    "default_bench_matrix",
    "default_solvers",
    "default_suite",
    "generate",
    "micro_bench",
    "profile",
    "random_sparse",
    "run_bench_matrix",
    "write_profile_csv",
    "write_results_csv",
]
