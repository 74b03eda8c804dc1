"""Micro-benchmark of paired-channel versus single-channel kernels.

Times the interleaved two-channel sparse products and factor solves against
their single-channel counterparts on matrices large enough that the data does
not fit in cache (guideline: at least 1e5 stored entries).  The ratio of a
paired call to a single call is expected to sit well below 2 on typical
hardware because these kernels are memory-bound, but the exact value depends
on the machine.
"""

from __future__ import annotations

import time

import numpy as np
import scipy.sparse as sp

from ..sparse_core import (
    CscMatrix,
    DualVector,
    factor_solve,
    factor_solve_paired,
    spd_factorize,
    spmv,
    spmv_paired,
)


def random_sparse(nrows: int, ncols: int, nnz_per_col: int, seed: int = 0) -> CscMatrix:
    """Random CSC matrix with a fixed number of entries per column."""
    rng = np.random.default_rng(seed)
    nnz_per_col = min(nnz_per_col, nrows)
    colptr = np.arange(ncols + 1, dtype=np.int64) * nnz_per_col
    rows = np.empty(ncols * nnz_per_col, dtype=np.int64)
    for j in range(ncols):
        rows[j * nnz_per_col:(j + 1) * nnz_per_col] = np.sort(
            rng.choice(nrows, size=nnz_per_col, replace=False)
        )
    vals = rng.standard_normal(rows.shape[0])
    return CscMatrix(nrows, ncols, colptr, rows, vals)


def _best_of(fn, repetitions: int) -> float:
    best = np.inf
    for _ in range(repetitions):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def micro_bench(
    matrices: list[CscMatrix], repetitions: int = 50, rho: float = 0.1
) -> list[dict]:
    """Measure single and paired kernel times for each matrix.

    For every matrix A this times A @ x with one and with two interleaved
    channels, and likewise the triangular solves against a factorization of
    W = I + rho A'A.  Returns one row of results per matrix with the
    minimum-over-repetitions times and the paired/single ratios.
    """
    rows = []
    for idx, a in enumerate(matrices):
        rng = np.random.default_rng(idx)
        x = rng.standard_normal(a.ncols)
        pair = DualVector.from_channels(x, rng.standard_normal(a.ncols))

        spmv(a, x)  # warm the jit path before timing
        spmv_paired(a, pair)
        t_single = _best_of(lambda: spmv(a, x), repetitions)
        t_paired = _best_of(lambda: spmv_paired(a, pair), repetitions)

        a_sp = sp.csc_matrix((a.nzval, a.rowind, a.colptr), shape=(a.nrows, a.ncols))
        w = rho * (a_sp.T @ a_sp).toarray()
        w[np.diag_indices_from(w)] += 1.0
        factor = spd_factorize(w)
        rhs = rng.standard_normal(a.ncols)
        rhs_pair = DualVector.from_channels(rhs, rng.standard_normal(a.ncols))
        factor_solve(factor, rhs)
        factor_solve_paired(factor, rhs_pair)
        t_solve = _best_of(lambda: factor_solve(factor, rhs), repetitions)
        t_solve_pair = _best_of(lambda: factor_solve_paired(factor, rhs_pair), repetitions)

        rows.append(
            {
                "nrows": a.nrows,
                "ncols": a.ncols,
                "nnz": a.nnz,
                "spmv_single_s": t_single,
                "spmv_paired_s": t_paired,
                "spmv_ratio": t_paired / t_single,
                "solve_single_s": t_solve,
                "solve_paired_s": t_solve_pair,
                "solve_ratio": t_solve_pair / t_solve,
            }
        )
    return rows
