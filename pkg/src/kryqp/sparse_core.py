"""Compressed-sparse-column storage and paired-channel linear algebra.

The solver carries two working vectors through every matrix operation (the
optimization iterate and the extrapolation working vector).  Keeping the two
channels interleaved lets one pass over the matrix data serve both, which is
where the marginal cost saving of these memory-bound kernels comes from.  The
paired kernels below perform, per channel, exactly the same floating-point
operations in exactly the same order as their single-channel counterparts, so
the two paths agree bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.linalg.lapack import dpotrf


class NotPositiveDefinite(Exception):
    """A nonpositive pivot was found while factorizing a symmetric matrix."""


# ---------------------------------------------------------------------------
# jit kernels; nzval order fixed by the CSC layout, no fastmath reassociation


@njit(cache=True)
def _spmv(colptr, rowind, nzval, x, nrows):
    out = np.zeros(nrows)
    for j in range(x.shape[0]):
        xj = x[j]
        for p in range(colptr[j], colptr[j + 1]):
            out[rowind[p]] += nzval[p] * xj
    return out


@njit(cache=True)
def _spmv2(colptr, rowind, nzval, x2, nrows):
    out = np.zeros((nrows, 2))
    for j in range(x2.shape[0]):
        a = x2[j, 0]
        b = x2[j, 1]
        for p in range(colptr[j], colptr[j + 1]):
            i = rowind[p]
            v = nzval[p]
            out[i, 0] += v * a
            out[i, 1] += v * b
    return out


@njit(cache=True)
def _spmv_t(colptr, rowind, nzval, y, ncols):
    out = np.zeros(ncols)
    for j in range(ncols):
        s = 0.0
        for p in range(colptr[j], colptr[j + 1]):
            s += nzval[p] * y[rowind[p]]
        out[j] = s
    return out


@njit(cache=True)
def _spmv_t2(colptr, rowind, nzval, y2, ncols):
    out = np.zeros((ncols, 2))
    for j in range(ncols):
        s0 = 0.0
        s1 = 0.0
        for p in range(colptr[j], colptr[j + 1]):
            i = rowind[p]
            v = nzval[p]
            s0 += v * y2[i, 0]
            s1 += v * y2[i, 1]
        out[j, 0] = s0
        out[j, 1] = s1
    return out


@njit(cache=True)
def _spmv_sym_upper(colptr, rowind, nzval, x):
    n = x.shape[0]
    out = np.zeros(n)
    for j in range(n):
        xj = x[j]
        for p in range(colptr[j], colptr[j + 1]):
            i = rowind[p]
            v = nzval[p]
            out[i] += v * xj
            if i != j:
                out[j] += v * x[i]
    return out


@njit(cache=True)
def _spmv_sym_upper2(colptr, rowind, nzval, x2):
    n = x2.shape[0]
    out = np.zeros((n, 2))
    for j in range(n):
        a = x2[j, 0]
        b = x2[j, 1]
        for p in range(colptr[j], colptr[j + 1]):
            i = rowind[p]
            v = nzval[p]
            out[i, 0] += v * a
            out[i, 1] += v * b
            if i != j:
                out[j, 0] += v * x2[i, 0]
                out[j, 1] += v * x2[i, 1]
    return out


@njit(cache=True)
def _lower_solve(lo, b):
    # L x = b, row-oriented forward substitution
    n = b.shape[0]
    x = np.empty(n)
    for i in range(n):
        s = b[i]
        for j in range(i):
            s -= lo[i, j] * x[j]
        x[i] = s / lo[i, i]
    return x


@njit(cache=True)
def _lower_solve2(lo, b2):
    n = b2.shape[0]
    x = np.empty((n, 2))
    for i in range(n):
        s0 = b2[i, 0]
        s1 = b2[i, 1]
        for j in range(i):
            v = lo[i, j]
            s0 -= v * x[j, 0]
            s1 -= v * x[j, 1]
        d = lo[i, i]
        x[i, 0] = s0 / d
        x[i, 1] = s1 / d
    return x


@njit(cache=True)
def _lower_t_solve(lo, b):
    # L^T x = b, traversing rows of L so memory access stays contiguous
    n = b.shape[0]
    x = b.copy()
    for j in range(n - 1, -1, -1):
        xj = x[j] / lo[j, j]
        x[j] = xj
        for i in range(j):
            x[i] -= lo[j, i] * xj
    return x


@njit(cache=True)
def _lower_t_solve2(lo, b2):
    n = b2.shape[0]
    x = b2.copy()
    for j in range(n - 1, -1, -1):
        d = lo[j, j]
        xj0 = x[j, 0] / d
        xj1 = x[j, 1] / d
        x[j, 0] = xj0
        x[j, 1] = xj1
        for i in range(j):
            v = lo[j, i]
            x[i, 0] -= v * xj0
            x[i, 1] -= v * xj1
    return x


# ---------------------------------------------------------------------------
# storage types


@dataclass
class CscMatrix:
    """Real matrix in compressed-sparse-column form.

    ``colptr`` has length ``ncols + 1``; column ``j`` owns the entry range
    ``colptr[j]:colptr[j+1]`` of ``rowind``/``nzval``, with row indices
    strictly increasing inside each column.
    """

    nrows: int
    ncols: int
    colptr: np.ndarray
    rowind: np.ndarray
    nzval: np.ndarray

    def __post_init__(self):
        self.colptr = np.ascontiguousarray(self.colptr, dtype=np.int64)
        self.rowind = np.ascontiguousarray(self.rowind, dtype=np.int64)
        self.nzval = np.ascontiguousarray(self.nzval, dtype=np.float64)
        self.validate()

    @property
    def nnz(self) -> int:
        return int(self.colptr[-1])

    def validate(self) -> None:
        """Check the structural invariants, raising ValueError on violation."""
        if self.nrows < 0 or self.ncols < 0:
            raise ValueError("negative dimension")
        if self.colptr.shape != (self.ncols + 1,):
            raise ValueError("colptr must have length ncols + 1")
        if self.colptr[0] != 0 or np.any(np.diff(self.colptr) < 0):
            raise ValueError("colptr must start at 0 and be nondecreasing")
        nnz = int(self.colptr[-1])
        if self.rowind.shape != (nnz,) or self.nzval.shape != (nnz,):
            raise ValueError("rowind/nzval length must equal colptr[ncols]")
        if nnz and (self.rowind.min() < 0 or self.rowind.max() >= self.nrows):
            raise ValueError("row index out of range")
        for j in range(self.ncols):
            col = self.rowind[self.colptr[j]:self.colptr[j + 1]]
            if col.size > 1 and np.any(np.diff(col) <= 0):
                raise ValueError(f"row indices not strictly increasing in column {j}")

    @classmethod
    def from_dense(cls, a, drop_tol: float = 0.0) -> "CscMatrix":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        nrows, ncols = a.shape
        colptr = np.zeros(ncols + 1, dtype=np.int64)
        rows, vals = [], []
        for j in range(ncols):
            (idx,) = np.nonzero(np.abs(a[:, j]) > drop_tol)
            rows.append(idx)
            vals.append(a[idx, j])
            colptr[j + 1] = colptr[j] + idx.size
        rowind = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
        nzval = np.concatenate(vals) if vals else np.zeros(0)
        return cls(nrows, ncols, colptr, rowind, nzval)

    @classmethod
    def eye(cls, n: int) -> "CscMatrix":
        return cls(n, n, np.arange(n + 1), np.arange(n), np.ones(n))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.nrows, self.ncols))
        for j in range(self.ncols):
            sl = slice(self.colptr[j], self.colptr[j + 1])
            out[self.rowind[sl], j] = self.nzval[sl]
        return out


class DualVector:
    """Two equal-length channels stored interleaved (stride 2).

    ``primary`` carries the optimization iterate and ``shadow`` the working
    vector of the acceleration scheme; both are views into one C-contiguous
    ``(d, 2)`` buffer so paired kernels stream them together.
    """

    __slots__ = ("data",)

    def __init__(self, data: np.ndarray):
        data = np.ascontiguousarray(data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] != 2:
            raise ValueError("DualVector buffer must have shape (d, 2)")
        self.data = data

    @classmethod
    def from_channels(cls, primary, shadow) -> "DualVector":
        primary = np.asarray(primary, dtype=np.float64)
        shadow = np.asarray(shadow, dtype=np.float64)
        if primary.shape != shadow.shape or primary.ndim != 1:
            raise ValueError("channels must be 1-d and equally long")
        data = np.empty((primary.shape[0], 2))
        data[:, 0] = primary
        data[:, 1] = shadow
        return cls(data)

    @property
    def primary(self) -> np.ndarray:
        return self.data[:, 0]

    @property
    def shadow(self) -> np.ndarray:
        return self.data[:, 1]

    def __len__(self) -> int:
        return self.data.shape[0]


class SpdFactor:
    """Cholesky factorization of a symmetric positive-definite matrix."""

    __slots__ = ("lower", "dim")

    def __init__(self, lower: np.ndarray):
        self.lower = np.ascontiguousarray(lower, dtype=np.float64)
        self.dim = lower.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return factor_solve(self, rhs)

    def solve_paired(self, rhs: DualVector) -> DualVector:
        return factor_solve_paired(self, rhs)


# ---------------------------------------------------------------------------
# operations


def spmv(a: CscMatrix, x: np.ndarray) -> np.ndarray:
    """Return ``a @ x``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (a.ncols,):
        raise ValueError(f"spmv: x has length {x.shape}, expected {a.ncols}")
    return _spmv(a.colptr, a.rowind, a.nzval, x, a.nrows)


def spmv_transpose(a: CscMatrix, y: np.ndarray) -> np.ndarray:
    """Return ``a.T @ y``."""
    y = np.ascontiguousarray(y, dtype=np.float64)
    if y.shape != (a.nrows,):
        raise ValueError(f"spmv_transpose: y has length {y.shape}, expected {a.nrows}")
    return _spmv_t(a.colptr, a.rowind, a.nzval, y, a.ncols)


def spmv_sym(p: CscMatrix, x: np.ndarray) -> np.ndarray:
    """Multiply by a symmetric matrix of which only the upper triangle is stored."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if p.nrows != p.ncols:
        raise ValueError("spmv_sym: matrix must be square")
    if x.shape != (p.ncols,):
        raise ValueError(f"spmv_sym: x has length {x.shape}, expected {p.ncols}")
    return _spmv_sym_upper(p.colptr, p.rowind, p.nzval, x)


def spmv_paired(a: CscMatrix, v: DualVector) -> DualVector:
    """One matrix pass over both channels; each channel equals spmv bitwise."""
    if len(v) != a.ncols:
        raise ValueError(f"spmv_paired: channel length {len(v)}, expected {a.ncols}")
    return DualVector(_spmv2(a.colptr, a.rowind, a.nzval, v.data, a.nrows))


def spmv_transpose_paired(a: CscMatrix, v: DualVector) -> DualVector:
    if len(v) != a.nrows:
        raise ValueError(f"spmv_transpose_paired: channel length {len(v)}, expected {a.nrows}")
    return DualVector(_spmv_t2(a.colptr, a.rowind, a.nzval, v.data, a.ncols))


def spmv_sym_paired(p: CscMatrix, v: DualVector) -> DualVector:
    if p.nrows != p.ncols:
        raise ValueError("spmv_sym_paired: matrix must be square")
    if len(v) != p.ncols:
        raise ValueError(f"spmv_sym_paired: channel length {len(v)}, expected {p.ncols}")
    return DualVector(_spmv_sym_upper2(p.colptr, p.rowind, p.nzval, v.data))


def spd_factorize(w) -> SpdFactor:
    """Factorize a symmetric positive-definite matrix for later solves.

    ``w`` may be a CscMatrix or a dense square array; in both cases the upper
    triangle is authoritative and the lower is ignored.  Raises
    NotPositiveDefinite when a nonpositive pivot turns up, which callers use
    as the signal to retry with diagonal regularization.
    """
    if isinstance(w, CscMatrix):
        if w.nrows != w.ncols:
            raise ValueError("spd_factorize: matrix must be square")
        dense = w.to_dense()
    else:
        dense = np.asarray(w, dtype=np.float64)
        if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
            raise ValueError("spd_factorize: matrix must be square")
    n = dense.shape[0]
    if n == 0:
        return SpdFactor(np.zeros((0, 0)))
    upper = np.triu(dense)
    full = upper + np.triu(dense, 1).T
    c, info = dpotrf(full, lower=1)
    if info > 0:
        raise NotPositiveDefinite(f"nonpositive pivot at index {info - 1}")
    if info < 0:
        raise ValueError(f"illegal value in argument {-info} of dpotrf")
    return SpdFactor(np.tril(c))


def factor_solve(f: SpdFactor, rhs: np.ndarray) -> np.ndarray:
    """Solve ``W x = rhs`` given the factorization of W."""
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    if rhs.shape != (f.dim,):
        raise ValueError(f"factor_solve: rhs has length {rhs.shape}, expected {f.dim}")
    return _lower_t_solve(f.lower, _lower_solve(f.lower, rhs))


def factor_solve_paired(f: SpdFactor, rhs: DualVector) -> DualVector:
    """Two-channel solve; each channel equals the single-channel solve bitwise."""
    if len(rhs) != f.dim:
        raise ValueError(f"factor_solve_paired: channel length {len(rhs)}, expected {f.dim}")
    return DualVector(_lower_t_solve2(f.lower, _lower_solve2(f.lower, rhs.data)))
