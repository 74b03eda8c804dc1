"""QP problem data, cone projections, termination residuals, and a KKT oracle.

Problems have the form

    minimize   0.5 x'Px + c'x
    subject to Ax + s = b,   s in R+^{m1} x {0}^{m2}

so the first ``m1`` rows of A are inequalities (Ax <= b) and the rest are
equalities.  Multipliers of inequality rows live in the nonnegative cone,
multipliers of equality rows are free.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .sparse_core import CscMatrix, spmv, spmv_sym, spmv_transpose


class NoSolutionFound(Exception):
    """Active-set enumeration found no KKT point (infeasible or unbounded)."""


@dataclass
class QpProblem:
    """Problem data; P holds the upper triangle only."""

    p: CscMatrix
    c: np.ndarray
    a: CscMatrix
    b: np.ndarray
    m1: int
    m2: int

    def __post_init__(self):
        self.c = np.ascontiguousarray(self.c, dtype=np.float64)
        self.b = np.ascontiguousarray(self.b, dtype=np.float64)
        n, m = self.n, self.m
        if self.p.nrows != n or self.p.ncols != n:
            raise ValueError("P must be square with the dimension of A's columns")
        if self.c.shape != (n,):
            raise ValueError("c has wrong length")
        if self.b.shape != (m,):
            raise ValueError("b has wrong length")
        if self.m1 < 0 or self.m2 < 0 or self.m1 + self.m2 != m:
            raise ValueError("m1 + m2 must equal the row count of A")
        if np.any(self.p.rowind > np.repeat(np.arange(n), np.diff(self.p.colptr))):
            raise ValueError("P must store the upper triangle only")

    @property
    def n(self) -> int:
        return self.a.ncols

    @property
    def m(self) -> int:
        return self.a.nrows

    @property
    def dim(self) -> int:
        """Length of the stacked iterate (x then y)."""
        return self.n + self.m

    def p_dense(self) -> np.ndarray:
        u = self.p.to_dense()
        return u + np.triu(u, 1).T


@dataclass
class Iterate:
    """Primal-dual pair; the flat layout is x followed by y."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.ascontiguousarray(self.x, dtype=np.float64)
        self.y = np.ascontiguousarray(self.y, dtype=np.float64)

    @classmethod
    def zeros(cls, n: int, m: int) -> "Iterate":
        return cls(np.zeros(n), np.zeros(m))

    @classmethod
    def from_flat(cls, u: np.ndarray, n: int) -> "Iterate":
        u = np.asarray(u, dtype=np.float64)
        return cls(u[:n].copy(), u[n:].copy())

    def flat(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])


@dataclass
class ResidualTriple:
    r_p: float
    r_d: float
    pd: float

    def max(self) -> float:
        return max(self.r_p, self.r_d, self.pd)


@dataclass
class TerminationConfig:
    eps: float = 1e-6
    max_iters: int = 20000
    check_every: int = 25

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.check_every < 1:
            raise ValueError("check_every must be at least 1")


def project_dual_cone(v: np.ndarray, m1: int, m2: int) -> np.ndarray:
    """Project onto R+^{m1} x R^{m2}: clamp the first m1 entries at zero."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (m1 + m2,):
        raise ValueError("vector length must be m1 + m2")
    out = v.copy()
    np.maximum(out[:m1], 0.0, out=out[:m1])
    return out


def _inf_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v))) if v.size else 0.0


def residuals(prob: QpProblem, it: Iterate) -> ResidualTriple:
    """Primal/dual/gap residual measures used for termination.

    Inequality rows contribute their positive part to the primal residual;
    equality rows contribute the absolute violation so that signed equality
    error is not invisible.
    """
    ax = spmv(prob.a, it.x)
    px = spmv_sym(prob.p, it.x)
    aty = spmv_transpose(prob.a, it.y)

    viol = ax - prob.b
    viol[:prob.m1] = np.maximum(viol[:prob.m1], 0.0)
    r_p = _inf_norm(viol) / (1.0 + max(_inf_norm(ax), _inf_norm(prob.b)))

    r_d = _inf_norm(px + aty + prob.c) / (
        1.0 + max(_inf_norm(px), _inf_norm(aty), _inf_norm(prob.c))
    )

    xpx = float(it.x @ px)
    ctx = float(prob.c @ it.x)
    bty = float(prob.b @ it.y)
    pd = abs(xpx + ctx + bty) / (
        1.0 + max(abs(0.5 * xpx + ctx), abs(0.5 * xpx + bty))
    )
    return ResidualTriple(r_p, r_d, pd)


def is_solved(res: ResidualTriple, eps: float) -> bool:
    return res.max() <= eps


def kkt_oracle(prob: QpProblem, tol: float = 1e-9) -> Iterate:
    """Brute-force reference solution by enumerating inequality active sets.

    For each subset of active inequality rows, solves the corresponding
    equality-constrained KKT system and accepts the first solution that is
    primal feasible with nonnegative inequality multipliers (within tol).
    Only usable for small m1; the generators keep oracle instances tiny.
    """
    if prob.m1 > 12:
        raise ValueError("kkt_oracle: m1 too large for enumeration")
    n, m, m1 = prob.n, prob.m, prob.m1
    p_full = prob.p_dense()
    a_full = prob.a.to_dense()
    eq_rows = np.arange(m1, m)

    for bits in itertools.product((False, True), repeat=m1):
        active = np.concatenate([np.nonzero(bits)[0], eq_rows]).astype(np.intp)
        na = active.size
        kkt = np.zeros((n + na, n + na))
        kkt[:n, :n] = p_full
        kkt[:n, n:] = a_full[active].T
        kkt[n:, :n] = a_full[active]
        rhs = np.concatenate([-prob.c, prob.b[active]])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(sol)):
            continue
        if _inf_norm(kkt @ sol - rhs) > max(tol, 1e-9) * (1.0 + _inf_norm(rhs)):
            continue
        x = sol[:n]
        y = np.zeros(m)
        y[active] = sol[n:]
        n_act_ineq = na - eq_rows.size
        if np.any(sol[n:n + n_act_ineq] < -tol):
            continue
        slack = prob.b - a_full @ x
        if np.any(slack[:m1] < -tol):
            continue
        return Iterate(x, y)
    raise NoSolutionFound("no active set yields a KKT point")


# ---------------------------------------------------------------------------
# instance file format (JSON, consumed by the benchmark CLI)


def _csc_to_dict(a: CscMatrix) -> dict:
    return {
        "nrows": a.nrows,
        "ncols": a.ncols,
        "colptr": a.colptr.tolist(),
        "rowind": a.rowind.tolist(),
        "nzval": a.nzval.tolist(),
    }


def _csc_from_dict(d: dict) -> CscMatrix:
    return CscMatrix(d["nrows"], d["ncols"], d["colptr"], d["rowind"], d["nzval"])


def problem_to_dict(prob: QpProblem) -> dict:
    return {
        "n": prob.n,
        "m": prob.m,
        "m1": prob.m1,
        "m2": prob.m2,
        "c": prob.c.tolist(),
        "b": prob.b.tolist(),
        "P": _csc_to_dict(prob.p),
        "A": _csc_to_dict(prob.a),
    }


def problem_from_dict(d: dict) -> QpProblem:
    prob = QpProblem(
        p=_csc_from_dict(d["P"]),
        c=np.asarray(d["c"], dtype=np.float64),
        a=_csc_from_dict(d["A"]),
        b=np.asarray(d["b"], dtype=np.float64),
        m1=d["m1"],
        m2=d["m2"],
    )
    if prob.n != d["n"] or prob.m != d["m"]:
        raise ValueError("inconsistent dimensions in instance file")
    return prob


def save_problem(prob: QpProblem, path) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_dict(prob), fh, separators=(",", ":"))
        fh.write("\n")


def load_problem(path) -> QpProblem:
    with open(path) as fh:
        return problem_from_dict(json.load(fh))
