"""The ADMM fixed-point operator, its local linearization, and the M-norm.

One application of the operator T maps an iterate (x, y) through

    y+ = proj(y + rho (Ax - b))        projection onto R+^{m1} x R^{m2}
    yb = 2 y+ - y
    x+ = x - W^{-1} (Px + c + A' yb)   with W = P + rho A'A + delta I

The signs of the pre-projection vector on the inequality rows select one of
2^{m1} polyhedral regions on which T is affine; replacing the projection with
the corresponding 0/1 diagonal mask and dropping the constants b, c gives the
linear part of that local affine map, applied here matrix-free.

T is averaged in the seminorm induced by

    M = [[rho A'A + delta I, A'], [A, I/rho]]

which is therefore the metric used by the acceleration safeguard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qp_model import Iterate, QpProblem
from .sparse_core import (
    DualVector,
    NotPositiveDefinite,
    SpdFactor,
    spd_factorize,
    spmv,
    spmv_paired,
    spmv_sym,
    spmv_sym_paired,
    spmv_transpose,
    spmv_transpose_paired,
)


class FactorizationFailed(Exception):
    """W could not be factorized even after diagonal regularization."""


class NegativeQuadraticForm(Exception):
    """The M quadratic form evaluated significantly below zero."""


FALLBACK_DELTA = 1e-10


@dataclass
class ActiveSet:
    """Mask over the inequality rows: True entries pass the projection."""

    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.ascontiguousarray(self.mask, dtype=bool)


class AdmmOperator:
    """Immutable fixed-point operator for one problem and step parameter."""

    def __init__(self, prob: QpProblem, rho: float, delta: float, w_factor: SpdFactor):
        self.prob = prob
        self.rho = rho
        self.delta = delta
        self.w_factor = w_factor

    @classmethod
    def build(cls, prob: QpProblem, rho: float) -> "AdmmOperator":
        """Assemble and factorize W, regularizing once if it is not PD."""
        if rho <= 0:
            raise ValueError("rho must be positive")
        a_dense = prob.a.to_dense()
        w = prob.p_dense() + rho * (a_dense.T @ a_dense)
        try:
            return cls(prob, rho, 0.0, spd_factorize(w))
        except NotPositiveDefinite:
            pass
        w[np.diag_indices_from(w)] += FALLBACK_DELTA
        try:
            return cls(prob, rho, FALLBACK_DELTA, spd_factorize(w))
        except NotPositiveDefinite as exc:
            raise FactorizationFailed(
                f"W not positive definite even with delta={FALLBACK_DELTA}"
            ) from exc

    @property
    def dim(self) -> int:
        return self.prob.dim

    def apply_t(self, it: Iterate) -> tuple[Iterate, ActiveSet]:
        """One operator application; also reports the observed active set."""
        prob = self.prob
        m1 = prob.m1
        pre = it.y + self.rho * (spmv(prob.a, it.x) - prob.b)
        mask = pre[:m1] >= 0.0
        y_new = pre
        y_new[:m1] = np.where(mask, pre[:m1], 0.0)
        ybar = 2.0 * y_new - it.y
        rhs = spmv_sym(prob.p, it.x) + prob.c + spmv_transpose(prob.a, ybar)
        x_new = it.x - self.w_factor.solve(rhs)
        return Iterate(x_new, y_new), ActiveSet(mask)

    def apply_linearized(self, js: ActiveSet, q: np.ndarray) -> np.ndarray:
        """Apply the linear part of the affine piece selected by ``js``."""
        prob = self.prob
        n, m1 = prob.n, prob.m1
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (self.dim,):
            raise ValueError(f"direction has length {q.shape}, expected {self.dim}")
        qx, qy = q[:n], q[n:]
        pre = qy + self.rho * spmv(prob.a, qx)
        qy_new = pre
        qy_new[:m1] = np.where(js.mask, pre[:m1], 0.0)
        qybar = 2.0 * qy_new - qy
        rhs = spmv_sym(prob.p, qx) + spmv_transpose(prob.a, qybar)
        qx_new = qx - self.w_factor.solve(rhs)
        return np.concatenate([qx_new, qy_new])

    def apply_t_paired(
        self, it: Iterate, q: np.ndarray
    ) -> tuple[Iterate, ActiveSet, np.ndarray]:
        """Apply T to the iterate and the local linear map to ``q`` in one pass.

        The projection is evaluated on the iterate channel first, and the mask
        deduced there is what gets applied to the shadow channel; every other
        primitive streams both channels together.  Channel results are bitwise
        identical to apply_t and apply_linearized respectively.
        """
        prob = self.prob
        n, m1 = prob.n, prob.m1
        q = np.asarray(q, dtype=np.float64)
        if q.shape != (self.dim,):
            raise ValueError(f"direction has length {q.shape}, expected {self.dim}")
        xs = DualVector.from_channels(it.x, q[:n])
        ys = DualVector.from_channels(it.y, q[n:])

        ax = spmv_paired(prob.a, xs).data
        ax[:, 0] -= prob.b
        pre = ys.data + self.rho * ax
        mask = pre[:m1, 0] >= 0.0
        y_new = pre
        y_new[:m1] = np.where(mask[:, None], pre[:m1], 0.0)
        ybar = DualVector(2.0 * y_new - ys.data)
        rhs = spmv_sym_paired(prob.p, xs).data
        rhs[:, 0] += prob.c
        rhs = DualVector(rhs + spmv_transpose_paired(prob.a, ybar).data)
        dx = self.w_factor.solve_paired(rhs).data
        x_new = xs.data - dx
        iterate = Iterate(x_new[:, 0], y_new[:, 0])
        shadow = np.concatenate([x_new[:, 1], y_new[:, 1]])
        return iterate, ActiveSet(mask), shadow

    def m_norm(self, v: np.ndarray) -> float:
        """Seminorm induced by the preconditioner, via a single A product."""
        n = self.prob.n
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.dim,):
            raise ValueError(f"vector has length {v.shape}, expected {self.dim}")
        dx, dy = v[:n], v[n:]
        adx = spmv(self.prob.a, dx)
        form = (
            self.rho * float(adx @ adx)
            + self.delta * float(dx @ dx)
            + 2.0 * float(dy @ adx)
            + float(dy @ dy) / self.rho
        )
        if form < -1e-12 * float(v @ v):
            raise NegativeQuadraticForm(f"quadratic form {form} below tolerance")
        return math.sqrt(max(form, 0.0))

    def fixed_point_residual(self, it: Iterate) -> tuple[np.ndarray, ActiveSet]:
        """Return T(u) - u and the active set observed while applying T."""
        out, js = self.apply_t(it)
        return np.concatenate([out.x - it.x, out.y - it.y]), js
