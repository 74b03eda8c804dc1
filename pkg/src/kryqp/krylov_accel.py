"""Krylov subspace acceleration for the piecewise-affine fixed-point iteration.

An Arnoldi process with modified Gram-Schmidt builds an orthonormal basis of
the Krylov space of the locally linearized operator, seeded with the
fixed-point residual.  Candidate iterates come from a small Hessenberg least
squares problem solved with Givens rotations.  Two subspace flavours are
supported: ``obv`` runs Arnoldi on (G - I) and solves

    min_z || H~ z + Q' r ||

while ``alt`` runs Arnoldi on G itself and solves the analogous problem with
H~ shifted by a stacked identity.  Basis construction continues blindly when
the active set moves; the driver's safeguard is what catches bad candidates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .admm_operator import ActiveSet, AdmmOperator
from .qp_model import Iterate

BREAKDOWN_TOL = 1e-12      # relative to the pre-orthogonalization norm
INIT_BREAKDOWN_TOL = 1e-14  # times dimension, on the seed residual
SINGULAR_TOL = 1e-14


class Breakdown(Exception):
    """The vector to orthogonalize is (numerically) in the current span."""


class SingularTriangle(Exception):
    """Triangularized least-squares matrix has a negligible diagonal entry."""


def attempt_set(memory: int, tries: int) -> tuple[int, ...]:
    """Evenly spaced proposal schedule ending at memory + 1.

    tries=1 gives a single attempt once the basis is full; tries=3 with the
    default memory 15 gives {6, 11, 16}.
    """
    if tries < 1:
        raise ValueError("tries must be at least 1")
    step = max(memory // tries, 1)
    points = [memory + 1 - i * step for i in range(tries)]
    return tuple(sorted(p for p in points if p >= 3))


@dataclass
class KrylovConfig:
    memory: int = 15
    tries: tuple[int, ...] = field(default_factory=lambda: (16,))
    mode: str = "alt"

    def __post_init__(self):
        self.tries = tuple(sorted(set(int(t) for t in self.tries)))
        if self.memory < 2:
            raise ValueError("memory must be at least 2")
        if not self.tries:
            raise ValueError("attempt set must be nonempty")
        if self.tries[0] < 3 or self.tries[-1] != self.memory + 1:
            raise ValueError("attempt set must lie in {3..memory+1} and contain memory+1")
        if self.mode not in ("obv", "alt"):
            raise ValueError("mode must be 'obv' or 'alt'")


class ArnoldiState:
    """Basis, Hessenberg data and the inner step counter of one memory cycle.

    ``j`` counts driver passes since the last restart (1 means the basis needs
    initialization).  ``ncols`` orthonormal columns of Q are populated and
    ``hcols`` columns of H are filled; after a lucky breakdown ``hcols``
    equals ``ncols`` and the basis stops growing until the next restart.
    """

    def __init__(self, dim: int, memory: int, mode: str):
        if mode not in ("obv", "alt"):
            raise ValueError("mode must be 'obv' or 'alt'")
        self.dim = dim
        self.memory = memory
        self.mode = mode
        self.q = np.zeros((dim, memory))
        self.h = np.zeros((memory + 1, memory))
        self.j = 1
        self.ncols = 0
        self.hcols = 0
        self.breakdown = False
        self.last_u_kr: np.ndarray | None = None
        self.last_z: np.ndarray | None = None


def init_basis(state: ArnoldiState, r0: np.ndarray) -> None:
    """Seed the basis with the normalized fixed-point residual."""
    r0 = np.asarray(r0, dtype=np.float64)
    nrm = float(np.linalg.norm(r0))
    if nrm <= INIT_BREAKDOWN_TOL * state.dim:
        raise Breakdown("seed residual is numerically zero")
    state.q[:, 0] = r0 / nrm
    state.ncols = 1
    state.hcols = 0
    state.breakdown = False
    state.j = 2


def arnoldi_absorb(state: ArnoldiState, gq: np.ndarray) -> None:
    """Fold the image of the latest basis vector into the recurrence.

    ``gq`` is the linearized operator applied to the last populated column
    (the shadow channel of a paired operator application).  In ``obv`` mode
    the column itself is subtracted so the recurrence tracks G - I.
    """
    state.j += 1
    if state.breakdown:
        return
    p = state.ncols
    if p < 1:
        raise ValueError("basis not initialized")
    if p >= state.memory + 1:
        raise ValueError("basis full; restart required")
    q_prev = state.q[:, p - 1]
    w = gq - q_prev if state.mode == "obv" else np.array(gq, dtype=np.float64)
    pre_norm = float(np.linalg.norm(w))
    for i in range(p):
        hij = float(state.q[:, i] @ w)
        w -= hij * state.q[:, i]
        state.h[i, p - 1] = hij
    nrm = float(np.linalg.norm(w))
    state.hcols = p
    if nrm <= BREAKDOWN_TOL * pre_norm:
        # lucky breakdown: the span is invariant, least squares stays valid
        state.h[p, p - 1] = 0.0
        state.breakdown = True
        return
    state.h[p, p - 1] = nrm
    if p < state.memory:
        state.q[:, p] = w / nrm
        state.ncols = p + 1
    else:
        # no room for another column; treat like a cap on the basis
        state.breakdown = True


def arnoldi_step(state: ArnoldiState, op: AdmmOperator, js: ActiveSet) -> None:
    """One Arnoldi expansion using a standalone linearized operator product."""
    if not 2 <= state.j <= state.memory + 1:
        raise ValueError(f"arnoldi_step called at inner counter {state.j}")
    q_prev = state.q[:, state.ncols - 1]
    arnoldi_absorb(state, op.apply_linearized(js, q_prev))


def givens(a: float, b: float) -> tuple[float, float, float]:
    """Rotation (c, s, r) with c*a + s*b = r >= 0 and -s*a + c*b = 0."""
    if a == 0.0 and b == 0.0:
        return 1.0, 0.0, 0.0
    r = float(np.hypot(a, b))
    return a / r, b / r, r


def propose(
    state: ArnoldiState, op: AdmmOperator, u_k: Iterate, r_k: np.ndarray
) -> Iterate:
    """Solve the Hessenberg least squares problem and map the result through T.

    ``r_k`` must be the fixed-point residual at the current iterate; the right
    hand side projects it onto the basis, so the problem stays meaningful even
    though the iterate has moved since the basis was seeded.
    """
    rows, cols = state.ncols, state.hcols
    if cols < 1:
        raise ValueError("propose requires at least one Hessenberg column")
    e = state.h[:rows, :cols].copy()
    if state.mode == "alt":
        e[np.arange(cols), np.arange(cols)] -= 1.0
    g = state.q[:, :rows].T @ np.asarray(r_k, dtype=np.float64)

    for col in range(cols):
        if col + 1 >= rows:
            break
        c, s, r = givens(e[col, col], e[col + 1, col])
        upper = c * e[col, col:] + s * e[col + 1, col:]
        lower = -s * e[col, col:] + c * e[col + 1, col:]
        e[col, col:] = upper
        e[col + 1, col:] = lower
        e[col, col] = r
        g[col], g[col + 1] = c * g[col] + s * g[col + 1], -s * g[col] + c * g[col + 1]

    diag = np.abs(np.diagonal(e)[:cols])
    if np.any(diag < SINGULAR_TOL):
        raise SingularTriangle("triangularized system is numerically singular")
    z = solve_triangular(e[:cols, :cols], -g[:cols], lower=False)

    u_kr = u_k.flat() + state.q[:, :cols] @ z
    state.last_z = z
    state.last_u_kr = u_kr
    candidate, _ = op.apply_t(Iterate.from_flat(u_kr, u_k.x.shape[0]))
    return candidate


def restart(state: ArnoldiState) -> None:
    """Discard all subspace data; the next pass will reseed the basis."""
    state.q[:] = 0.0
    state.h[:] = 0.0
    state.j = 1
    state.ncols = 0
    state.hcols = 0
    state.breakdown = False
    state.last_u_kr = None
    state.last_z = None
