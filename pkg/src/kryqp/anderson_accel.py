"""Restarted type-II Anderson acceleration with QR-based least squares.

The window stores input/output pairs of the effective fixed-point map (the
baseline operator itself, or its s-fold composition when the driver only
shows the accelerator every s-th iterate).  A proposal combines past outputs
with weights chosen to minimize the combined fixed-point residual:

    gamma = argmin || f_k - dF gamma ||,   u_hat = Tu_k - dU gamma

where dF and dU hold consecutive differences of the residuals and outputs.
No regularization is applied; a rank-deficient least squares problem simply
skips the proposal, which is the conditioning failure mode this baseline is
expected to exhibit when residuals become nearly collinear.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

RANK_TOL = 1e-14


class NotReady(Exception):
    """Fewer than two stored pairs; no difference column to extrapolate with."""


class RankDeficient(Exception):
    """The residual-difference matrix lost numerical column rank."""


@dataclass
class AndersonConfig:
    memory: int = 15
    interval: int = 1

    def __post_init__(self):
        if self.memory < 2:
            raise ValueError("memory must be at least 2")
        if self.interval < 1:
            raise ValueError("interval must be at least 1")


class AndersonState:
    """Sliding window of (input, output) pairs, cleared when it overflows."""

    def __init__(self, memory: int):
        if memory < 2:
            raise ValueError("memory must be at least 2")
        self.memory = memory
        self.inputs: list[np.ndarray] = []
        self.outputs: list[np.ndarray] = []

    def __len__(self) -> int:
        return len(self.inputs)


def update(state: AndersonState, u: np.ndarray, tu: np.ndarray) -> None:
    """Append a pair, restarting first if the window is at capacity.

    Capacity is memory + 1 pairs, i.e. at most ``memory`` difference columns.
    """
    u = np.asarray(u, dtype=np.float64)
    tu = np.asarray(tu, dtype=np.float64)
    if u.shape != tu.shape or u.ndim != 1:
        raise ValueError("pair members must be 1-d and equally long")
    if state.inputs and u.shape != state.inputs[0].shape:
        raise ValueError("pair dimension does not match the window")
    if len(state.inputs) >= state.memory + 1:
        state.inputs.clear()
        state.outputs.clear()
    state.inputs.append(u.copy())
    state.outputs.append(tu.copy())


def propose(state: AndersonState) -> np.ndarray:
    """Extrapolated candidate from the current window."""
    k = len(state.inputs)
    if k < 2:
        raise NotReady("need at least two pairs")
    u_mat = np.column_stack(state.inputs)
    tu_mat = np.column_stack(state.outputs)
    f_mat = tu_mat - u_mat
    df = np.diff(f_mat, axis=1)
    du = np.diff(tu_mat, axis=1)
    if df.shape[1] > df.shape[0]:
        raise RankDeficient("more difference columns than dimensions")
    q, r = np.linalg.qr(df)
    if np.any(np.abs(np.diagonal(r)) < RANK_TOL):
        raise RankDeficient("negligible diagonal in the QR factor")
    gamma = solve_triangular(r, q.T @ f_mat[:, -1], lower=False)
    return tu_mat[:, -1] - du @ gamma
