"""Relative performance profiles over a solver-by-problem budget matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class PerfProfile:
    """Per-cell budget ratios and the cumulative profile on a tau grid.

    ``ratios`` has one row per problem and one column per solver, with inf
    marking failures; rows where no solver succeeded are excluded from
    ``n_solved`` and contribute nothing to the profile.
    """

    ratios: np.ndarray
    taus: np.ndarray
    samples: np.ndarray
    n_solved: int

    def evaluate(self, tau: float) -> np.ndarray:
        """Exact profile value P_s(tau) for every solver."""
        counted = np.isfinite(self.ratios).any(axis=1)
        hits = self.ratios[counted] <= tau
        return hits.sum(axis=0) / self.n_solved


def profile(times, grid_points: int = 64) -> PerfProfile:
    """Build the relative performance profile of a budget matrix.

    ``times[p][s]`` is the budget solver s spent on problem p, with inf (or
    nan) for failures.  The ratio of each cell to the row-best budget feeds
    the cumulative distribution P_s(tau) over a log-spaced tau grid.
    """
    t = np.asarray(times, dtype=np.float64)
    if t.ndim != 2 or t.size == 0:
        raise ValueError("times must be a nonempty 2-d matrix")
    t = np.where(np.isnan(t), np.inf, t)
    counted = np.isfinite(t).any(axis=1)
    n_solved = int(counted.sum())
    if n_solved == 0:
        raise ValueError("no problem was solved by any solver")

    ratios = np.full_like(t, np.inf)
    best = np.min(t[counted], axis=1)
    ratios[counted] = t[counted] / best[:, None]

    finite = ratios[np.isfinite(ratios)]
    top = float(finite.max()) if finite.size else 1.0
    taus = np.geomspace(1.0, max(top, 1.0 + 1e-12), grid_points)
    samples = np.empty((t.shape[1], grid_points))
    for i, tau in enumerate(taus):
        samples[:, i] = (ratios[counted] <= tau).sum(axis=0) / n_solved
    return PerfProfile(ratios=ratios, taus=taus, samples=samples, n_solved=n_solved)
