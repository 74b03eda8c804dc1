"""Seeded desk-scale QP instance generators.

Five families: dense-ish random QPs with mixed constraints, purely
equality-constrained QPs, condensed double-integrator MPC, and Lasso/Huber
fitting problems in their standard QP reformulations with equality rows
coupling the residual variables.  Every instance is feasible and bounded by
construction, and fully determined by (kind, parameters, seed).
"""

from __future__ import annotations

import numpy as np

from ..qp_model import QpProblem
from ..sparse_core import CscMatrix

KINDS = ("random_qp", "equality_qp", "mpc_toy", "lasso", "huber")


def _upper_csc(dense: np.ndarray) -> CscMatrix:
    return CscMatrix.from_dense(np.triu(dense))


def _sparse_rows(rng, m: int, n: int, density: float) -> np.ndarray:
    """Random sparse matrix where every row keeps at least one entry."""
    mask = rng.random((m, n)) < density
    for i in range(m):
        if not mask[i].any():
            mask[i, rng.integers(n)] = True
    vals = rng.standard_normal((m, n))
    return np.where(mask, vals, 0.0)


def random_qp(
    n: int = 40,
    m1: int = 30,
    m2: int = 10,
    density: float = 0.3,
    reg: float = 0.1,
    seed: int = 0,
) -> QpProblem:
    """P = B'B + reg*I with random sparse constraints and an interior point."""
    if n < 1 or m1 < 0 or m2 < 0 or m1 + m2 < 1:
        raise ValueError("sizes must be positive")
    rng = np.random.default_rng(seed)
    b_fac = rng.standard_normal((n, n)) / np.sqrt(n)
    p_dense = b_fac.T @ b_fac
    p_dense[np.diag_indices_from(p_dense)] += reg
    a_dense = _sparse_rows(rng, m1 + m2, n, density)
    x0 = rng.standard_normal(n)
    rhs = a_dense @ x0
    rhs[:m1] += rng.uniform(0.1, 1.0, m1)
    c = rng.standard_normal(n)
    return QpProblem(
        p=_upper_csc(p_dense), c=c, a=CscMatrix.from_dense(a_dense), b=rhs, m1=m1, m2=m2
    )


def equality_qp(
    n: int = 40,
    m2: int = 15,
    density: float = 0.5,
    reg: float = 0.1,
    seed: int = 0,
) -> QpProblem:
    """Strictly convex objective with only equality constraints (m1 = 0)."""
    if m2 > n:
        raise ValueError("equality rows must not exceed the variable count")
    rng = np.random.default_rng(seed)
    b_fac = rng.standard_normal((n, n)) / np.sqrt(n)
    p_dense = b_fac.T @ b_fac
    p_dense[np.diag_indices_from(p_dense)] += reg
    a_dense = _sparse_rows(rng, m2, n, density)
    x0 = rng.standard_normal(n)
    c = rng.standard_normal(n)
    return QpProblem(
        p=_upper_csc(p_dense),
        c=c,
        a=CscMatrix.from_dense(a_dense),
        b=a_dense @ x0,
        m1=0,
        m2=m2,
    )


def mpc_toy(
    horizon: int = 20,
    dt: float = 0.1,
    vmax: float = 1.0,
    input_weight: float = 0.1,
    seed: int = 0,
) -> QpProblem:
    """Condensed double-integrator MPC with box-bounded inputs.

    States are (position, velocity); the decision variables are the inputs
    over the horizon, so after condensing the dynamics the problem has a
    dense positive-definite Hessian and 2*horizon inequality rows.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    rng = np.random.default_rng(seed)
    ad = np.array([[1.0, dt], [0.0, 1.0]])
    bd = np.array([[0.5 * dt * dt], [dt]])
    q_weight = np.diag([1.0, 0.1])

    nstate = 2
    phi = np.zeros((nstate * horizon, nstate))
    gamma = np.zeros((nstate * horizon, horizon))
    a_pow = np.eye(nstate)
    for t in range(horizon):
        a_pow = ad @ a_pow
        phi[nstate * t:nstate * (t + 1)] = a_pow
        for kk in range(t + 1):
            blk = np.linalg.matrix_power(ad, t - kk) @ bd
            gamma[nstate * t:nstate * (t + 1), kk] = blk[:, 0]

    qbar = np.kron(np.eye(horizon), q_weight)
    p_dense = gamma.T @ qbar @ gamma
    p_dense[np.diag_indices_from(p_dense)] += input_weight
    p_dense = 0.5 * (p_dense + p_dense.T)
    z0 = rng.uniform(-2.0, 2.0, nstate)
    c = gamma.T @ (qbar @ (phi @ z0))

    a_dense = np.vstack([np.eye(horizon), -np.eye(horizon)])
    b = np.full(2 * horizon, vmax)
    return QpProblem(
        p=_upper_csc(p_dense),
        c=c,
        a=CscMatrix.from_dense(a_dense),
        b=b,
        m1=2 * horizon,
        m2=0,
    )


def lasso(
    features: int = 20,
    samples: int = 40,
    lam: float = 1.0,
    density: float = 0.5,
    seed: int = 0,
) -> QpProblem:
    """L1-regularized least squares as a QP over (x, residual, bound) blocks.

    minimize 0.5||y||^2 + lam 1't  s.t.  Dx - y = b0,  -t <= x <= t.
    """
    rng = np.random.default_rng(seed)
    d_mat = _sparse_rows(rng, samples, features, density)
    x_true = rng.standard_normal(features) * (rng.random(features) < 0.5)
    b0 = d_mat @ x_true + 0.1 * rng.standard_normal(samples)

    nz = features + samples + features
    p_dense = np.zeros((nz, nz))
    p_dense[features:features + samples, features:features + samples] = np.eye(samples)
    c = np.concatenate([np.zeros(features + samples), lam * np.ones(features)])

    ineq = np.zeros((2 * features, nz))
    ineq[:features, :features] = np.eye(features)
    ineq[:features, features + samples:] = -np.eye(features)
    ineq[features:, :features] = -np.eye(features)
    ineq[features:, features + samples:] = -np.eye(features)
    eq = np.zeros((samples, nz))
    eq[:, :features] = d_mat
    eq[:, features:features + samples] = -np.eye(samples)
    a_dense = np.vstack([ineq, eq])
    b = np.concatenate([np.zeros(2 * features), b0])
    return QpProblem(
        p=_upper_csc(p_dense),
        c=c,
        a=CscMatrix.from_dense(a_dense),
        b=b,
        m1=2 * features,
        m2=samples,
    )


def huber(
    features: int = 20,
    samples: int = 40,
    threshold: float = 1.0,
    density: float = 0.5,
    seed: int = 0,
) -> QpProblem:
    """Huber fitting as a QP over (x, quadratic part, linear parts) blocks.

    minimize 0.5||z||^2 + M 1'(rp + rm)
    s.t.     Dx - z - rp + rm = b0,  rp >= 0,  rm >= 0.
    """
    rng = np.random.default_rng(seed)
    d_mat = _sparse_rows(rng, samples, features, density)
    x_true = rng.standard_normal(features)
    b0 = d_mat @ x_true + 0.1 * rng.standard_normal(samples)
    outliers = rng.random(samples) < 0.1
    b0[outliers] += rng.uniform(3.0, 10.0, int(outliers.sum()))

    nz = features + 3 * samples
    p_dense = np.zeros((nz, nz))
    p_dense[features:features + samples, features:features + samples] = np.eye(samples)
    c = np.concatenate(
        [np.zeros(features + samples), threshold * np.ones(2 * samples)]
    )

    ineq = np.zeros((2 * samples, nz))
    ineq[:samples, features + samples:features + 2 * samples] = -np.eye(samples)
    ineq[samples:, features + 2 * samples:] = -np.eye(samples)
    eq = np.zeros((samples, nz))
    eq[:, :features] = d_mat
    eq[:, features:features + samples] = -np.eye(samples)
    eq[:, features + samples:features + 2 * samples] = -np.eye(samples)
    eq[:, features + 2 * samples:] = np.eye(samples)
    a_dense = np.vstack([ineq, eq])
    b = np.concatenate([np.zeros(2 * samples), b0])
    return QpProblem(
        p=_upper_csc(p_dense),
        c=c,
        a=CscMatrix.from_dense(a_dense),
        b=b,
        m1=2 * samples,
        m2=samples,
    )


_GENERATORS = {
    "random_qp": random_qp,
    "equality_qp": equality_qp,
    "mpc_toy": mpc_toy,
    "lasso": lasso,
    "huber": huber,
}


def generate(kind: str, seed: int = 0, **params) -> QpProblem:
    """Dispatch to one of the instance families by name."""
    if kind not in _GENERATORS:
        raise ValueError(f"unknown instance kind {kind!r}; choose from {KINDS}")
    return _GENERATORS[kind](seed=seed, **params)


def default_suite() -> list[tuple[str, str, dict]]:
    """The 40-instance benchmark suite: (name, kind, params) triples."""
    suite = []
    rnd = np.random.default_rng(20240901)
    for i in range(20):
        n = int(rnd.integers(30, 90))
        m1 = int(rnd.integers(n // 2, n + n // 2))
        m2 = int(rnd.integers(0, n // 3))
        suite.append(
            (
                f"random_qp_{i:02d}",
                "random_qp",
                {
                    "n": n,
                    "m1": m1,
                    "m2": m2,
                    "density": 0.2,
                    "reg": 0.02,
                    "seed": 1000 + i,
                },
            )
        )
    for i in range(5):
        n = 40 + 25 * i
        suite.append(
            (
                f"equality_qp_{i:02d}",
                "equality_qp",
                {"n": n, "m2": n // 3, "density": 0.3, "reg": 0.05, "seed": 2000 + i},
            )
        )
    for i in range(5):
        suite.append(
            (
                f"mpc_toy_{i:02d}",
                "mpc_toy",
                {"horizon": 20 + 15 * i, "vmax": 0.6, "seed": 3000 + i},
            )
        )
    for i in range(5):
        suite.append(
            (
                f"lasso_{i:02d}",
                "lasso",
                {
                    "features": 20 + 10 * i,
                    "samples": 40 + 15 * i,
                    "lam": 1.0,
                    "seed": 4000 + i,
                },
            )
        )
    for i in range(5):
        suite.append(
            (
                f"huber_{i:02d}",
                "huber",
                {
                    "features": 15 + 8 * i,
                    "samples": 30 + 12 * i,
                    "threshold": 1.0,
                    "seed": 5000 + i,
                },
            )
        )
    return suite
