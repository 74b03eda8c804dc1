"""Safeguarded outer loop scheduling plain steps, acceleration, termination.

Every pass applies the baseline operator at least once.  With Krylov
acceleration the operator application doubles as the Arnoldi product: the
working vector rides the shadow channel of the paired kernels, so basis
construction costs no extra operator applications.  Candidate iterates from
either accelerator must pass a residual-contraction check in the operator's
M-seminorm before being adopted; rejected candidates fall back to the plain
step that was already computed for the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from . import anderson_accel as aa
from . import krylov_accel as kr
from .admm_operator import AdmmOperator
from .anderson_accel import AndersonConfig
from .krylov_accel import KrylovConfig
from .qp_model import (
    Iterate,
    QpProblem,
    ResidualTriple,
    TerminationConfig,
    is_solved,
    residuals,
)

MONOTONICITY_SLACK = 1e-12


@dataclass
class SafeguardParams:
    """Residual-contraction factor and optional step-size bound."""

    eta: float = 1.0
    step_bound_c: float | None = None

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("eta must lie in (0, 1]")
        if self.step_bound_c is not None and self.step_bound_c <= 0:
            raise ValueError("step_bound_c must be positive when enabled")


@dataclass
class ProposalEvent:
    """Diagnostic record handed to the optional on_proposal callback."""

    iteration: int
    kind: str
    u: np.ndarray
    candidate: Iterate
    t_candidate: Iterate
    accepted: bool
    rhs_norm: float
    u_kr: np.ndarray | None = None


@dataclass
class SolveReport:
    status: Literal["solved", "max_iters"]
    iterations: int
    t_applications: int
    accepted: int
    rejected: int
    residual_trace: list[tuple[int, ResidualTriple]]
    final: Iterate
    monotonicity_violations: int = 0
    wall_time: float = 0.0


def safeguard_check(
    op: AdmmOperator,
    u_k: Iterate,
    u_hat: Iterate,
    params: SafeguardParams,
    rhs_norm: float | None = None,
) -> tuple[bool, Iterate]:
    """Evaluate the acceptance conditions for a candidate iterate.

    Returns the decision together with T(u_hat), which the caller reuses as
    the next iterate when the candidate is accepted.  ``rhs_norm`` is the
    M-norm of the current fixed-point residual; if omitted it is computed
    here at the price of one extra operator application.
    """
    if rhs_norm is None:
        t_u_k, _ = op.apply_t(u_k)
        rhs_norm = op.m_norm(t_u_k.flat() - u_k.flat())
    t_u_hat, _ = op.apply_t(u_hat)
    lhs = op.m_norm(t_u_hat.flat() - u_hat.flat())
    accept = lhs <= params.eta * rhs_norm
    if accept and params.step_bound_c is not None:
        step = op.m_norm(u_hat.flat() - u_k.flat())
        accept = step <= params.step_bound_c * rhs_norm
    return accept, t_u_hat


def run(
    prob: QpProblem,
    accel: KrylovConfig | AndersonConfig | None = None,
    rho: float = 0.1,
    term: TerminationConfig | None = None,
    sg: SafeguardParams | None = None,
    on_proposal: Callable[[ProposalEvent], None] | None = None,
) -> SolveReport:
    """Solve a QP from a cold start, returning the full run record."""
    term = term if term is not None else TerminationConfig()
    sg = sg if sg is not None else SafeguardParams()
    op = AdmmOperator.build(prob, rho)
    n = prob.n
    u = np.zeros(prob.dim)

    t_apps = 0
    accepted = 0
    rejected = 0
    violations = 0
    pending_bound: float | None = None
    trace: list[tuple[int, ResidualTriple]] = []
    status: Literal["solved", "max_iters"] = "max_iters"

    kr_cfg = accel if isinstance(accel, KrylovConfig) else None
    aa_cfg = accel if isinstance(accel, AndersonConfig) else None
    kr_state = kr.ArnoldiState(prob.dim, kr_cfg.memory, kr_cfg.mode) if kr_cfg else None
    aa_state = aa.AndersonState(aa_cfg.memory) if aa_cfg else None
    aa_pending: np.ndarray | None = None
    kr_dormant = False

    def apply_t_flat(u_flat: np.ndarray):
        nonlocal t_apps
        out, js = op.apply_t(Iterate.from_flat(u_flat, n))
        t_apps += 1
        return out.flat(), js

    def note_residual(r_flat: np.ndarray) -> None:
        # settles the contraction bound owed by the last accepted proposal
        nonlocal pending_bound, violations
        if pending_bound is not None:
            if op.m_norm(r_flat) > pending_bound + MONOTONICITY_SLACK:
                violations += 1
            pending_bound = None

    def evaluate_candidate(kind, k, cand_it, rhs_norm, tu, u_kr=None):
        nonlocal t_apps, accepted, rejected, pending_bound
        accept, t_cand = safeguard_check(
            op, Iterate.from_flat(u, n), cand_it, sg, rhs_norm=rhs_norm
        )
        t_apps += 1
        if on_proposal is not None:
            on_proposal(
                ProposalEvent(
                    iteration=k,
                    kind=kind,
                    u=u.copy(),
                    candidate=cand_it,
                    t_candidate=t_cand,
                    accepted=accept,
                    rhs_norm=rhs_norm,
                    u_kr=u_kr,
                )
            )
        if accept:
            accepted += 1
            pending_bound = sg.eta * rhs_norm
            return t_cand.flat()
        rejected += 1
        return tu

    k = 0
    while True:
        if k % term.check_every == 0 or k >= term.max_iters:
            res = residuals(prob, Iterate.from_flat(u, n))
            trace.append((k, res))
            if is_solved(res, term.eps):
                status = "solved"
                break
        if k >= term.max_iters:
            status = "max_iters"
            break

        if kr_state is not None and not kr_dormant:
            if kr_state.j in kr_cfg.tries and kr_state.hcols >= 1:
                tu, _ = apply_t_flat(u)
                r_k = tu - u
                note_residual(r_k)
                rhs_norm = op.m_norm(r_k)
                try:
                    cand = kr.propose(kr_state, op, Iterate.from_flat(u, n), r_k)
                    t_apps += 1
                except kr.SingularTriangle:
                    cand = None
                if cand is None:
                    u = tu
                else:
                    u = evaluate_candidate(
                        "krylov", k, cand, rhs_norm, tu, u_kr=kr_state.last_u_kr
                    )
                if kr_state.j > kr_cfg.memory:
                    kr.restart(kr_state)
                else:
                    kr_state.j += 1
            elif kr_state.j == 1:
                unew, _ = apply_t_flat(u)
                note_residual(unew - u)
                try:
                    kr.init_basis(kr_state, unew - u)
                except kr.Breakdown:
                    kr_dormant = True  # numerically at a fixed point
                u = unew
            elif kr_state.breakdown:
                unew, _ = apply_t_flat(u)
                note_residual(unew - u)
                kr_state.j += 1
                u = unew
            else:
                q_prev = kr_state.q[:, kr_state.ncols - 1]
                out, _, gq = op.apply_t_paired(Iterate.from_flat(u, n), q_prev)
                t_apps += 1
                unew = out.flat()
                note_residual(unew - u)
                kr.arnoldi_absorb(kr_state, gq)
                u = unew
        elif aa_state is not None:
            tu, _ = apply_t_flat(u)
            r_k = tu - u
            note_residual(r_k)
            proposal = None
            if k % aa_cfg.interval == 0:
                if aa_pending is not None:
                    aa.update(aa_state, aa_pending, u)
                    try:
                        proposal = aa.propose(aa_state)
                    except (aa.NotReady, aa.RankDeficient):
                        proposal = None
                aa_pending = u.copy()
            if proposal is None:
                u = tu
            else:
                u = evaluate_candidate(
                    "anderson", k, Iterate.from_flat(proposal, n), op.m_norm(r_k), tu
                )
        else:
            unew, _ = apply_t_flat(u)
            note_residual(unew - u)
            u = unew

        k += 1

    return SolveReport(
        status=status,
        iterations=k,
        t_applications=t_apps,
        accepted=accepted,
        rejected=rejected,
        residual_trace=trace,
        final=Iterate.from_flat(u, n),
        monotonicity_violations=violations,
    )
