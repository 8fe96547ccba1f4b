"""Validated lower/upper bounds on the objective used to size the penalty.

``ell`` must not exceed min f over infeasible points and ``u`` must not be
below max f over feasible points. The bounds here come from (in order of
cost) the coefficient norms, the basic SDP relaxation, the relaxation
tightened with clique cuts, and the relaxation restricted to the null space
of [b, -A].
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .core import BqpPm1Instance
from .sdp import (
    CutBudget,
    Direction,
    SdpError,
    SdpProblem,
    SdpStatus,
    Sense,
    cutting_plane_loop,
    diagonal_problem,
    safe_bound,
    solve,
)

log = logging.getLogger(__name__)

RANK_TOL = 1e-10


class Scope(str, enum.Enum):
    OVER_COMPLEMENT = "OverComplement"
    OVER_FEASIBLE = "OverFeasible"
    OVER_HYPERCUBE = "OverHypercube"


class Provenance(str, enum.Enum):
    TRIVIAL = "Trivial"
    SHOR = "Shor"
    SHOR_PLUS_CUTS = "ShorPlusCuts"
    PROJECTED = "Projected"


@dataclass(frozen=True)
class BoundPair:
    ell: float
    u: float
    scope_ell: Scope = Scope.OVER_HYPERCUBE
    scope_u: Scope = Scope.OVER_HYPERCUBE
    provenance: Provenance = Provenance.TRIVIAL
    solve_stats: dict = field(default_factory=dict, compare=False)

    @property
    def degraded(self) -> bool:
        return bool(self.solve_stats.get("fallback"))


@dataclass(frozen=True)
class InfeasibleCertificate:
    """The constrained relaxation has no feasible point, hence neither has the BQP."""

    ray: np.ndarray
    reason: str = "projected SDP infeasible"


@dataclass(frozen=True)
class NullSpaceBasis:
    N: np.ndarray
    rank_M: int
    tol_used: float


def trivial_bounds(p: BqpPm1Instance) -> BoundPair:
    spread = float(np.abs(p.F).sum() + np.abs(p.c).sum())
    return BoundPair(p.alpha - spread, p.alpha + spread, provenance=Provenance.TRIVIAL)


def _fallback(p: BqpPm1Instance, what: str, exc) -> BoundPair:
    log.warning("%s failed (%s); using trivial bounds", what, exc)
    tb = trivial_bounds(p)
    return replace(tb, solve_stats={"fallback": what})


def _lifted_problem(p: BqpPm1Instance, sense: Sense) -> SdpProblem:
    return diagonal_problem(p.lifted_objective(), sense)


def shor_bounds(p: BqpPm1Instance, tol: float = 1e-8) -> BoundPair:
    """Min and max of <F', Y> over Y psd with unit diagonal (constraints ignored)."""
    t0 = time.perf_counter()
    try:
        lo = solve(_lifted_problem(p, Sense.MIN), tol)
        hi = solve(_lifted_problem(p, Sense.MAX), tol)
        ell = safe_bound(lo, Direction.LOWER)
        u = safe_bound(hi, Direction.UPPER)
    except SdpError as exc:
        return _fallback(p, "shor", exc)
    return BoundPair(
        ell, u, provenance=Provenance.SHOR,
        solve_stats={"time": time.perf_counter() - t0, "raw": (lo.value, hi.value)},
    )


def strengthened_bounds(p: BqpPm1Instance, budget: CutBudget = CutBudget(), shor: BoundPair = None) -> BoundPair:
    """Shor bounds tightened by triangle and 5-clique cuts on the lifted matrix.

    The result never falls behind the plain Shor bounds: both are valid, so
    the better of the two is kept on each side.
    """
    t0 = time.perf_counter()
    if shor is None:
        shor = shor_bounds(p, budget.tol)
    try:
        lo = cutting_plane_loop(_lifted_problem(p, Sense.MIN), budget)
        hi = cutting_plane_loop(_lifted_problem(p, Sense.MAX), budget)
        ell = safe_bound(lo, Direction.LOWER)
        u = safe_bound(hi, Direction.UPPER)
    except SdpError as exc:
        log.warning("strengthened bounds failed (%s); keeping %s bounds", exc, shor.provenance.value)
        return replace(shor, solve_stats={**shor.solve_stats, "fallback": "strengthened"})
    return BoundPair(
        max(ell, shor.ell),
        min(u, shor.u),
        provenance=Provenance.SHOR_PLUS_CUTS,
        solve_stats={
            "time": time.perf_counter() - t0,
            "rounds": (len(lo.bound_trace), len(hi.bound_trace)),
            "cuts": (len(lo.cuts), len(hi.cuts)),
        },
    )


def null_space_basis(A: np.ndarray, b: np.ndarray, tol: float = RANK_TOL) -> NullSpaceBasis:
    """Orthonormal basis of ns([b, -A]) from the SVD."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    M = np.hstack([np.asarray(b, dtype=float).reshape(-1, 1), -A])
    if M.size == 0 or not np.any(M):
        return NullSpaceBasis(np.eye(n + 1), 0, tol)
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    rank = int(np.sum(s > tol * s[0]))
    N = Vt[rank:].T.copy()
    for j in range(N.shape[1]):
        nz = np.flatnonzero(np.abs(N[:, j]) > 1e-12)
        if nz.size and N[nz[0], j] < 0:
            N[:, j] = -N[:, j]
    return NullSpaceBasis(N, rank, tol)


def projected_problem(p: BqpPm1Instance, basis: NullSpaceBasis = None) -> SdpProblem:
    """max <N'F'N, P> s.t. <N_j' N_j, P> = 1 (rows N_j of N), P psd."""
    if basis is None:
        basis = null_space_basis(p.A, p.b)
    N = basis.N
    C = N.T @ p.lifted_objective() @ N
    eq = np.einsum("ji,jk->jik", N, N)
    # trace(P) = trace(N P N') = sum of the n+1 unit diagonal entries
    return SdpProblem(C=(C + C.T) / 2, eq_A=eq, eq_b=np.ones(p.n + 1), sense=Sense.MAX,
                      trace_bound=float(p.n + 1))


def projected_upper_bound(
    p: BqpPm1Instance, tol: float = 1e-8, shor: BoundPair = None
) -> Union[BoundPair, InfeasibleCertificate]:
    """Upper bound u_Delta on max f over feasible points, or an infeasibility certificate."""
    t0 = time.perf_counter()
    basis = null_space_basis(p.A, p.b)
    if basis.N.shape[1] == 0:
        return InfeasibleCertificate(np.zeros(p.n + 1), "null space of [b, -A] is trivial")
    sol = solve(projected_problem(p, basis), tol)
    if sol.status == SdpStatus.INFEASIBLE:
        return InfeasibleCertificate(sol.certificate)
    stats = {"time": time.perf_counter() - t0, "null_dim": basis.N.shape[1], "rank_M": basis.rank_M}
    try:
        u = safe_bound(sol, Direction.UPPER)
    except SdpError as exc:
        log.warning("projected bound failed (%s); falling back", exc)
        fb = shor if shor is not None else shor_bounds(p, tol)
        return replace(fb, scope_u=Scope.OVER_HYPERCUBE, solve_stats={**stats, "fallback": "projected"})
    if shor is not None:
        u = min(u, shor.u)
    return BoundPair(-math.inf, u, scope_ell=Scope.OVER_COMPLEMENT, scope_u=Scope.OVER_FEASIBLE,
                     provenance=Provenance.PROJECTED, solve_stats=stats)


def hypercube_upper_bound(p: BqpPm1Instance, tol: float = 1e-8, shor: BoundPair = None) -> float:
    """Upper bound on max f over the whole hypercube (needed for least-violation)."""
    bp = shor if shor is not None else shor_bounds(p, tol)
    if bp.scope_u != Scope.OVER_HYPERCUBE:
        raise ValueError("bound pair does not cover the whole hypercube")
    return bp.u


def integral_bounds(bp: BoundPair) -> BoundPair:
    """Round bounds to integers; valid when f takes integer values on the hypercube."""
    ell = math.ceil(bp.ell - 1e-9) if math.isfinite(bp.ell) else bp.ell
    u = math.floor(bp.u + 1e-9) if math.isfinite(bp.u) else bp.u
    return replace(bp, ell=float(ell), u=float(u), solve_stats={**bp.solve_stats, "rounded": True})
