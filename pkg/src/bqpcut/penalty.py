"""Threshold/penalty pairs (rho, sigma) that make the penalized problem exact."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import BoundPair, Scope
from .core import BqpPm1Instance, enumerate_instance, hypercube_chunks

VALIDATE_CAP = 20


class Mode(str, enum.Enum):
    LASSERRE = "Lasserre"
    CLI = "Cli"
    GW = "Gw"
    FEASIBLE_UPDATE = "FeasibleUpdate"
    LEAST_VIOLATION = "LeastViolation"


@dataclass(frozen=True)
class PenaltyParameters:
    sigma: float
    epsilon: float
    mode: Mode
    rho: Optional[float] = None
    source_bounds: Optional[BoundPair] = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


def default_epsilon(integral: bool, ell: float = 0.0, u: float = 0.0) -> float:
    if integral:
        return 1.0
    return 1e-4 * (1 + abs(u - ell))


def lasserre_params(bp: BoundPair) -> PenaltyParameters:
    r = max(abs(bp.ell), abs(bp.u))
    return PenaltyParameters(sigma=2 * r + 1, epsilon=1.0, mode=Mode.LASSERRE, rho=r, source_bounds=bp)


def gw_params(bp: BoundPair, epsilon: float, mode: Mode = Mode.GW) -> PenaltyParameters:
    """rho = u, sigma = u - ell + epsilon."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return PenaltyParameters(sigma=bp.u - bp.ell + epsilon, epsilon=epsilon, mode=mode, rho=bp.u, source_bounds=bp)


def cli_params(bp: BoundPair, epsilon: float) -> PenaltyParameters:
    """Same formula as ``gw_params`` fed with the cut-strengthened pair (ell~, u~)."""
    return gw_params(bp, epsilon, Mode.CLI)


def feasible_update(ell: float, f_feasible: float, epsilon: float) -> PenaltyParameters:
    """sigma' = f(x') - ell + epsilon for a known feasible x'.

    No threshold is returned: with a feasible point in hand there is nothing
    left to certify. The caller is responsible for having checked A x' = b.
    When f(x') lies below ell every positive sigma works, and epsilon is used.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    sigma = max(f_feasible - ell + epsilon, epsilon)
    return PenaltyParameters(sigma=sigma, epsilon=epsilon, mode=Mode.FEASIBLE_UPDATE)


def least_violation_params(ell: float, u_hypercube: float, epsilon: float,
                           scope_u: Scope = Scope.OVER_HYPERCUBE) -> PenaltyParameters:
    """sigma = u - ell + epsilon with u bounding f over the whole hypercube.

    The minimizer of the penalized objective then has the smallest
    ||Ax - b|| over all of {-1,1}^n.
    """
    if scope_u != Scope.OVER_HYPERCUBE:
        raise ValueError("least-violation needs an upper bound valid over the whole hypercube")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return PenaltyParameters(sigma=u_hypercube - ell + epsilon, epsilon=epsilon, mode=Mode.LEAST_VIOLATION)


def validate_params(p: BqpPm1Instance, pp: PenaltyParameters, cap: int = VALIDATE_CAP) -> bool:
    """Check by enumeration that rho separates h over feasible and infeasible points."""
    if p.n > cap:
        raise ValueError(f"validation enumerates the hypercube; n <= {cap} required")
    rho = pp.rho
    if rho is None:
        # modes without a threshold: the relevant threshold is f over a feasible point,
        # so only exactness of the minimizer can be checked
        e = enumerate_instance(p)
        if e.x_star is None:
            return True
        rho = e.f_star
        return _min_h_over(p, pp.sigma, infeasible=True) > rho
    for _, X in hypercube_chunks(p.n):
        f = np.einsum("ij,jk,ik->i", X, p.F, X) + X @ p.c + p.alpha
        R = X @ p.A.T - p.b
        res = np.round(np.einsum("ij,ij->i", R, R), 9)
        h = f + pp.sigma * res
        feas = res == 0
        if np.any(h[feas] > rho) or np.any(h[~feas] <= rho):
            return False
    return True


def _min_h_over(p: BqpPm1Instance, sigma: float, infeasible: bool) -> float:
    best = math.inf
    for _, X in hypercube_chunks(p.n):
        f = np.einsum("ij,jk,ik->i", X, p.F, X) + X @ p.c + p.alpha
        R = X @ p.A.T - p.b
        res = np.round(np.einsum("ij,ij->i", R, R), 9)
        mask = res > 0 if infeasible else res == 0
        if mask.any():
            best = min(best, float((f + sigma * res)[mask].min()))
    return best
