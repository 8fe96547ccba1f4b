"""End-to-end exact penalty solver: BQP with equalities -> one max-cut problem.

The flow for the default ``auto`` mode:

1. bounds: ell~ (Shor + cuts) below f over infeasible points;
2. a provisional max-cut (sigma from the coefficient-norm bounds) is relaxed
   and rounded once; if the rounded assignment x' is feasible, sigma is reset
   to f(x') - ell~ + eps and the penalized problem is solved outright;
3. otherwise u_Delta (projected relaxation) either certifies infeasibility,
   or, when u_Delta < ell~, shows the constraints can be dropped, or gives
   rho = u_Delta, sigma = u_Delta - ell~ + eps for a solve with early cutoff.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .bnb import (
    ParameterInvalidity,
    SolveReport,
    SolverConfig,
    SolveStatus,
    gw_round_and_improve,
    root_relaxation,
    solve_maxcut,
)
from .bounds import (
    BoundPair,
    InfeasibleCertificate,
    Provenance,
    Scope,
    hypercube_upper_bound,
    integral_bounds,
    projected_upper_bound,
    shor_bounds,
    strengthened_bounds,
    trivial_bounds,
)
from .core import (
    BRUTE_FORCE_CAP,
    Bqp01Instance,
    BqpPm1Instance,
    Solution,
    Status,
    brute_force_solve,
    objective_pm1,
    residual,
    to_plus_minus_one,
    to_zero_one,
)
from .maxcut import MaxCutInstance, build_q, cut_to_assignment, to_maxcut
from .penalty import (
    PenaltyParameters,
    cli_params,
    default_epsilon,
    feasible_update,
    gw_params,
    lasserre_params,
    least_violation_params,
)
from .sdp import CutBudget

log = logging.getLogger(__name__)

PIPELINE_BOUND_BUDGET = CutBudget(rounds=6, per_round=100)
# the provisional relaxation only feeds one rounding pass
HEURISTIC_BUDGET = CutBudget(rounds=2, per_round=50, five_clique=False)


class PenaltyMode(str, enum.Enum):
    LAS = "las"
    CLI = "cli"
    GW = "gw"
    AUTO = "auto"


class CrosscheckMismatch(AssertionError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    penalty_mode: PenaltyMode = PenaltyMode.AUTO
    # None picks 1 for integer data, a small relative value otherwise
    epsilon: Optional[float] = None
    solver: SolverConfig = SolverConfig()
    bound_budget: CutBudget = PIPELINE_BOUND_BUDGET
    enable_feasible_update: bool = True
    least_violation: bool = False
    brute_force_crosscheck: bool = False
    early_cutoff: bool = True

    def __post_init__(self):
        object.__setattr__(self, "penalty_mode", PenaltyMode(self.penalty_mode))
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")


@dataclass
class Outcome:
    solution: Solution
    parameters_used: Optional[PenaltyParameters] = None
    bounds_used: Optional[BoundPair] = None
    maxcut_report: Optional[SolveReport] = None
    timeline: dict = field(default_factory=dict)

    def signature(self) -> tuple:
        """Everything except wall-clock data; equal for equal runs."""
        s = self.solution
        pp = self.parameters_used
        bp = self.bounds_used
        r = self.maxcut_report
        return (
            s.status.value,
            None if s.x01 is None else tuple(int(v) for v in s.x01),
            s.objective,
            s.residual,
            None if pp is None else (pp.mode.value, pp.sigma, pp.rho, pp.epsilon),
            None if bp is None else (bp.ell, bp.u, bp.provenance.value),
            None if r is None else (r.status.value, r.z_lb, r.z_ub, r.nodes, tuple(int(v) for v in r.best_cut.xbar)),
            tuple(self.timeline.get("events", ())),
        )

    def __eq__(self, other):
        if not isinstance(other, Outcome):
            return NotImplemented
        return self.signature() == other.signature()


class _Timeline:
    def __init__(self):
        self.data = {"stages": {}, "events": []}
        self._t = time.perf_counter()

    def stage(self, name: str):
        now = time.perf_counter()
        self.data["stages"][name] = self.data["stages"].get(name, 0.0) + now - self._t
        self._t = now

    def event(self, what: str):
        self.data["events"].append(what)


def _epsilon(cfg: PipelineConfig, integral: bool, bp: BoundPair) -> float:
    if cfg.epsilon is not None:
        return cfg.epsilon
    return default_epsilon(integral, bp.ell, bp.u)


def _round_bounds(bp: BoundPair, integral: bool) -> BoundPair:
    return integral_bounds(bp) if integral else bp


def _without_constraints(p: BqpPm1Instance) -> BqpPm1Instance:
    return BqpPm1Instance(p.F, p.c, np.zeros((0, p.n)), np.zeros(0), p.alpha, p.integral_objective)


def _solve_penalized(p: BqpPm1Instance, sigma: float, rho: Optional[float], cfg: PipelineConfig):
    q = build_q(p, sigma)
    g = to_maxcut(q, rho)
    scfg = cfg.solver
    if rho is not None and cfg.early_cutoff:
        scfg = replace(scfg, early_cutoff=g.rho_cutoff)
    else:
        scfg = replace(scfg, early_cutoff=None)
    report = solve_maxcut(g, scfg)
    return g, report


def _optimal(p: BqpPm1Instance, x: np.ndarray, **stats) -> Solution:
    return Solution(Status.OPTIMAL, x01=to_zero_one(x), objective=objective_pm1(p, x), residual=0, stats=stats)


def _time_limited(p: BqpPm1Instance, report: SolveReport) -> Solution:
    x = cut_to_assignment(report.best_cut)
    res = residual(p, x)
    if res == 0:
        return Solution(Status.TIME_LIMIT, x01=to_zero_one(x), objective=objective_pm1(p, x), residual=0,
                        stats={"z_ub": report.z_ub})
    return Solution(Status.TIME_LIMIT, stats={"z_ub": report.z_ub})


def _interpret(p: BqpPm1Instance, g: MaxCutInstance, report: SolveReport, pp: PenaltyParameters,
               tl: _Timeline) -> Solution:
    """Map a finished max-cut solve back to the BQP."""
    if report.status == SolveStatus.TIME_LIMIT:
        tl.event("time_limit")
        return _time_limited(p, report)
    if report.status == SolveStatus.EARLY_INFEASIBLE:
        tl.event("early_cutoff")
        return Solution(Status.INFEASIBLE, stats={"z_ub": report.z_ub, "cutoff": g.rho_cutoff})
    h_star = g.constant - report.z_lb
    x = cut_to_assignment(report.best_cut)
    res = residual(p, x)
    if pp.rho is not None:
        above = h_star > pp.rho + 1e-9 * (1 + abs(pp.rho))
        if above:
            tl.event("h_star_above_rho")
        if above != (res != 0):
            raise ParameterInvalidity(f"h* = {h_star} vs rho = {pp.rho} disagrees with residual {res}")
        if above:
            return Solution(Status.INFEASIBLE, stats={"h_star": h_star, "rho": pp.rho})
    elif res != 0:
        raise ParameterInvalidity(f"penalized minimizer is infeasible (residual {res}) under {pp.mode.value}")
    return _optimal(p, x, h_star=h_star)


def _solve_unconstrained(p: BqpPm1Instance, cfg: PipelineConfig, tl: _Timeline, bounds=None) -> Outcome:
    q = build_q(_without_constraints(p), 0.0)
    g = to_maxcut(q)
    report = solve_maxcut(g, replace(cfg.solver, early_cutoff=None))
    tl.stage("maxcut")
    if report.status == SolveStatus.TIME_LIMIT:
        return Outcome(_time_limited(p, report), None, bounds, report, tl.data)
    x = cut_to_assignment(report.best_cut)
    if p.m == 0:
        return Outcome(_optimal(p, x), None, bounds, report, tl.data)
    if residual(p, x) != 0:
        # every feasible point scores below every infeasible one, so an
        # infeasible hypercube minimizer means there is no feasible point
        tl.event("fast_path_residual")
        return Outcome(Solution(Status.INFEASIBLE, stats={"fast_path": True}), None, bounds, report, tl.data)
    return Outcome(_optimal(p, x, fast_path=True), None, bounds, report, tl.data)


def unconstrained_fast_path(bp_u, bp_l: BoundPair) -> bool:
    """True when u_Delta < ell~, so the constraints can be ignored.

    ``bp_u`` may be None for a problem without constraints (always true).
    """
    if bp_u is None:
        return True
    if isinstance(bp_u, InfeasibleCertificate):
        return False
    return bp_u.u < bp_l.ell


def _crosscheck(p: BqpPm1Instance, out: Outcome, cfg: PipelineConfig, tl: _Timeline) -> None:
    if not cfg.brute_force_crosscheck:
        return
    if p.n > BRUTE_FORCE_CAP:
        tl.event("crosscheck_skipped")
        return
    ref = brute_force_solve(p)
    sol = out.solution
    if sol.status == Status.TIME_LIMIT:
        return
    if sol.status == Status.LEAST_VIOLATED:
        ok = ref.status == Status.INFEASIBLE
    else:
        ok = sol.status == ref.status and (
            ref.objective is None or abs(sol.objective - ref.objective) <= 1e-8 * (1 + abs(ref.objective))
        )
    tl.event("crosscheck_ok" if ok else "crosscheck_failed")
    if not ok:
        raise CrosscheckMismatch(
            f"pipeline gave {sol.status.value} {sol.objective}, enumeration gave {ref.status.value} {ref.objective}"
        )


def solve_bqp(p01: Bqp01Instance, cfg: PipelineConfig = PipelineConfig()) -> Outcome:
    """Solve a 0/1 quadratic program with linear equalities exactly."""
    if cfg.least_violation:
        return least_violated(p01, cfg)
    p = to_plus_minus_one(p01)
    tl = _Timeline()
    if p.m == 0:
        out = _solve_unconstrained(p, cfg, tl)
    else:
        out = _solve_constrained(p, cfg, tl)
    _crosscheck(p, out, cfg, tl)
    return out


def _solve_constrained(p: BqpPm1Instance, cfg: PipelineConfig, tl: _Timeline) -> Outcome:
    integral = p.integral_objective
    mode = cfg.penalty_mode
    shor = _round_bounds(shor_bounds(p, cfg.bound_budget.tol), integral)
    tl.stage("shor")
    if mode == PenaltyMode.LAS:
        pp = lasserre_params(shor)
        g, report = _solve_penalized(p, pp.sigma, pp.rho, cfg)
        tl.stage("maxcut")
        return Outcome(_interpret(p, g, report, pp, tl), pp, shor, report, tl.data)

    strong = _round_bounds(strengthened_bounds(p, cfg.bound_budget, shor), integral)
    tl.stage("strengthened")
    if mode == PenaltyMode.CLI:
        pp = cli_params(strong, _epsilon(cfg, integral, strong))
        g, report = _solve_penalized(p, pp.sigma, pp.rho, cfg)
        tl.stage("maxcut")
        return Outcome(_interpret(p, g, report, pp, tl), pp, strong, report, tl.data)

    if mode == PenaltyMode.AUTO and cfg.enable_feasible_update:
        # one rounding pass on a provisional penalized problem
        triv = _round_bounds(trivial_bounds(p), integral)
        pp0 = gw_params(triv, _epsilon(cfg, integral, triv))
        g0 = to_maxcut(build_q(p, pp0.sigma), pp0.rho)
        _, gram = root_relaxation(g0, HEURISTIC_BUDGET)
        cut = gw_round_and_improve(gram, g0, cfg.solver.gw_trials, cfg.solver.seed)
        x0 = cut_to_assignment(cut)
        tl.stage("heuristic")
        if residual(p, x0) == 0:
            tl.event("feasible_update")
            pp = feasible_update(strong.ell, objective_pm1(p, x0), _epsilon(cfg, integral, strong))
            pp = replace(pp, source_bounds=strong)
            g, report = _solve_penalized(p, pp.sigma, None, cfg)
            tl.stage("maxcut")
            return Outcome(_interpret(p, g, report, pp, tl), pp, strong, report, tl.data)

    proj = projected_upper_bound(p, cfg.bound_budget.tol, shor)
    tl.stage("projected")
    if isinstance(proj, InfeasibleCertificate):
        tl.event("certificate")
        sol = Solution(Status.INFEASIBLE, stats={"certificate": proj.reason})
        return Outcome(sol, None, strong, None, tl.data)
    proj = _round_bounds(proj, integral)
    # u~ is valid over the feasible set too; keep the smaller of the two
    bp = BoundPair(strong.ell, min(proj.u, strong.u), scope_ell=strong.scope_ell, scope_u=proj.scope_u,
                   provenance=Provenance.PROJECTED, solve_stats={"strengthened": strong, "projected": proj})
    if unconstrained_fast_path(bp, strong):
        tl.event("fast_path")
        return _solve_unconstrained(p, cfg, tl, bp)
    pp = gw_params(bp, _epsilon(cfg, integral, bp))
    g, report = _solve_penalized(p, pp.sigma, pp.rho, cfg)
    tl.stage("maxcut")
    return Outcome(_interpret(p, g, report, pp, tl), pp, bp, report, tl.data)


def least_violated(p01: Bqp01Instance, cfg: PipelineConfig = PipelineConfig()) -> Outcome:
    """Minimizer of f + sigma ||Ax - b||^2 with sigma large enough that its
    residual is the smallest over the whole hypercube.

    Feasible instances come back Optimal; infeasible ones LeastViolated with
    the point of least violation (ties broken by objective).
    """
    p = to_plus_minus_one(p01)
    tl = _Timeline()
    if p.m == 0:
        return _solve_unconstrained(p, cfg, tl)
    integral = p.integral_objective
    shor = _round_bounds(shor_bounds(p, cfg.bound_budget.tol), integral)
    u_hyp = hypercube_upper_bound(p, cfg.bound_budget.tol, shor)
    if integral:
        u_hyp = math.floor(u_hyp + 1e-9)
    tl.stage("bounds")
    pp = least_violation_params(shor.ell, u_hyp, _epsilon(cfg, integral, shor), Scope.OVER_HYPERCUBE)
    pp = replace(pp, source_bounds=shor)
    g, report = _solve_penalized(p, pp.sigma, None, cfg)
    tl.stage("maxcut")
    if report.status == SolveStatus.TIME_LIMIT:
        return Outcome(_time_limited(p, report), pp, shor, report, tl.data)
    x = cut_to_assignment(report.best_cut)
    res = residual(p, x)
    if res == 0:
        sol = _optimal(p, x)
    else:
        sol = Solution(Status.LEAST_VIOLATED, x01=to_zero_one(x), objective=objective_pm1(p, x), residual=res)
    out = Outcome(sol, pp, shor, report, tl.data)
    _crosscheck(p, out, cfg, tl)
    return out


@dataclass(frozen=True)
class PenaltyComparison:
    """Penalty parameters of each construction, on bounds computed once."""

    las: PenaltyParameters
    cli: PenaltyParameters
    gw: Optional[PenaltyParameters]  # None when the projected bound certifies infeasibility
    shor: BoundPair
    strengthened: BoundPair
    projected: Optional[BoundPair]

    @property
    def ratio_cli(self) -> float:
        return self.cli.sigma / self.las.sigma

    @property
    def ratio_gw(self) -> Optional[float]:
        return None if self.gw is None else self.gw.sigma / self.las.sigma


def penalty_comparison(p01, budget: CutBudget = PIPELINE_BOUND_BUDGET,
                       epsilon: Optional[float] = None) -> PenaltyComparison:
    """Lasserre (Shor bounds), CLI (cut bounds) and GW (ell~, u_Delta) parameters.

    u_Delta is capped at u~ here so that all three share the same
    information; both are valid upper bounds over the feasible set.
    """
    p = to_plus_minus_one(p01) if isinstance(p01, Bqp01Instance) else p01
    integral = p.integral_objective
    shor = _round_bounds(shor_bounds(p, budget.tol), integral)
    strong = _round_bounds(strengthened_bounds(p, budget, shor), integral)
    eps = epsilon if epsilon is not None else default_epsilon(integral, strong.ell, strong.u)
    las = lasserre_params(shor)
    cli = cli_params(strong, eps)
    proj = projected_upper_bound(p, budget.tol, shor)
    if isinstance(proj, InfeasibleCertificate):
        return PenaltyComparison(las, cli, None, shor, strong, None)
    proj = _round_bounds(proj, integral)
    u = min(proj.u, strong.u)
    # when u < ell~ the pipeline drops the constraints instead; clamping keeps
    # sigma positive for the comparison
    bp = BoundPair(strong.ell, max(u, strong.ell), scope_u=Scope.OVER_FEASIBLE, provenance=Provenance.PROJECTED)
    return PenaltyComparison(las, cli, gw_params(bp, eps), shor, strong, proj)
