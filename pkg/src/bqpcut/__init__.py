"""Exact solution of binary quadratic programs with linear equality
constraints through a single penalized max-cut problem."""

from .bnb import (
    SolveReport,
    SolverConfig,
    SolveStatus,
    brute_force_maxcut,
    feasible_from_cut,
    gw_round_and_improve,
    root_relaxation,
    solve_maxcut,
)
from .bounds import (
    BoundPair,
    InfeasibleCertificate,
    null_space_basis,
    projected_upper_bound,
    shor_bounds,
    strengthened_bounds,
    trivial_bounds,
)
from .core import (
    Bqp01Instance,
    BqpPm1Instance,
    InstanceError,
    Solution,
    Status,
    brute_force_solve,
    objective_pm1,
    penalized_objective,
    residual,
    to_plus_minus_one,
)
from .formats import export_maxcut, read_instance, read_maxcut, write_instance
from .instances import RgiSpec, build_cbqp, build_k_cluster, gen_rgi
from .maxcut import MaxCutInstance, build_q, cut_to_assignment, to_maxcut
from .penalty import (
    PenaltyParameters,
    cli_params,
    feasible_update,
    gw_params,
    lasserre_params,
    least_violation_params,
    validate_params,
)
from .pipeline import (
    Outcome,
    PenaltyMode,
    PipelineConfig,
    least_violated,
    penalty_comparison,
    solve_bqp,
    unconstrained_fast_path,
)

__version__ = "0.1.0"
