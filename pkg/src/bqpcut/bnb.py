"""Exact max-cut: SDP-bounded branch-and-bound with hyperplane rounding.

Nodes fix vertices to the same side as vertex 0 (+1) or the opposite side
(-1). A node with free vertices F is the quadratic problem
max z' (T'CT) z over z in {-1,1}^(1+|F|), where column 0 of T carries vertex
0 together with all fixed vertices (signed) and the other columns carry the
free vertices. Cuts valid for a parent stay valid after multiplying by the
merge matrix, so children inherit the parent's cut pool.
"""

from __future__ import annotations

import enum
import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import residual
from .maxcut import Cut, MaxCutInstance, cut_to_assignment
from .sdp import (
    CutBudget,
    Direction,
    SdpError,
    SdpStatus,
    cutting_plane_loop,
    diagonal_problem,
    safe_bound,
    solve,
)

log = logging.getLogger(__name__)

BRUTE_FORCE_VERTEX_CAP = 26
ROOT_BUDGET = CutBudget(rounds=8, per_round=100, max_pool=300)
NODE_BUDGET = CutBudget(rounds=3, per_round=60, five_clique=False, max_pool=150)


class SolveStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    EARLY_INFEASIBLE = "EarlyInfeasible"
    TIME_LIMIT = "TimeLimit"


@dataclass(frozen=True)
class SolverConfig:
    time_limit: float = 600.0
    node_limit: int = 1_000_000
    bound_budget: CutBudget = ROOT_BUDGET
    node_budget: CutBudget = NODE_BUDGET
    gw_trials: int = 20
    seed: int = 0
    early_cutoff: Optional[float] = None
    deterministic: bool = True
    # subproblems with at most this many vertices are enumerated
    leaf_size: int = 16

    def __post_init__(self):
        if self.time_limit <= 0 or self.node_limit <= 0:
            raise ValueError("limits must be positive")


@dataclass
class SolveReport:
    best_cut: Cut
    z_lb: float
    z_ub: float
    status: SolveStatus
    nodes: int
    root_gap: float
    root_bound: float = math.nan
    elapsed: float = 0.0
    bound_log: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# oracle


def _enumerate_quadratic(C: np.ndarray, chunk: int = 1 << 15):
    """max z'Cz over z in {-1,1}^d with z_0 = 1 (first maximiser in index order)."""
    d = C.shape[0]
    total = 1 << (d - 1)
    shifts = np.arange(d - 2, -1, -1, dtype=np.int64)
    best, best_k = -math.inf, 0
    for start in range(0, total, chunk):
        k = np.arange(start, min(start + chunk, total), dtype=np.int64)
        Z = np.ones((len(k), d))
        if d > 1:
            Z[:, 1:] = 1 - 2 * ((k[:, None] >> shifts) & 1)
        vals = np.einsum("ij,ij->i", Z @ C, Z)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_k = float(vals[i]), start + i
    z = np.ones(d, dtype=np.int64)
    if d > 1:
        z[1:] = 1 - 2 * ((best_k >> np.arange(d - 2, -1, -1)) & 1)
    return best, z


def brute_force_maxcut(g: MaxCutInstance, cap: int = BRUTE_FORCE_VERTEX_CAP):
    if g.n_vertices > cap:
        raise ValueError(f"brute force limited to {cap} vertices")
    if g.n_vertices == 0:
        return 0.0, Cut(np.zeros(0, dtype=np.int64), 0.0)
    val, z = _enumerate_quadratic(g.C)
    return val, Cut(z, g.cut_value(z))


# ---------------------------------------------------------------------------
# bounding and rounding


def _gram(X: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh((X + X.T) / 2)
    return V * np.sqrt(np.clip(w, 0, None))


def _relax(C: np.ndarray, budget: CutBudget, cuts=(), target: Optional[float] = None):
    """Safe upper bound on max z'Cz, the Gram factor of the relaxation, the cut pool."""
    d = C.shape[0]
    try:
        sol = cutting_plane_loop(diagonal_problem(C), budget, initial_cuts=cuts, target=target)
        if sol.status in (SdpStatus.SOLVED, SdpStatus.MAX_ITER):
            return safe_bound(sol, Direction.UPPER), _gram(sol.X), sol.cuts, sol.X
        log.warning("node relaxation returned %s; trying plain relaxation", sol.status.value)
        sol = solve(diagonal_problem(C), budget.tol)
        return safe_bound(sol, Direction.UPPER), _gram(sol.X), [], sol.X
    except SdpError as exc:
        log.warning("relaxation failed (%s); using coefficient bound", exc)
        return float(np.abs(C).sum()), np.eye(d), [], np.eye(d)


def root_relaxation(g: MaxCutInstance, budget: CutBudget = ROOT_BUDGET):
    """Safe upper bound on the maximum cut and a Gram factor V (X = VV') for rounding."""
    if g.n_vertices == 0:
        return 0.0, np.zeros((0, 0))
    bound, V, _, _ = _relax(g.C, budget)
    return bound, V


def one_opt(C: np.ndarray, z: np.ndarray, trace: Optional[list] = None) -> np.ndarray:
    """Flip single entries while that increases z'Cz (best improvement first)."""
    z = np.asarray(z, dtype=float).copy()
    off = C - np.diag(np.diag(C))
    field_ = off @ z
    while True:
        gain = -4 * z * field_
        i = int(np.argmax(gain))
        if gain[i] <= 1e-12 * (1 + np.abs(C).max()):
            break
        z[i] = -z[i]
        field_ += 2 * z[i] * off[:, i]
        if trace is not None:
            trace.append(float(z @ C @ z))
    return z


def _round(V: np.ndarray, C: np.ndarray, trials: int, rng: np.random.Generator):
    d = C.shape[0]
    best_z, best_val = np.ones(d), -math.inf
    for _ in range(max(trials, 1)):
        r = rng.standard_normal(V.shape[1])
        z = np.where(V @ r < 0, -1.0, 1.0)
        z = one_opt(C, z)
        val = float(z @ C @ z)
        if val > best_val + 1e-12:
            best_z, best_val = z, val
    if best_z[0] < 0:
        best_z = -best_z
    return best_z, best_val


def gw_round_and_improve(gram: np.ndarray, g: MaxCutInstance, trials: int = 20, seed: int = 0) -> Cut:
    """Best of ``trials`` random hyperplane cuts of the Gram vectors, each polished by 1-opt."""
    rng = np.random.default_rng(seed)
    z, _ = _round(np.asarray(gram, dtype=float), g.C, trials, rng)
    return Cut.of(g, z)


# ---------------------------------------------------------------------------
# branch and bound


@dataclass
class _Node:
    signs: dict  # fixed vertex -> side relative to vertex 0
    parent_bound: float
    depth: int
    cuts: list  # cut vectors in the parent's reduced coordinates
    merge: Optional[np.ndarray]  # parent reduced coords -> own reduced coords


def _reduction(V: int, signs: dict):
    free = [v for v in range(1, V) if v not in signs]
    T = np.zeros((V, 1 + len(free)))
    T[0, 0] = 1.0
    for v, s in signs.items():
        T[v, 0] = s
    for k, v in enumerate(free):
        T[v, k + 1] = 1.0
    return free, T


def _merge_matrix(free_parent: list, vertex: int, sign: int) -> np.ndarray:
    """S with z_parent = S z_child after fixing ``vertex`` to ``sign``."""
    kp = 1 + len(free_parent)
    pos = 1 + free_parent.index(vertex)
    S = np.zeros((kp, kp - 1))
    S[0, 0] = 1.0
    S[pos, 0] = sign
    col = 1
    for r in range(1, kp):
        if r != pos:
            S[r, col] = 1.0
            col += 1
    return S


def solve_maxcut(g: MaxCutInstance, cfg: SolverConfig = SolverConfig()) -> SolveReport:
    """Maximum cut of ``g`` by best-first branch-and-bound.

    Stops early with EarlyInfeasible as soon as the global upper bound drops
    below ``cfg.early_cutoff``; nodes whose bound is below the cutoff are
    pruned since they cannot contain a cut reaching it.
    """
    t0 = time.perf_counter()
    Vn = g.n_vertices
    C = g.C
    integral = g.integral_weights
    cutoff = cfg.early_cutoff
    rng = np.random.default_rng(cfg.seed)
    if Vn <= 1:
        cut = Cut(np.ones(Vn, dtype=np.int64), 0.0)
        return SolveReport(cut, 0.0, 0.0, SolveStatus.OPTIMAL, 1, 0.0, 0.0, time.perf_counter() - t0)

    def closes(ub: float, lb: float) -> bool:
        if not math.isfinite(ub):
            return False
        return ub - lb <= (1e-9 if integral else 1e-6 * (1 + abs(ub)))

    def tighten(ub: float) -> float:
        # cut values are integers when the weights are
        return float(math.floor(ub + 1e-6)) if integral and math.isfinite(ub) else ub

    inc_x = np.ones(Vn)
    inc_val = float(inc_x @ C @ inc_x)
    pruned_ub = -math.inf  # best bound among nodes pruned by the cutoff
    counter = itertools.count()
    heap = [(-math.inf, next(counter), _Node({}, math.inf, 0, [], None))]
    nodes = 0
    root_bound = math.nan
    root_gap = math.nan
    bound_log = []
    status = SolveStatus.OPTIMAL

    def global_ub() -> float:
        open_ub = -heap[0][0] if heap else -math.inf
        return max(inc_val, open_ub, pruned_ub)

    while heap:
        if time.perf_counter() - t0 > cfg.time_limit or nodes >= cfg.node_limit:
            status = SolveStatus.TIME_LIMIT
            break
        ub = global_ub()
        if cutoff is not None and ub < cutoff:
            status = SolveStatus.EARLY_INFEASIBLE
            break
        if closes(ub, inc_val):
            break
        _, _, node = heapq.heappop(heap)
        if closes(node.parent_bound, inc_val) or (cutoff is not None and node.parent_bound < cutoff):
            if cutoff is not None and node.parent_bound < cutoff:
                pruned_ub = max(pruned_ub, node.parent_bound)
            continue
        nodes += 1
        free, T = _reduction(Vn, node.signs)
        Cr = T.T @ C @ T
        if len(free) + 1 <= cfg.leaf_size:
            val, z = _enumerate_quadratic(Cr)
            x = T @ z
            if val > inc_val:
                inc_x, inc_val = x, float(x @ C @ x)
            bound_log.append((node.depth, val))
            if nodes == 1:
                root_bound, root_gap = val, 0.0
            continue
        cuts = [node.merge.T @ c for c in node.cuts] if node.merge is not None else []
        budget = cfg.bound_budget if nodes == 1 else cfg.node_budget
        # a bound below this level prunes the node
        target = inc_val + (1 - 1e-5 if integral else 1e-6 * (1 + abs(inc_val)))
        if cutoff is not None:
            target = max(target, cutoff)
        bound, Vg, pool, X = _relax(Cr, budget, cuts, target)
        bound = tighten(min(bound, node.parent_bound))
        bound_log.append((node.depth, bound))
        z, _ = _round(Vg, Cr, cfg.gw_trials if nodes == 1 else max(1, cfg.gw_trials // 4), rng)
        x = one_opt(C, T @ z)
        val = float(x @ C @ x)
        if val > inc_val + 1e-12:
            inc_x, inc_val = x, val
        if nodes == 1:
            root_bound, root_gap = bound, bound - inc_val
        if closes(bound, inc_val):
            continue
        if cutoff is not None and bound < cutoff:
            pruned_ub = max(pruned_ub, bound)
            continue
        # branch on the free vertex whose relation to vertex 0 is least decided
        amb = np.abs(X[0, 1:])
        k = int(np.argmin(amb))
        vertex = free[k]
        for s in (1, -1):
            child = _Node({**node.signs, vertex: s}, bound, node.depth + 1, pool, _merge_matrix(free, vertex, s))
            heapq.heappush(heap, (-bound, next(counter), child))

    z_ub = global_ub()
    if status == SolveStatus.OPTIMAL and cutoff is not None and z_ub < cutoff:
        status = SolveStatus.EARLY_INFEASIBLE
    best = Cut.of(g, inc_x if inc_x[0] > 0 else -inc_x)
    return SolveReport(best, best.value, max(z_ub, best.value), status, nodes, root_gap, root_bound,
                       time.perf_counter() - t0, bound_log)


class ParameterInvalidity(RuntimeError):
    """A cut above the feasibility threshold mapped to an infeasible point."""


def feasible_from_cut(cut: Cut, g: MaxCutInstance, rho: float, instance=None) -> Optional[np.ndarray]:
    """The +-1 assignment of ``cut`` when its value reaches e'Qe - rho, else None.

    A cut at or above that level has h <= rho, so it must be feasible when
    rho was valid. Given ``instance`` (the +-1 problem behind ``g``) this is
    checked and a violation raises ParameterInvalidity.
    """
    tol = 1e-9 * (1 + abs(g.constant))
    if cut.value < g.constant - rho - tol:
        return None
    x = cut_to_assignment(cut)
    if instance is not None and residual(instance, x) != 0:
        raise ParameterInvalidity(
            f"cut value {cut.value} reaches the threshold but the assignment violates Ax = b"
        )
    return x
