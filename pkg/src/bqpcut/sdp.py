"""Dense semidefinite programming with safe bounds and clique-cut separation.

Every problem handled here has the form

    max/min <C, X>  s.t.  <A_i, X> = b_i,  <B_j, X> >= g_j,  X psd

The numerical work is delegated to cvxopt's primal-dual interior point
method (Nesterov-Todd scaling). What the rest of the package relies on is
``safe_bound``: a dual objective corrected by the most negative eigenvalue
of the dual slack, which stays a valid bound even for an inexact solve,
provided a bound on trace(X) over the feasible set is known.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import scipy.linalg
from cvxopt import matrix, solvers, spmatrix

log = logging.getLogger(__name__)

DIM_CAP = 400


class Sense(str, enum.Enum):
    MIN = "Min"
    MAX = "Max"


class SdpStatus(str, enum.Enum):
    SOLVED = "Solved"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITER = "MaxIter"
    NUMERICAL = "NumericalFailure"


class Direction(str, enum.Enum):
    LOWER = "Lower"
    UPPER = "Upper"


class SdpError(RuntimeError):
    pass


@dataclass
class SdpProblem:
    """An SDP in matrix form.

    ``eq_A`` has shape (k, d, d) and ``cut_B`` shape (p, d, d); the cuts read
    <B_j, X> >= g_j. ``trace_bound`` is an a-priori bound on trace(X) over
    the feasible set; without it safe bounds fall back to a plain shift.
    """

    C: np.ndarray
    eq_A: np.ndarray
    eq_b: np.ndarray
    cut_B: Optional[np.ndarray] = None
    cut_g: Optional[np.ndarray] = None
    sense: Sense = Sense.MAX
    trace_bound: Optional[float] = None

    def __post_init__(self):
        d = self.C.shape[0]
        self.C = np.asarray(self.C, dtype=float)
        self.eq_A = np.asarray(self.eq_A, dtype=float).reshape(-1, d, d)
        self.eq_b = np.asarray(self.eq_b, dtype=float).reshape(-1)
        if self.cut_B is None:
            self.cut_B = np.zeros((0, d, d))
            self.cut_g = np.zeros(0)
        self.cut_B = np.asarray(self.cut_B, dtype=float).reshape(-1, d, d)
        self.cut_g = np.asarray(self.cut_g, dtype=float).reshape(-1)
        mats = [self.C[None], self.eq_A, self.cut_B]
        for M in mats:
            if M.size and np.max(np.abs(M - M.transpose(0, 2, 1))) > 1e-9 * (1 + np.abs(M).max()):
                raise ValueError("SDP data matrices must be symmetric")

    @property
    def dim(self) -> int:
        return self.C.shape[0]

    def with_cuts(self, vectors: Sequence[np.ndarray]) -> "SdpProblem":
        """Copy of the problem with additional clique cuts b'Xb >= 1."""
        if not len(vectors):
            return self
        V = np.asarray(vectors, dtype=float)
        B = np.einsum("pi,pj->pij", V, V)
        return replace(
            self,
            cut_B=np.concatenate([self.cut_B, B]),
            cut_g=np.concatenate([self.cut_g, np.ones(len(V))]),
        )


def diagonal_problem(C: np.ndarray, sense: Sense = Sense.MAX) -> SdpProblem:
    """opt <C, X> s.t. diag(X) = e, X psd (the basic relaxation, trace(X) = dim)."""
    d = C.shape[0]
    E = np.zeros((d, d, d))
    E[np.arange(d), np.arange(d), np.arange(d)] = 1.0
    return SdpProblem(C=C, eq_A=E, eq_b=np.ones(d), sense=sense, trace_bound=float(d))


@dataclass
class SdpSolution:
    status: SdpStatus
    X: Optional[np.ndarray] = None
    value: float = math.nan
    dual_value: float = math.nan
    y: Optional[np.ndarray] = None
    lam: Optional[np.ndarray] = None
    tol: float = 1e-8
    kkt_residuals: dict = field(default_factory=dict)
    certificate: Optional[np.ndarray] = None
    problem: Optional[SdpProblem] = None
    iterations: int = 0
    # filled by cutting_plane_loop
    bound_trace: list = field(default_factory=list)
    cuts: list = field(default_factory=list)

    @property
    def sense(self) -> Sense:
        return self.problem.sense


def _sym_vec_cols(mats: np.ndarray) -> np.ndarray:
    """Column-major vectorisation of a stack of matrices, one column each."""
    k, d, _ = mats.shape
    return mats.transpose(0, 2, 1).reshape(k, d * d).T


def _independent_rows(E: np.ndarray, rhs: np.ndarray, tol: float):
    """Select a maximal independent subset of the rows of E.

    Returns (keep_indices, certificate). The certificate w is not None when the
    system <E, X> = rhs is inconsistent: w'E = 0 and w'rhs != 0.
    """
    k = E.shape[0]
    if k == 0:
        return np.arange(0), None
    scale = max(1.0, np.abs(E).max())
    zero_rows = np.flatnonzero(np.abs(E).max(axis=1) <= tol * scale)
    for i in zero_rows:
        if abs(rhs[i]) > tol * max(1.0, np.abs(rhs).max()):
            w = np.zeros(k)
            w[i] = 1.0
            return None, w
    _, R, piv = scipy.linalg.qr(E.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > tol * max(diag.max(initial=0.0), 1e-300) * max(E.shape)))
    keep = np.sort(piv[:rank])
    if rank == k:
        return keep, None
    # least-squares consistency check of the dropped rows
    Ek = E[keep]
    coef, *_ = np.linalg.lstsq(Ek.T, E.T, rcond=None)  # E_i = coef_i' Ek
    pred = coef.T @ rhs[keep]
    bad = np.flatnonzero(np.abs(pred - rhs) > 1e-7 * (1 + np.abs(rhs).max()))
    if bad.size:
        i = bad[0]
        w = np.zeros(k)
        w[i] = 1.0
        w[keep] -= coef[:, i]
        return None, w
    return keep, None


def solve(p: SdpProblem, tol: float = 1e-8, max_iter: int = 100) -> SdpSolution:
    """Solve ``p`` to relative accuracy ``tol``.

    Internally the maximisation form is handed to cvxopt through its dual:
    min b'y - g'lam  s.t.  sum y_i A_i - sum lam_j B_j - C psd, lam >= 0;
    the matrix multiplier of that problem is X.
    """
    d = p.dim
    if d > DIM_CAP:
        raise ValueError(f"SDP order {d} exceeds cap {DIM_CAP}")
    if not (0 < tol <= 1e-2):
        raise ValueError("tol must lie in (0, 1e-2]")
    sign = 1.0 if p.sense == Sense.MAX else -1.0
    C = sign * p.C
    k_all = p.eq_A.shape[0]
    E = _sym_vec_cols(p.eq_A).T if k_all else np.zeros((0, d * d))
    keep, cert = _independent_rows(E, p.eq_b, 1e-10)
    if cert is not None:
        return SdpSolution(SdpStatus.INFEASIBLE, certificate=cert, tol=tol, problem=p)
    A = p.eq_A[keep]
    b = p.eq_b[keep]
    k, q = len(b), len(p.cut_g)
    nv = k + q
    if nv == 0:
        # no constraints: bounded only if C is zero
        if np.allclose(C, 0):
            return SdpSolution(SdpStatus.SOLVED, X=np.zeros((d, d)), value=0.0, dual_value=0.0,
                               y=np.zeros(k_all), lam=np.zeros(0), tol=tol, problem=p)
        return SdpSolution(SdpStatus.UNBOUNDED, tol=tol, problem=p)

    Gs = np.hstack([-_sym_vec_cols(A), _sym_vec_cols(p.cut_B)]) if q else -_sym_vec_cols(A)
    cvec = np.concatenate([b, -p.cut_g])
    kwargs = {}
    if q:
        kwargs["Gl"] = spmatrix(-1.0, list(range(q)), list(range(k, nv)), (q, nv))
        kwargs["hl"] = matrix(np.zeros(q))
    scale = max(1.0, np.abs(C).max())
    options = {
        "show_progress": False,
        "maxiters": max_iter,
        "abstol": tol * scale,
        "reltol": tol,
        "feastol": min(1e-7, tol * 10),
    }
    res = None
    # the Cholesky KKT solver is much faster here; QR is the robust fallback
    for kkt in ("chol", None):
        try:
            extra = {"kktsolver": kkt} if kkt else {}
            res = solvers.sdp(matrix(cvec), Gs=[matrix(Gs)], hs=[matrix(-C)], options=options, **kwargs, **extra)
            break
        except (ArithmeticError, ValueError) as exc:
            log.debug("SDP solver failure with kktsolver=%s: %s", kkt, exc)
    if res is None:
        log.warning("SDP solver failure")
        return SdpSolution(SdpStatus.NUMERICAL, tol=tol, problem=p)

    status = res["status"]
    iters = int(res.get("iterations", 0) or 0)
    if status == "dual infeasible":
        # cvxopt's dual is our X problem
        ray = np.zeros(k_all + q)
        xr = np.array(res["x"]).ravel()
        ray[keep] = xr[:k]
        ray[k_all:] = xr[k:]
        return SdpSolution(SdpStatus.INFEASIBLE, certificate=ray, tol=tol, problem=p, iterations=iters)
    if status == "primal infeasible":
        return SdpSolution(SdpStatus.UNBOUNDED, tol=tol, problem=p, iterations=iters)

    xv = np.array(res["x"]).ravel()
    y = np.zeros(k_all)
    y[keep] = xv[:k]
    lam = xv[k:]
    X = np.array(res["zs"][0])
    X = (X + X.T) / 2
    primal = float(np.sum(C * X))
    dual = float(b @ xv[:k] - p.cut_g @ lam)
    Z = np.array(res["ss"][0])
    pres = float(
        np.linalg.norm(np.einsum("kij,ij->k", A, X) - b)
        + (np.linalg.norm(np.minimum(np.einsum("kij,ij->k", p.cut_B, X) - p.cut_g, 0)) if q else 0.0)
    )
    gap = abs(dual - primal)
    kkt = {"primal": pres, "dual": float(res.get("dual infeasibility", 0.0) or 0.0), "gap": gap,
           "complementarity": float(np.sum(X * Z))}
    ok = status == "optimal" or (gap <= 1e3 * tol * (1 + abs(primal)) and pres <= 1e-5)
    st = SdpStatus.SOLVED if ok else SdpStatus.MAX_ITER
    return SdpSolution(
        st,
        X=X,
        value=sign * primal,
        dual_value=sign * dual,
        y=sign * y,
        lam=sign * lam,
        tol=tol,
        kkt_residuals=kkt,
        problem=p,
        iterations=iters,
    )


def rigorous_dual_bound(s: SdpSolution) -> float:
    """Dual objective corrected so that it bounds the optimum for any multipliers.

    For the maximisation form with multipliers (y, lam), lam clipped at 0:
    <C,X> <= b'y - g'lam + lambda_max(C + sum lam B - sum y A)^+ * trace(X).
    """
    p = s.problem
    sign = 1.0 if p.sense == Sense.MAX else -1.0
    y = sign * s.y
    lam = np.maximum(sign * s.lam, 0.0)
    S = sign * p.C - np.einsum("k,kij->ij", y, p.eq_A)
    if lam.size:
        S = S + np.einsum("k,kij->ij", lam, p.cut_B)
    bound = float(p.eq_b @ y - p.cut_g @ lam)
    excess = max(0.0, float(np.linalg.eigvalsh((S + S.T) / 2)[-1]))
    if p.trace_bound is not None:
        bound += excess * p.trace_bound
    elif excess > 1e-7:
        log.warning("dual slack infeasible by %.3g with no trace bound", excess)
    return sign * bound


def safe_bound(s: SdpSolution, direction: Direction) -> float:
    """A bound on the optimum that errs on the safe side.

    The direction matching the problem sense (Upper for Max, Lower for Min)
    uses the eigenvalue-corrected dual objective; the opposite direction uses
    the primal value. Either way it is pushed outward by tol * (1 + |dual|).
    """
    direction = Direction(direction)
    if s.status not in (SdpStatus.SOLVED, SdpStatus.MAX_ITER):
        raise SdpError(f"no safe bound for status {s.status.value}")
    if s.status == SdpStatus.MAX_ITER and s.problem.trace_bound is None:
        raise SdpError("unconverged solve without a trace bound has no safe bound")
    delta = s.tol * (1 + abs(s.dual_value))
    dual_side = (s.problem.sense == Sense.MAX) == (direction == Direction.UPPER)
    if dual_side:
        base = rigorous_dual_bound(s)
        if s.problem.sense == Sense.MAX:
            base = max(base, s.dual_value)
        else:
            base = min(base, s.dual_value)
    else:
        base = s.value
    return base + delta if direction == Direction.UPPER else base - delta


# ---------------------------------------------------------------------------
# clique cuts


@dataclass(frozen=True)
class CliqueCut:
    """Valid inequality b'Xb >= 1 for b in {-1,0,1}^d with 3 or 5 nonzeros.

    ``violation`` is (1 - b'Xb) / 2, i.e. measured in units of the pairwise
    sums (triangle form: s_ij x_ij + s_ik x_ik + s_jk x_jk >= -1).
    """

    b: tuple
    violation: float

    def __post_init__(self):
        nz = sum(1 for v in self.b if v != 0)
        if nz not in (3, 5) or any(v not in (-1, 0, 1) for v in self.b):
            raise ValueError("clique cut needs 3 or 5 entries in {-1, 1}")

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.b, dtype=float)

    @property
    def support(self) -> tuple:
        return tuple(i for i, v in enumerate(self.b) if v)

    def lhs(self, X: np.ndarray) -> float:
        v = self.vector
        return float(v @ X @ v)


def _make_cut(d: int, idx, signs, violation: float) -> CliqueCut:
    b = [0] * d
    for i, s in zip(idx, signs):
        b[int(i)] = int(s)
    # canonical sign: first nonzero positive (b and -b give the same cut)
    if b[int(idx[0])] < 0:
        b = [-v for v in b]
    return CliqueCut(tuple(b), float(violation))


# b on (i, j, k) for each row of the pair signs below: b_i b_j, b_i b_k, b_j b_k
_TRI_SIGNS = np.array([[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]])
_triples_cache: dict = {}


def _triples(d: int) -> np.ndarray:
    if d not in _triples_cache:
        _triples_cache[d] = np.array(list(itertools.combinations(range(d), 3)), dtype=np.int64).reshape(-1, 3)
    return _triples_cache[d]


def separate_triangle(X: np.ndarray, min_violation: float = 1e-3, budget: Optional[int] = None) -> list:
    """All violated triangle inequalities, most violated first.

    For i < j < k the four inequalities are
    x_ij + x_ik + x_jk >= -1, x_ij - x_ik - x_jk >= -1,
    -x_ij + x_ik - x_jk >= -1, -x_ij - x_ik + x_jk >= -1.
    """
    d = X.shape[0]
    if d < 3:
        return []
    T = _triples(d)
    xij, xik, xjk = X[T[:, 0], T[:, 1]], X[T[:, 0], T[:, 2]], X[T[:, 1], T[:, 2]]
    pair_signs = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    sums = np.stack([xij, xik, xjk], axis=1) @ pair_signs.T  # (t, 4)
    viol = -1.0 - sums
    ti, ki = np.nonzero(viol > min_violation)
    if ti.size == 0:
        return []
    v = viol[ti, ki]
    order = np.lexsort((ki, ti, -v))
    if budget is not None:
        order = order[:budget]
    return [_make_cut(d, T[ti[o]], _TRI_SIGNS[ki[o]], v[o]) for o in order]


@dataclass(frozen=True)
class HeuristicParams:
    restarts: int = 50
    swaps: int = 100
    t0: float = 1.0
    cooling: float = 0.95
    min_violation: float = 1e-3
    seed: int = 0


_FIVE_SIGNS = np.array([(1,) + s for s in itertools.product((1, -1), repeat=4)], dtype=float)


_FIVE_OUTER = np.einsum("pi,pj->pij", _FIVE_SIGNS, _FIVE_SIGNS).reshape(16, 25)


def _best_five(X: np.ndarray, idx) -> tuple:
    idx = np.asarray(idx)
    vals = _FIVE_OUTER @ X[idx[:, None], idx[None, :]].ravel()
    j = int(np.argmin(vals))
    return float(vals[j]), j


def separate_five_clique(X: np.ndarray, params: HeuristicParams = HeuristicParams()) -> list:
    """Search for violated 5-clique inequalities b'Xb >= 1 by annealed swaps.

    Each restart draws a random 5-subset, then repeatedly swaps one member
    for an outside index; a swap is kept if it lowers min_b b'Xb over the 16
    sign patterns, or otherwise with probability exp(-delta / T) where T
    starts at ``t0`` and is multiplied by ``cooling`` after every swap.
    """
    d = X.shape[0]
    if d < 5:
        return []
    rng = np.random.default_rng(params.seed)
    found: dict = {}
    limit = 1.0 - 2 * params.min_violation

    def record(idx, val, j):
        if val < limit:
            order = np.argsort(idx)
            key = _make_cut(d, np.asarray(idx)[order], _FIVE_SIGNS[j][order], (1 - val) / 2)
            found[key.b] = key

    for _ in range(params.restarts):
        idx = list(rng.choice(d, 5, replace=False))
        val, j = _best_five(X, idx)
        record(idx, val, j)
        temp = params.t0
        for _ in range(params.swaps if d > 5 else 0):
            pos = int(rng.integers(5))
            r = int(rng.integers(d - 5))
            # r-th index not in idx
            for v in sorted(idx):
                if v <= r:
                    r += 1
            cand = list(idx)
            cand[pos] = r
            cval, cj = _best_five(X, cand)
            delta = cval - val
            if delta < 0 or rng.random() < math.exp(-delta / max(temp, 1e-12)):
                idx, val, j = cand, cval, cj
                record(idx, val, j)
            temp *= params.cooling
    return sorted(found.values(), key=lambda c: (-c.violation, c.b))


def five_clique_exhaustive(X: np.ndarray) -> float:
    """min b'Xb over all 5-subsets and sign patterns (test oracle, small d)."""
    d = X.shape[0]
    best = math.inf
    for idx in itertools.combinations(range(d), 5):
        best = min(best, _best_five(X, list(idx))[0])
    return best


# ---------------------------------------------------------------------------
# cutting plane loop


@dataclass(frozen=True)
class CutBudget:
    rounds: int = 20
    per_round: int = 300
    min_violation: float = 1e-3
    five_clique: bool = True
    heuristic: HeuristicParams = HeuristicParams()
    drop_tol: float = 1e-7
    drop_after: int = 2
    tol: float = 1e-8
    # with a target: stop once a round gains less than this share of the
    # remaining distance to the target
    tail_off: float = 0.05
    # keep at most this many cuts (largest multipliers first); None = no cap
    max_pool: Optional[int] = None


def _cut_key(v: np.ndarray) -> tuple:
    v = np.rint(v).astype(np.int64)
    nz = np.flatnonzero(v)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return tuple(int(a) for a in v)


def cutting_plane_loop(p: SdpProblem, budget: CutBudget = CutBudget(), initial_cuts: Sequence = (),
                       target: Optional[float] = None) -> SdpSolution:
    """Tighten ``p`` with clique cuts until nothing violated is found.

    Triangle inequalities are separated first; 5-clique inequalities only in
    rounds where the triangles are clean. Cuts whose multiplier stays below
    ``drop_tol`` for ``drop_after`` consecutive rounds are removed. The
    returned solution is the round with the best safe bound, and
    ``bound_trace`` lists the best-so-far safe bound after each round.

    With a ``target`` (a bound value that would settle the caller's
    question, e.g. a pruning level in branch-and-bound) the loop stops as
    soon as the target is reached or progress tails off.
    """
    is_max = p.sense == Sense.MAX
    direction = Direction.UPPER if is_max else Direction.LOWER
    pool = [np.asarray(v, dtype=float) for v in initial_cuts]
    idle = [0] * len(pool)
    best: Optional[SdpSolution] = None
    best_bound = math.inf if is_max else -math.inf
    trace: list = []
    for rnd in range(budget.rounds + 1):
        sol = solve(p.with_cuts(pool), tol=budget.tol)
        if sol.status not in (SdpStatus.SOLVED, SdpStatus.MAX_ITER):
            if best is None:
                return sol
            log.warning("cutting plane round %d failed with %s", rnd, sol.status.value)
            break
        try:
            bound = safe_bound(sol, direction)
        except SdpError:
            if best is None:
                return sol
            break
        prev = best_bound
        if best is None or (bound < best_bound if is_max else bound > best_bound):
            best, best_bound = sol, bound
            best.cuts = [v.copy() for v in pool]
        trace.append(best_bound)
        if rnd == budget.rounds:
            break
        if target is not None:
            dist = (best_bound - target) if is_max else (target - best_bound)
            if dist <= 0:
                break
            if rnd > 0 and abs(prev - best_bound) < budget.tail_off * dist:
                break
        new = separate_triangle(sol.X, budget.min_violation)
        if not new and budget.five_clique:
            hp = replace(budget.heuristic, min_violation=budget.min_violation, seed=budget.heuristic.seed + rnd)
            new = separate_five_clique(sol.X, hp)
        known = {_cut_key(v) for v in pool}
        new = [c for c in new if c.b not in known][: budget.per_round]
        if not new:
            break
        lam = np.abs(sol.lam[-len(pool):]) if pool else np.zeros(0)
        keep = []
        for i, v in enumerate(pool):
            idle[i] = idle[i] + 1 if lam[i] < budget.drop_tol else 0
            if idle[i] < budget.drop_after:
                keep.append(i)
        if budget.max_pool is not None and len(keep) + len(new) > budget.max_pool:
            room = max(budget.max_pool - len(new), 0)
            keep = sorted(sorted(keep, key=lambda i: -lam[i])[:room])
        pool = [pool[i] for i in keep] + [c.vector for c in new]
        idle = [idle[i] for i in keep] + [0] * len(new)
    best.bound_trace = trace
    return best
