"""Problem encodings for linearly constrained binary quadratic programs.

Two encodings are used throughout the package:

* ``Bqp01Instance``: min y'F y + c'y  s.t.  A y = b,  y in {0,1}^n, with
  integer ``A`` and ``b``.
* ``BqpPm1Instance``: min x'F x + c'x + alpha  s.t.  A x = b,  x in {-1,1}^n,
  obtained through x = 2y - e.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

SYMMETRY_TOL = 1e-9
INTEGRALITY_TOL = 1e-9
BRUTE_FORCE_CAP = 25
_CHUNK = 1 << 15


class InstanceError(ValueError):
    """Raised for malformed instance data."""


def _as_int_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size and not np.all(np.abs(arr - np.round(arr)) <= INTEGRALITY_TOL):
        raise InstanceError(f"{name} must be integer valued")
    return np.round(arr).astype(np.int64)


def _symmetrize(F: np.ndarray, name: str) -> np.ndarray:
    asym = np.max(np.abs(F - F.T)) if F.size else 0.0
    if asym > SYMMETRY_TOL:
        raise InstanceError(f"{name} is not symmetric (max asymmetry {asym:.3g})")
    return (F + F.T) / 2


@dataclass(frozen=True, eq=False)
class Bqp01Instance:
    F_hat: np.ndarray
    c_hat: np.ndarray
    A_hat: np.ndarray
    b_hat: np.ndarray
    name: str = ""
    # User-facing objective is -f_hat (e.g. max k-cluster encoded as a minimization).
    negate_display: bool = False

    def __post_init__(self):
        F = np.atleast_2d(np.asarray(self.F_hat, dtype=float))
        n = F.shape[0]
        if n < 1 or F.shape != (n, n):
            raise InstanceError(f"F_hat must be a square matrix with n >= 1, got shape {F.shape}")
        c = np.asarray(self.c_hat, dtype=float).reshape(-1)
        if c.shape != (n,):
            raise InstanceError(f"c_hat must have length {n}")
        A = _as_int_array(self.A_hat, "A_hat")
        if A.size == 0:
            A = np.zeros((0, n), dtype=np.int64)
        A = A.reshape(-1, n) if A.ndim != 2 else A
        if A.shape[1] != n:
            raise InstanceError(f"A_hat must have {n} columns")
        b = _as_int_array(self.b_hat, "b_hat").reshape(-1)
        if b.shape != (A.shape[0],):
            raise InstanceError(f"b_hat must have length {A.shape[0]}")
        object.__setattr__(self, "F_hat", _symmetrize(F, "F_hat"))
        object.__setattr__(self, "c_hat", c)
        object.__setattr__(self, "A_hat", A)
        object.__setattr__(self, "b_hat", b)

    @property
    def n(self) -> int:
        return self.F_hat.shape[0]

    @property
    def m(self) -> int:
        return self.A_hat.shape[0]

    @property
    def integral_objective(self) -> bool:
        """True when every objective coefficient is an integer."""
        return bool(
            np.all(self.F_hat == np.round(self.F_hat)) and np.all(self.c_hat == np.round(self.c_hat))
        )

    def objective(self, y) -> float:
        y = np.asarray(y, dtype=float)
        return float(y @ self.F_hat @ y + self.c_hat @ y)

    def residual_vector(self, y) -> np.ndarray:
        return self.A_hat @ np.asarray(y, dtype=np.int64) - self.b_hat

    def __eq__(self, other):
        if not isinstance(other, Bqp01Instance):
            return NotImplemented
        return (
            np.array_equal(self.F_hat, other.F_hat)
            and np.array_equal(self.c_hat, other.c_hat)
            and np.array_equal(self.A_hat, other.A_hat)
            and np.array_equal(self.b_hat, other.b_hat)
        )


@dataclass(frozen=True, eq=False)
class BqpPm1Instance:
    F: np.ndarray
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    alpha: float
    integral_objective: bool = False

    @property
    def n(self) -> int:
        return self.F.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def lifted_objective(self) -> np.ndarray:
        """Return F' = [[alpha, c'/2], [c/2, F]] so that f(x) = [1;x]' F' [1;x]."""
        n = self.n
        Fp = np.empty((n + 1, n + 1))
        Fp[0, 0] = self.alpha
        Fp[0, 1:] = self.c / 2
        Fp[1:, 0] = self.c / 2
        Fp[1:, 1:] = self.F
        return Fp


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    LEAST_VIOLATED = "LeastViolated"
    TIME_LIMIT = "TimeLimit"


@dataclass
class Solution:
    status: Status
    x01: Optional[np.ndarray] = None
    objective: Optional[float] = None
    residual: Optional[int] = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status == Status.OPTIMAL and self.residual not in (None, 0):
            raise ValueError("an optimal solution must be feasible")
        if self.status == Status.INFEASIBLE and self.x01 is not None:
            raise ValueError("an infeasible outcome carries no assignment")


def to_plus_minus_one(p: Bqp01Instance) -> BqpPm1Instance:
    """Change variables x = 2y - e."""
    e = np.ones(p.n)
    A_hat = p.A_hat.astype(float)
    return BqpPm1Instance(
        F=p.F_hat / 4,
        c=(p.c_hat + p.F_hat @ e) / 2,
        A=A_hat / 2,
        b=p.b_hat - A_hat @ e / 2,
        alpha=float(p.c_hat @ e / 2 + e @ p.F_hat @ e / 4),
        integral_objective=p.integral_objective,
    )


def to_zero_one(x) -> np.ndarray:
    return ((np.asarray(x) + 1) // 2).astype(np.int64)


def to_pm1(y) -> np.ndarray:
    return 2 * np.asarray(y, dtype=np.int64) - 1


def _check_assignment(p: BqpPm1Instance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (p.n,):
        raise ValueError(f"assignment has shape {x.shape}, expected ({p.n},)")
    return x


def objective_pm1(p: BqpPm1Instance, x) -> float:
    x = _check_assignment(p, x)
    return float(x @ p.F @ x + p.c @ x + p.alpha)


def residual(p: BqpPm1Instance, x) -> float:
    """Squared constraint violation ||Ax - b||^2 (an integer for integer source data)."""
    x = _check_assignment(p, x)
    r = p.A @ x - p.b
    val = float(r @ r)
    rounded = round(val)
    if abs(val - rounded) <= INTEGRALITY_TOL:
        return int(rounded)
    return val


def penalized_objective(p: BqpPm1Instance, sigma: float, x) -> float:
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    return objective_pm1(p, x) + sigma * residual(p, x)


def hypercube_chunks(n: int, chunk: int = _CHUNK):
    """Yield (start, X) blocks enumerating {-1,1}^n in lexicographic order (-1 < 1)."""
    total = 1 << n
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        k = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = (k[:, None] >> shifts) & 1
        yield start, (2 * bits - 1).astype(float)


def index_to_pm1(k: int, n: int) -> np.ndarray:
    return np.array([2 * ((k >> (n - 1 - i)) & 1) - 1 for i in range(n)], dtype=np.int64)


@dataclass
class EnumerationResult:
    """Exact quantities obtained by full enumeration of the hypercube."""

    f_star: float  # min f over the feasible set (inf if empty)
    x_star: Optional[np.ndarray]
    ell_star: float  # min f over the infeasible set (inf if empty)
    u_star: float  # max f over the feasible set (-inf if empty)
    f_min: float  # min f over the hypercube
    f_max: float  # max f over the hypercube
    min_residual: float
    x_least: np.ndarray  # lexicographically first minimizer of (residual, f)


def enumerate_instance(p: BqpPm1Instance, cap: int = BRUTE_FORCE_CAP) -> EnumerationResult:
    n = p.n
    if n > cap:
        raise ValueError(f"brute force limited to n <= {cap}, got {n}")
    best = (np.inf, -1)
    ell_star, u_star = np.inf, -np.inf
    f_min, f_max = np.inf, -np.inf
    least = (np.inf, np.inf, -1)
    for start, X in hypercube_chunks(n):
        f = np.einsum("ij,jk,ik->i", X, p.F, X) + X @ p.c + p.alpha
        R = X @ p.A.T - p.b
        res = np.einsum("ij,ij->i", R, R)
        feas = res <= 0.5 if p.m else np.ones(len(f), dtype=bool)
        if feas.any():
            fv = np.where(feas, f, np.inf)
            i = int(np.argmin(fv))
            if fv[i] < best[0]:
                best = (fv[i], start + i)
            u_star = max(u_star, float(f[feas].max()))
        if (~feas).any():
            ell_star = min(ell_star, float(f[~feas].min()))
        f_min = min(f_min, float(f.min()))
        f_max = max(f_max, float(f.max()))
        rmin = res.min()
        cand = np.flatnonzero(res == rmin)
        j = cand[np.argmin(f[cand])]
        if (rmin, f[j]) < least[:2]:
            least = (float(rmin), float(f[j]), start + int(j))
    x_star = index_to_pm1(best[1], n) if best[1] >= 0 else None
    return EnumerationResult(
        f_star=float(best[0]),
        x_star=x_star,
        ell_star=ell_star,
        u_star=u_star,
        f_min=f_min,
        f_max=f_max,
        min_residual=least[0],
        x_least=index_to_pm1(least[2], n),
    )


def brute_force_solve(p: BqpPm1Instance, cap: int = BRUTE_FORCE_CAP, with_bounds: bool = False) -> Solution:
    """Exact minimum of f over the feasible set by full enumeration.

    Ties are broken towards the lexicographically smallest x. With
    ``with_bounds`` the stats carry ell* (min over infeasible points) and u*
    (max over feasible points).
    """
    e = enumerate_instance(p, cap)
    stats = {"enumerated": 1 << p.n}
    if with_bounds:
        stats.update(ell_star=e.ell_star, u_star=e.u_star, f_min=e.f_min, f_max=e.f_max)
    if e.x_star is None:
        return Solution(Status.INFEASIBLE, stats=stats)
    return Solution(Status.OPTIMAL, x01=to_zero_one(e.x_star), objective=e.f_star, residual=0, stats=stats)
