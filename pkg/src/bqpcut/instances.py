"""Instance generators: two random families, k-cluster and cardinality BQP.

Random draws use numpy's PCG64 generator (``default_rng(seed)``); integers
in an interval come from ``Generator.integers(lo, hi, endpoint=True)``,
which samples without modulo bias (Lemire's bounded rejection method).
Draw order is fixed: A row by row, then the upper triangle of F row by row.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import Bqp01Instance, InstanceError

FAMILY_ONE_INTERVALS = ((-1, 1), (-3, 3), (-7, 7))
FAMILY_TWO_A = ((0, 1), (0, 3))
FAMILY_TWO_B = (10, 15, 20)
FAMILY_TWO_F = ((0, 5), (-5, 5), (0, 10), (-10, 10))


class Family(str, enum.Enum):
    ONE = "One"
    TWO = "Two"


@dataclass(frozen=True)
class RgiSpec:
    family: Family
    n: int
    m: int
    A_interval: Tuple[int, int]
    F_interval: Tuple[int, int]
    b_v: int = 0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "A_interval", tuple(int(v) for v in self.A_interval))
        object.__setattr__(self, "F_interval", tuple(int(v) for v in self.F_interval))

    def validate(self) -> None:
        if self.n < 1 or self.m < 0:
            raise InstanceError("need n >= 1 and m >= 0")
        for lo, hi in (self.A_interval, self.F_interval):
            if lo > hi:
                raise InstanceError(f"empty interval [{lo}, {hi}]")
        if self.family == Family.ONE:
            if self.b_v != 0:
                raise InstanceError("family One has b = 0")
            for iv in (self.A_interval, self.F_interval):
                if iv not in FAMILY_ONE_INTERVALS and iv != (0, 0):
                    raise InstanceError(f"family One intervals come from {FAMILY_ONE_INTERVALS}, got {iv}")
        else:
            if self.A_interval not in FAMILY_TWO_A:
                raise InstanceError(f"family Two A interval must be one of {FAMILY_TWO_A}")
            if self.b_v not in FAMILY_TWO_B:
                raise InstanceError(f"family Two b value must be one of {FAMILY_TWO_B}")
            if self.F_interval not in FAMILY_TWO_F:
                raise InstanceError(f"family Two F interval must be one of {FAMILY_TWO_F}")

    def name(self) -> str:
        return (f"rgi{self.family.value}_n{self.n}_m{self.m}_A{self.A_interval[0]}_{self.A_interval[1]}"
                f"_F{self.F_interval[0]}_{self.F_interval[1]}_b{self.b_v}_s{self.seed}")


def _sym_from_upper(n: int, values: np.ndarray) -> np.ndarray:
    F = np.zeros((n, n))
    F[np.triu_indices(n)] = values
    return F + np.triu(F, 1).T


def gen_rgi(spec: RgiSpec) -> Bqp01Instance:
    """Random instance: c = 0, b = b_v e, integer A and symmetric integer F."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    n, m = spec.n, spec.m
    A = rng.integers(spec.A_interval[0], spec.A_interval[1], size=(m, n), endpoint=True)
    upper = rng.integers(spec.F_interval[0], spec.F_interval[1], size=n * (n + 1) // 2, endpoint=True)
    F = _sym_from_upper(n, upper.astype(float))
    return Bqp01Instance(F, np.zeros(n), A, np.full(m, spec.b_v), name=spec.name())


def with_parity_conflict(p: Bqp01Instance, seed: int = 0) -> Bqp01Instance:
    """Append a row with even coefficients and an odd right-hand side.

    No 0/1 point satisfies it, so the result is infeasible whatever the
    other rows are.
    """
    rng = np.random.default_rng(seed)
    row = 2 * rng.integers(0, 2, size=p.n, endpoint=True)
    if not row.any():
        row[0] = 2
    rhs = 2 * int(rng.integers(0, max(1, row.sum() // 2), endpoint=True)) + 1
    A = np.vstack([p.A_hat, row])
    b = np.concatenate([p.b_hat, [rhs]])
    return Bqp01Instance(p.F_hat, p.c_hat, A, b, name=p.name + "_parity")


def build_k_cluster(adjacency, k: int, name: str = "") -> Bqp01Instance:
    """Densest k-subgraph: max 1/2 y'Ay s.t. e'y = k, stored as min -1/2 y'Ay."""
    A = np.asarray(adjacency, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or np.any(A != A.T) or np.any(np.diag(A) != 0) or not np.isin(A, (0, 1)).all():
        raise InstanceError("adjacency must be a symmetric 0/1 matrix with zero diagonal")
    if not 1 <= k <= n:
        raise InstanceError(f"k must lie in [1, {n}], got {k}")
    return Bqp01Instance(-A / 2, np.zeros(n), np.ones((1, n)), [k], name=name or f"kcluster_n{n}_k{k}",
                         negate_display=True)


def default_cardinalities(n: int) -> Tuple[int, int]:
    return max(1, round(n / 5)), max(1, round(4 * n / 5))


def build_cbqp(Q, q, k: Optional[int] = None, name: str = "") -> Bqp01Instance:
    """min y'Qy + q'y s.t. e'y = k; k defaults to round(n/5)."""
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    if k is None:
        k = default_cardinalities(n)[0]
    if not 1 <= k <= n:
        raise InstanceError(f"k must lie in [1, {n}], got {k}")
    return Bqp01Instance(Q, np.asarray(q, dtype=float), np.ones((1, n)), [k], name=name or f"cbqp_n{n}_k{k}")


def random_cbqp(n: int, k: Optional[int] = None, seed: int = 0, lo: int = -10, hi: int = 10) -> Bqp01Instance:
    rng = np.random.default_rng(seed)
    upper = rng.integers(lo, hi, size=n * (n + 1) // 2, endpoint=True)
    q = rng.integers(lo, hi, size=n, endpoint=True)
    return build_cbqp(_sym_from_upper(n, upper.astype(float)), q.astype(float), k, name=f"cbqp_n{n}_s{seed}")


def petersen_graph() -> np.ndarray:
    A = np.zeros((10, 10), dtype=int)
    for i in range(5):
        for u, v in ((i, (i + 1) % 5), (i, i + 5), (i + 5, (i + 2) % 5 + 5)):
            A[u, v] = A[v, u] = 1
    return A


def random_graph(n: int, density: float = 0.5, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    U = np.triu(rng.random((n, n)) < density, 1).astype(int)
    return U + U.T


def densest_k_subgraph(adjacency, k: int) -> int:
    """Exhaustive edge count of the densest k-vertex induced subgraph."""
    A = np.asarray(adjacency)
    return max(int(A[np.ix_(s, s)].sum()) // 2 for s in map(list, itertools.combinations(range(A.shape[0]), k)))
