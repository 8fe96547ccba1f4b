"""Penalized BQP -> max-cut on n+1 vertices, and back.

With x_bar = [1; x], h(x) = x_bar' Q x_bar and
h(x) = e'Qe - x_bar' C x_bar where C = (Diag(W e) - W) / 4 is a quarter of
the Laplacian of the graph with adjacency W = 4 * offdiag(Q).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BqpPm1Instance


@dataclass(frozen=True, eq=False)
class QMatrix:
    Q: np.ndarray
    const_eQe: float


@dataclass(frozen=True, eq=False)
class MaxCutInstance:
    weights: np.ndarray
    constant: float = 0.0
    rho_cutoff: Optional[float] = None

    def __post_init__(self):
        W = np.asarray(self.weights, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError("adjacency must be square")
        if np.any(np.diag(W) != 0):
            raise ValueError("adjacency must have a zero diagonal")
        if np.max(np.abs(W - W.T), initial=0.0) > 1e-12 * (1 + np.abs(W).max(initial=0.0)):
            raise ValueError("adjacency must be symmetric")
        object.__setattr__(self, "weights", (W + W.T) / 2)

    @property
    def n_vertices(self) -> int:
        return self.weights.shape[0]

    @property
    def C(self) -> np.ndarray:
        W = self.weights
        return (np.diag(W.sum(axis=1)) - W) / 4

    @property
    def integral_weights(self) -> bool:
        W = self.weights
        return bool(np.all(np.abs(W - np.round(W)) <= 1e-9))

    def edges(self):
        i, j = np.nonzero(np.triu(self.weights, 1))
        return [(int(a), int(b), float(self.weights[a, b])) for a, b in zip(i, j)]

    def cut_value(self, xbar) -> float:
        xbar = np.asarray(xbar, dtype=float)
        return float(xbar @ self.C @ xbar)


@dataclass(frozen=True, eq=False)
class Cut:
    xbar: np.ndarray
    value: float

    @classmethod
    def of(cls, g: MaxCutInstance, xbar) -> "Cut":
        xbar = np.where(np.asarray(xbar) < 0, -1, 1).astype(np.int64)
        return cls(xbar, g.cut_value(xbar))


def build_q(p: BqpPm1Instance, sigma: float) -> QMatrix:
    if sigma < 0 or (sigma == 0 and p.m > 0):
        raise ValueError("sigma must be positive (zero only without constraints)")
    n = p.n
    Q = np.empty((n + 1, n + 1))
    Q[0, 0] = p.alpha + sigma * (p.b @ p.b)
    lin = (p.c - 2 * sigma * (p.A.T @ p.b)) / 2
    Q[0, 1:] = lin
    Q[1:, 0] = lin
    Q[1:, 1:] = p.F + sigma * (p.A.T @ p.A)
    return QMatrix(Q, float(Q.sum()))


def to_maxcut(q: QMatrix, rho: Optional[float] = None) -> MaxCutInstance:
    W = 4 * q.Q
    np.fill_diagonal(W, 0.0)
    cutoff = None if rho is None else q.const_eQe - rho
    return MaxCutInstance(W, constant=q.const_eQe, rho_cutoff=cutoff)


def penalized_maxcut(p: BqpPm1Instance, sigma: float, rho: Optional[float] = None) -> MaxCutInstance:
    return to_maxcut(build_q(p, sigma), rho)


def cut_to_assignment(cut) -> np.ndarray:
    """Fix vertex 0 on the +1 side and drop it."""
    xbar = np.asarray(cut.xbar if isinstance(cut, Cut) else cut, dtype=np.int64)
    if xbar[0] < 0:
        xbar = -xbar
    return xbar[1:].copy()
