import itertools

import numpy as np
import pytest
from hypothesis import settings

from bqpcut.core import Bqp01Instance

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def naive_solve(p: Bqp01Instance):
    """Plain-python enumeration over {0,1}^n, independent of the package.

    Returns (f_star or None, ell_star, u_star, min_residual) where the
    residual is ||A y - b||^2 and ell/u are over infeasible/feasible points.
    """
    F, c, A, b = p.F_hat.tolist(), p.c_hat.tolist(), p.A_hat.tolist(), p.b_hat.tolist()
    n = p.n
    best = None
    ell = u = None
    min_res = None
    for y in itertools.product((0, 1), repeat=n):
        f = sum(F[i][j] * y[i] * y[j] for i in range(n) for j in range(n)) + sum(c[i] * y[i] for i in range(n))
        res = sum((sum(A[r][j] * y[j] for j in range(n)) - b[r]) ** 2 for r in range(len(b)))
        min_res = res if min_res is None else min(min_res, res)
        if res == 0:
            best = f if best is None else min(best, f)
            u = f if u is None else max(u, f)
        else:
            ell = f if ell is None else min(ell, f)
    return best, ell, u, min_res


def random_instance(rng, n, m, lo=-3, hi=3, alo=-2, ahi=2, b=None, c=True):
    U = rng.integers(lo, hi, size=(n, n), endpoint=True)
    F = np.triu(U) + np.triu(U, 1).T
    cvec = rng.integers(lo, hi, size=n, endpoint=True) if c else np.zeros(n)
    A = rng.integers(alo, ahi, size=(m, n), endpoint=True)
    if b is None:
        # right-hand side of a random 0/1 point, so the instance is feasible
        y = rng.integers(0, 1, size=n, endpoint=True)
        bvec = A @ y
    else:
        bvec = np.full(m, b)
    return Bqp01Instance(F.astype(float), cvec.astype(float), A, bvec)


@pytest.fixture
def one_dim():
    """min 2y s.t. y = 1: the smallest instance with l* = 0 < u* = 2."""
    return Bqp01Instance([[0.0]], [2.0], [[1]], [1])


@pytest.fixture
def one_dim_infeasible():
    return Bqp01Instance([[0.0]], [0.0], [[2]], [1])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance")
        for line in RESULTS:
            terminalreporter.write_line(line)
