import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bqpcut.bounds import (
    BoundPair,
    InfeasibleCertificate,
    Provenance,
    Scope,
    hypercube_upper_bound,
    integral_bounds,
    null_space_basis,
    projected_upper_bound,
    shor_bounds,
    strengthened_bounds,
    trivial_bounds,
)
from bqpcut.core import Bqp01Instance, enumerate_instance, hypercube_chunks, to_plus_minus_one
from bqpcut.sdp import CutBudget

from conftest import random_instance

SLACK = 1e-6
BUDGET = CutBudget(rounds=4, per_round=60)


def test_one_dim_values(one_dim):
    p = to_plus_minus_one(one_dim)
    tb = trivial_bounds(p)
    assert (tb.ell, tb.u) == (0.0, 2.0)
    sb = shor_bounds(p)
    assert sb.ell == pytest.approx(0, abs=1e-6) and sb.u == pytest.approx(2, abs=1e-6)
    assert sb.ell <= 0 and sb.u >= 2
    proj = projected_upper_bound(p)
    assert isinstance(proj, BoundPair)
    assert proj.u == pytest.approx(2.0, abs=1e-6)
    assert proj.scope_u == Scope.OVER_FEASIBLE and proj.provenance == Provenance.PROJECTED


def test_one_dim_infeasible_certificate(one_dim_infeasible):
    res = projected_upper_bound(to_plus_minus_one(one_dim_infeasible))
    assert isinstance(res, InfeasibleCertificate)


def test_sdp_infeasible_projection_certificate():
    # y1 + y2 = 3 has no 0/1 solution; the null space is nontrivial but the SDP is empty
    p = to_plus_minus_one(Bqp01Instance(np.zeros((2, 2)), [0, 0], [[1, 1]], [3]))
    assert isinstance(projected_upper_bound(p), InfeasibleCertificate)


def test_zero_instance_bounds():
    p = to_plus_minus_one(Bqp01Instance(np.zeros((3, 3)), np.zeros(3), [[1, 1, 1]], [1]))
    sb = shor_bounds(p)
    assert abs(sb.ell) < 1e-6 and abs(sb.u) < 1e-6


def test_null_space_basis_properties():
    A = np.array([[1.0, 2.0, 0.0], [0.0, 1.0, 1.0]])
    b = np.array([1.0, 2.0])
    nb = null_space_basis(A, b)
    M = np.hstack([b[:, None], -A])
    assert nb.rank_M == 2
    assert nb.N.shape == (4, 2)
    assert np.allclose(M @ nb.N, 0)
    assert np.allclose(nb.N.T @ nb.N, np.eye(2))


def test_null_space_of_zero_constraints():
    nb = null_space_basis(np.zeros((1, 3)), np.zeros(1))
    assert np.array_equal(nb.N, np.eye(4))


@st.composite
def small_instances(draw):
    n = draw(st.integers(2, 7))
    m = draw(st.integers(1, 3))
    seed = draw(st.integers(0, 2**31))
    feasible = draw(st.booleans())
    rng = np.random.default_rng(seed)
    return random_instance(rng, n, m, b=None if feasible else 1)


@given(small_instances())
def test_bound_sandwich(p01):
    p = to_plus_minus_one(p01)
    e = enumerate_instance(p)
    tb = trivial_bounds(p)
    sb = shor_bounds(p)
    cb = strengthened_bounds(p, BUDGET, sb)
    assert tb.ell <= sb.ell + SLACK
    assert sb.ell <= cb.ell + SLACK
    assert cb.ell <= e.f_min + SLACK
    assert e.f_min <= e.ell_star
    assert e.f_max <= cb.u + SLACK <= sb.u + 2 * SLACK
    assert sb.u <= tb.u + SLACK
    proj = projected_upper_bound(p, shor=sb)
    if isinstance(proj, InfeasibleCertificate):
        assert e.x_star is None
    else:
        assert e.u_star <= proj.u + SLACK
        assert proj.u <= sb.u + SLACK
    assert hypercube_upper_bound(p, shor=sb) >= e.f_max - SLACK


@given(small_instances())
def test_feasible_lifts_lie_in_null_space(p01):
    """M x_bar = 0 for every feasible x, i.e. M Y = 0 for Y = x_bar x_bar'."""
    p = to_plus_minus_one(p01)
    M = np.hstack([p.b[:, None], -p.A])
    nb = null_space_basis(p.A, p.b)
    for _, X in hypercube_chunks(p.n):
        Xb = np.hstack([np.ones((len(X), 1)), X])
        R = X @ p.A.T - p.b
        feas = np.einsum("ij,ij->i", R, R) < 0.5
        for xb in Xb[feas]:
            assert np.abs(M @ np.outer(xb, xb)).max() <= 1e-9
            # and x_bar is in the span of the basis
            assert np.linalg.norm(xb - nb.N @ (nb.N.T @ xb)) <= 1e-9


def test_integral_rounding():
    bp = integral_bounds(BoundPair(-3.2, 4.9999999999))
    assert (bp.ell, bp.u) == (-3.0, 5.0)
    bp = integral_bounds(BoundPair(-math.inf, 2.7))
    assert bp.ell == -math.inf and bp.u == 2.0


def test_hypercube_bound_rejects_feasible_scope(one_dim):
    p = to_plus_minus_one(one_dim)
    proj = projected_upper_bound(p)
    with pytest.raises(ValueError):
        hypercube_upper_bound(p, shor=proj)
