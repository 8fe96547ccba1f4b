import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bqpcut.core import (
    Bqp01Instance,
    InstanceError,
    Solution,
    Status,
    brute_force_solve,
    enumerate_instance,
    objective_pm1,
    penalized_objective,
    residual,
    to_plus_minus_one,
    to_pm1,
    to_zero_one,
)

from conftest import naive_solve, random_instance


def test_one_dim_transform_exact(one_dim):
    p = to_plus_minus_one(one_dim)
    assert p.A.tolist() == [[0.5]]
    assert p.b.tolist() == [0.5]
    assert p.c.tolist() == [1.0]
    assert p.F.tolist() == [[0.0]]
    assert p.alpha == 1.0


def test_zero_instance():
    p = to_plus_minus_one(Bqp01Instance(np.zeros((3, 3)), np.zeros(3), np.zeros((0, 3)), []))
    assert p.alpha == 0
    assert not p.F.any() and not p.c.any()
    assert p.m == 0


def test_rejects_asymmetric_and_fractional():
    with pytest.raises(InstanceError):
        Bqp01Instance([[0, 1], [0, 0]], [0, 0], [[1, 1]], [1])
    with pytest.raises(InstanceError):
        Bqp01Instance([[0, 0], [0, 0]], [0, 0], [[0.5, 1]], [1])
    with pytest.raises(InstanceError):
        Bqp01Instance([[0, 0], [0, 0]], [0, 0], [[1, 1]], [1.5])


@st.composite
def instances(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(0, 3))
    seed = draw(st.integers(0, 2**31))
    return random_instance(np.random.default_rng(seed), n, m)


@given(instances(), st.data())
def test_objective_and_residual_preserved(p01, data):
    p = to_plus_minus_one(p01)
    y = np.array(data.draw(st.lists(st.integers(0, 1), min_size=p.n, max_size=p.n)))
    x = to_pm1(y)
    assert objective_pm1(p, x) == pytest.approx(p01.objective(y), abs=1e-9)
    r = p01.residual_vector(y)
    assert residual(p, x) == int(r @ r)
    assert np.array_equal(to_zero_one(x), y)


@given(instances(), st.data(), st.floats(0, 50))
def test_penalized_objective(p01, data, sigma):
    p = to_plus_minus_one(p01)
    x = to_pm1(np.array(data.draw(st.lists(st.integers(0, 1), min_size=p.n, max_size=p.n))))
    assert penalized_objective(p, sigma, x) == pytest.approx(objective_pm1(p, x) + sigma * residual(p, x))
    if residual(p, x) == 0:
        assert penalized_objective(p, sigma, x) == objective_pm1(p, x)


def test_negative_sigma_rejected(one_dim):
    with pytest.raises(ValueError):
        penalized_objective(to_plus_minus_one(one_dim), -1, [1])


@given(instances(max_n=7))
def test_brute_force_matches_naive(p01):
    f_star, ell, u, min_res = naive_solve(p01)
    p = to_plus_minus_one(p01)
    sol = brute_force_solve(p, with_bounds=True)
    e = enumerate_instance(p)
    if f_star is None:
        assert sol.status == Status.INFEASIBLE
    else:
        assert sol.status == Status.OPTIMAL
        assert sol.objective == pytest.approx(f_star)
        assert residual(p, to_pm1(sol.x01)) == 0
    assert e.ell_star == (np.inf if ell is None else pytest.approx(ell))
    assert e.u_star == (-np.inf if u is None else pytest.approx(u))
    assert e.min_residual == min_res


def test_one_dim_brute_force(one_dim):
    p = to_plus_minus_one(one_dim)
    e = enumerate_instance(p)
    assert (e.ell_star, e.u_star) == (0.0, 2.0)
    sol = brute_force_solve(p)
    assert sol.x01.tolist() == [1] and sol.objective == 2.0


def test_infeasible_brute_force(one_dim_infeasible):
    sol = brute_force_solve(to_plus_minus_one(one_dim_infeasible))
    assert sol.status == Status.INFEASIBLE and sol.x01 is None


def test_brute_force_cap():
    p = to_plus_minus_one(Bqp01Instance(np.zeros((26, 26)), np.zeros(26), np.zeros((0, 26)), []))
    with pytest.raises(ValueError):
        brute_force_solve(p)


def test_solution_invariants():
    with pytest.raises(ValueError):
        Solution(Status.OPTIMAL, np.array([1]), 0.0, residual=1)
    with pytest.raises(ValueError):
        Solution(Status.INFEASIBLE, np.array([1]))
