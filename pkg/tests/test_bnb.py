import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bqpcut.bnb import (
    ParameterInvalidity,
    SolverConfig,
    SolveStatus,
    brute_force_maxcut,
    feasible_from_cut,
    gw_round_and_improve,
    one_opt,
    root_relaxation,
    solve_maxcut,
)
from bqpcut.core import to_plus_minus_one
from bqpcut.maxcut import Cut, MaxCutInstance, penalized_maxcut


def naive_maxcut(W):
    """Sum of cut edge weights, maximised by plain enumeration."""
    n = len(W)
    best = -np.inf
    for sides in itertools.product((0, 1), repeat=n):
        v = sum(W[i][j] for i in range(n) for j in range(i + 1, n) if sides[i] != sides[j])
        best = max(best, v)
    return best


def random_weights(seed, n, kind="mixed", density=0.6):
    rng = np.random.default_rng(seed)
    if kind == "positive":
        U = rng.integers(1, 10, size=(n, n))
    elif kind == "negative":
        U = -rng.integers(1, 10, size=(n, n))
    elif kind == "real":
        U = rng.normal(size=(n, n))
    else:
        U = rng.integers(-10, 10, size=(n, n))
    U = np.triu(U * (rng.random((n, n)) < density), 1).astype(float)
    return U + U.T


K3 = np.ones((3, 3)) - np.eye(3)


def test_brute_force_examples():
    assert brute_force_maxcut(MaxCutInstance(K3))[0] == pytest.approx(2.0)
    assert brute_force_maxcut(MaxCutInstance(np.zeros((4, 4))))[0] == 0.0
    # a single negative edge is best left uncut
    assert brute_force_maxcut(MaxCutInstance(np.array([[0.0, -1], [-1, 0]])))[0] == 0.0
    val, cut = brute_force_maxcut(MaxCutInstance(np.ones((4, 4)) - np.eye(4)))
    assert val == 4.0 and cut.value == 4.0 and cut.xbar[0] == 1


def test_brute_force_cap():
    with pytest.raises(ValueError):
        brute_force_maxcut(MaxCutInstance(np.zeros((27, 27))))


@pytest.mark.parametrize("seed", range(6))
def test_brute_force_matches_naive(seed):
    W = random_weights(seed, 7)
    assert brute_force_maxcut(MaxCutInstance(W))[0] == pytest.approx(naive_maxcut(W.tolist()))


def test_root_relaxation_k3():
    bound, V = root_relaxation(MaxCutInstance(K3))
    assert 2.0 - 1e-9 <= bound <= 2.0 + 1e-5
    assert V.shape[0] == 3


def test_root_relaxation_zero_weights():
    bound, _ = root_relaxation(MaxCutInstance(np.zeros((3, 3))))
    assert abs(bound) <= 1e-6


def test_rank_one_gram_rounds_exactly():
    z = np.array([1, -1, -1, 1, 1])
    W = random_weights(4, 5, "positive", 1.0)
    g = MaxCutInstance(W)
    cut = gw_round_and_improve(z[:, None].astype(float), g, trials=3)
    # the hyperplane reproduces z (or -z); 1-opt can only improve it
    assert cut.value >= g.cut_value(z) - 1e-12
    assert cut.xbar[0] == 1


def test_one_opt_monotone_and_local():
    C = MaxCutInstance(random_weights(9, 10)).C
    z0 = np.ones(10)
    trace = []
    z = one_opt(C, z0, trace)
    vals = [float(z0 @ C @ z0)] + trace
    assert all(b > a for a, b in zip(vals, vals[1:]))
    for i in range(10):
        y = z.copy()
        y[i] = -y[i]
        assert y @ C @ y <= z @ C @ z + 1e-9


@pytest.mark.parametrize("kind", ["positive", "negative", "mixed", "real"])
@pytest.mark.parametrize("seed", range(3))
def test_branch_and_bound_without_leaf_enumeration(kind, seed):
    """leaf_size 0 forces the SDP bound at every node."""
    W = random_weights(100 + seed, 9, kind)
    g = MaxCutInstance(W)
    rep = solve_maxcut(g, SolverConfig(leaf_size=0))
    ref = naive_maxcut(W.tolist())
    assert rep.status == SolveStatus.OPTIMAL
    assert rep.z_lb == pytest.approx(ref, abs=1e-6 * (1 + abs(ref)))
    assert rep.best_cut.value == pytest.approx(rep.z_lb)
    assert rep.z_ub >= rep.z_lb


@settings(max_examples=15)
@given(st.integers(0, 2**31), st.integers(2, 18), st.sampled_from(["positive", "negative", "mixed", "real"]))
def test_solve_matches_brute_force(seed, n, kind):
    g = MaxCutInstance(random_weights(seed, n, kind))
    rep = solve_maxcut(g, SolverConfig(leaf_size=8))
    ref = brute_force_maxcut(g)[0]
    assert rep.z_lb == pytest.approx(ref, abs=1e-6 * (1 + abs(ref)))


def test_trivial_graphs():
    for n in (0, 1):
        rep = solve_maxcut(MaxCutInstance(np.zeros((n, n))))
        assert rep.status == SolveStatus.OPTIMAL and rep.z_lb == 0.0


def test_early_infeasible_on_parity_conflict():
    from bqpcut.core import Bqp01Instance
    # 2 y1 + 2 y2 = 1 has no 0/1 solution; rho = 0 bounds f = 0 over the (empty) feasible set
    p = to_plus_minus_one(Bqp01Instance(np.zeros((2, 2)), [0, 0], [[2, 2]], [1]))
    g = penalized_maxcut(p, 1.0, rho=0.0)
    rep = solve_maxcut(g, SolverConfig(early_cutoff=g.rho_cutoff, leaf_size=0))
    assert rep.status == SolveStatus.EARLY_INFEASIBLE
    assert brute_force_maxcut(g)[0] < g.rho_cutoff


def test_early_cutoff_not_triggered_when_reachable(one_dim):
    p = to_plus_minus_one(one_dim)
    g = penalized_maxcut(p, 3.0, rho=2.0)
    rep = solve_maxcut(g, SolverConfig(early_cutoff=g.rho_cutoff, leaf_size=0))
    assert rep.status == SolveStatus.OPTIMAL
    assert rep.best_cut.xbar.tolist() == [1, 1]


def test_node_limit_gives_time_limit_status():
    g = MaxCutInstance(random_weights(3, 20, "real"))
    rep = solve_maxcut(g, SolverConfig(node_limit=1, leaf_size=0))
    assert rep.status in (SolveStatus.TIME_LIMIT, SolveStatus.OPTIMAL)
    assert rep.z_ub >= brute_force_maxcut(g)[0] - 1e-6


def test_deterministic_reports():
    g = MaxCutInstance(random_weights(11, 14, "mixed"))
    a = solve_maxcut(g, SolverConfig(leaf_size=0))
    b = solve_maxcut(g, SolverConfig(leaf_size=0))
    assert (a.z_lb, a.z_ub, a.nodes) == (b.z_lb, b.z_ub, b.nodes)
    assert a.best_cut.xbar.tolist() == b.best_cut.xbar.tolist()


def test_feasible_from_cut(one_dim, one_dim_infeasible):
    p = to_plus_minus_one(one_dim)
    g = penalized_maxcut(p, 3.0, rho=2.0)
    assert feasible_from_cut(Cut.of(g, [1, 1]), g, 2.0, p).tolist() == [1]
    assert feasible_from_cut(Cut.of(g, [1, -1]), g, 2.0, p) is None
    # with rho too large the infeasible cut passes the threshold, which is caught
    with pytest.raises(ParameterInvalidity):
        feasible_from_cut(Cut.of(g, [1, -1]), g, 3.0, p)
