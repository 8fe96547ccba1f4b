import numpy as np
import pytest

from bqpcut.core import InstanceError, Status
from bqpcut.instances import (
    Family,
    RgiSpec,
    build_cbqp,
    build_k_cluster,
    default_cardinalities,
    densest_k_subgraph,
    gen_rgi,
    petersen_graph,
    random_cbqp,
    with_parity_conflict,
)
from bqpcut.pipeline import solve_bqp

from conftest import naive_solve


def test_rgi_deterministic_and_shaped():
    spec = RgiSpec("One", 8, 3, (-1, 1), (-3, 3), seed=5)
    a, b = gen_rgi(spec), gen_rgi(spec)
    assert a == b and a.name == b.name
    assert a.F_hat.shape == (8, 8) and a.A_hat.shape == (3, 8)
    assert not a.c_hat.any() and not a.b_hat.any()
    assert a.A_hat.min() >= -1 and a.A_hat.max() <= 1
    assert a.F_hat.min() >= -3 and a.F_hat.max() <= 3
    assert gen_rgi(RgiSpec("One", 8, 3, (-1, 1), (-3, 3), seed=6)) != a


def test_family_one_always_feasible():
    # b = 0, so y = 0 satisfies every row
    p = gen_rgi(RgiSpec(Family.ONE, 6, 4, (-7, 7), (-1, 1), seed=1))
    assert not p.residual_vector(np.zeros(6)).any()


def test_family_two_values():
    p = gen_rgi(RgiSpec("Two", 6, 2, (0, 3), (-5, 5), b_v=10, seed=2))
    assert p.b_hat.tolist() == [10, 10]
    assert p.A_hat.min() >= 0


@pytest.mark.parametrize("spec", [
    RgiSpec("One", 5, 1, (-2, 2), (-1, 1)),
    RgiSpec("One", 5, 1, (-1, 1), (-1, 1), b_v=3),
    RgiSpec("Two", 5, 1, (0, 1), (-5, 5), b_v=11),
    RgiSpec("Two", 5, 1, (0, 1), (0, 6), b_v=10),
    RgiSpec("One", 0, 1, (-1, 1), (-1, 1)),
])
def test_rgi_rejects_bad_specs(spec):
    with pytest.raises(InstanceError):
        gen_rgi(spec)


def test_parity_conflict_is_infeasible():
    base = gen_rgi(RgiSpec("One", 7, 2, (-1, 1), (-1, 1), seed=3))
    p = with_parity_conflict(base, 3)
    assert p.m == 3
    assert np.all(p.A_hat[-1] % 2 == 0) and p.b_hat[-1] % 2 == 1
    assert naive_solve(p)[0] is None


def test_k_cluster_triangle():
    adj = np.ones((3, 3), dtype=int) - np.eye(3, dtype=int)
    p = build_k_cluster(adj, 2)
    assert p.negate_display
    f_star = naive_solve(p)[0]
    # two vertices of a triangle span one edge
    assert -f_star == 1


def test_k_cluster_empty_graph():
    p = build_k_cluster(np.zeros((4, 4), dtype=int), 2)
    assert naive_solve(p)[0] == 0


def test_k_cluster_rejects_bad_input():
    with pytest.raises(InstanceError):
        build_k_cluster(np.zeros((3, 3)), 4)
    with pytest.raises(InstanceError):
        build_k_cluster(np.array([[0, 2], [2, 0]]), 1)


def test_petersen_structure():
    A = petersen_graph()
    assert A.sum() == 30 and np.all(A.sum(axis=1) == 3)
    assert np.array_equal(A, A.T) and not np.diag(A).any()
    # girth 5: no triangles and no 4-cycles
    assert np.trace(A @ A @ A) == 0
    assert all(((A @ A) * (1 - np.eye(10)))[i, j] <= 1 for i in range(10) for j in range(10))


def test_petersen_densest_five_solved():
    p = build_k_cluster(petersen_graph(), 5)
    out = solve_bqp(p)
    assert out.solution.status == Status.OPTIMAL
    assert -out.solution.objective == densest_k_subgraph(petersen_graph(), 5) == 5


def test_cbqp_linear_example():
    p = build_cbqp(np.zeros((4, 4)), -np.ones(4), k=2)
    assert naive_solve(p)[0] == -2
    assert solve_bqp(p).solution.objective == -2


def test_cbqp_default_cardinality():
    assert default_cardinalities(10) == (2, 8)
    assert default_cardinalities(2) == (1, 2)
    p = random_cbqp(10, seed=1)
    assert p.b_hat.tolist() == [2]
    assert p == random_cbqp(10, seed=1)


def test_densest_k_subgraph_small():
    path = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    assert densest_k_subgraph(path, 2) == 1
    assert densest_k_subgraph(path, 3) == 2
