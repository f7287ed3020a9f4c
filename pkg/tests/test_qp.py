from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnpvlc.qp import QpError, QpInfeasibleError, QpProblem, QpUnboundedError, solve_qp


def enumerate_active_sets(Q, c, A, b):
    """Brute-force minimiser of a strictly convex QP with A x <= b.

    Walks active sets by size; the first one whose equality-constrained
    minimiser is primal feasible with nonnegative multipliers is optimal.
    """
    n, m = c.size, b.size
    for k in range(0, min(n, m) + 1):
        for S in combinations(range(m), k):
            S = list(S)
            K = np.block([[Q, A[S].T], [A[S], np.zeros((k, k))]])
            try:
                sol = np.linalg.solve(K, np.concatenate([-c, b[S]]))
            except np.linalg.LinAlgError:
                continue
            x, lam = sol[:n], sol[n:]
            if np.all(A @ x <= b + 1e-9) and np.all(lam >= -1e-9):
                return x
    raise AssertionError("no KKT active set found")


def _kkt_ok(res):
    return res.stationarity <= 1e-8 and res.primal_residual <= 1e-9 and res.complementarity <= 1e-8


def test_symmetric_example():
    res = solve_qp(QpProblem(2 * np.eye(2), np.zeros(2), A_ub=[[-1.0, -1.0]], b_ub=[-1.0]))
    assert res.x == pytest.approx([0.5, 0.5], abs=1e-12)
    assert res.converged and _kkt_ok(res)
    assert res.lambda_ub[0] == pytest.approx(1.0, abs=1e-10)


def test_box_constrained_separable_is_clamped(rng):
    d = rng.uniform(0.5, 3.0, 6)
    target = rng.uniform(-1.0, 2.0, 6)
    res = solve_qp(QpProblem(np.diag(d), -d * target, A_ub=np.eye(6), b_ub=np.ones(6)))
    assert res.x == pytest.approx(np.clip(target, 0.0, 1.0), abs=1e-12)
    assert _kkt_ok(res)


@pytest.mark.parametrize("seed", range(6))
def test_random_qp_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    n, m = 12, 16
    R = rng.standard_normal((n, n))
    Q = R @ R.T + 0.1 * np.eye(n)
    c = rng.standard_normal(n) * 5
    A = rng.standard_normal((m, n))
    b = rng.uniform(0.1, 1.0, m)  # x = 0 is strictly feasible
    res = solve_qp(QpProblem(Q, c, A, b, nonneg=False))
    oracle = enumerate_active_sets(Q, c, A, b)
    prob = QpProblem(Q, c, A, b, nonneg=False)
    assert res.converged and _kkt_ok(res)
    assert abs(res.objective - prob.objective(oracle)) <= 1e-6 * max(1.0, abs(prob.objective(oracle)))


def test_singular_hessian_follows_rays_to_vertex():
    # linear objective over the simplex: optimum at the cheapest vertex
    c = np.array([3.0, -1.0, 2.0])
    res = solve_qp(QpProblem(np.zeros((3, 3)), c, A_ub=[[1.0, 1.0, 1.0]], b_ub=[1.0]))
    assert res.x == pytest.approx([0.0, 1.0, 0.0], abs=1e-12)


def test_equality_constraints_and_warm_start(rng):
    Q = np.diag([1.0, 2.0, 3.0])
    prob = QpProblem(Q, np.array([-1.0, -1.0, -1.0]), A_eq=[[1.0, 1.0, 1.0]], b_eq=[1.0])
    cold = solve_qp(prob)
    warm = solve_qp(prob, x0=np.array([0.2, 0.3, 0.5]))
    # stationarity on the plane: Q x + c = mu 1
    g = Q @ cold.x - 1.0
    assert np.ptp(g) <= 1e-10 and cold.x.sum() == pytest.approx(1.0)
    assert warm.x == pytest.approx(cold.x, abs=1e-12)


def test_infeasible_and_unbounded_are_reported():
    with pytest.raises(QpInfeasibleError) as info:
        solve_qp(QpProblem(np.eye(2), np.zeros(2), A_ub=[[1.0, 1.0]], b_ub=[-1.0]))
    assert info.value.violation > 0
    with pytest.raises(QpInfeasibleError):
        solve_qp(QpProblem(np.eye(2), np.zeros(2), A_eq=[[1.0, 1.0], [1.0, 1.0]], b_eq=[1.0, 2.0]))
    with pytest.raises(QpUnboundedError):
        solve_qp(QpProblem(np.zeros((2, 2)), np.array([-1.0, 0.0])))
    with pytest.raises(QpError):
        QpProblem(np.eye(3), np.zeros(2))


def test_iteration_limit_returns_flagged_iterate(rng):
    n = 12
    R = rng.standard_normal((n, n))
    prob = QpProblem(R @ R.T, rng.standard_normal(n) * 10, A_ub=rng.standard_normal((16, n)), b_ub=np.ones(16))
    res = solve_qp(prob, max_iter=1)
    assert not res.converged
    assert prob.max_violation(res.x) <= 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_solution_never_worse_than_random_feasible_points(seed):
    rng = np.random.default_rng(seed)
    n = 5
    R = rng.standard_normal((n, n))
    prob = QpProblem(R @ R.T, rng.standard_normal(n), A_ub=np.ones((1, n)), b_ub=[1.0])
    res = solve_qp(prob)
    pts = rng.dirichlet(np.ones(n + 1), size=2000)[:, :n]
    vals = 0.5 * np.einsum("ki,ij,kj->k", pts, prob.Q, pts) + pts @ prob.c
    assert res.objective <= vals.min() + 1e-10
    assert _kkt_ok(res)
