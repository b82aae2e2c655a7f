import numpy as np
import pytest

from matcube.numerics import random_symmetric
from matcube.sdp import SdpError, SdpProblem, solve


def test_min_eigenvalue_program():
    # min <C, X> s.t. tr X = 1, X >= 0  has optimum lambda_min(C)
    rng = np.random.default_rng(0)
    for _ in range(10):
        C = random_symmetric(rng, 4)
        prob = SdpProblem([4], [C], [[np.eye(4)]], np.array([1.0]))
        sol = solve(prob)
        assert sol.status == "optimal"
        assert sol.primal_obj == pytest.approx(np.linalg.eigvalsh(C)[0], abs=1e-6)


def test_block_diagonal_lp_embedding():
    # diagonal blocks reduce to an LP: min x1 + 2 x2, x1 + x2 = 1, x >= 0
    prob = SdpProblem([1, 1], [np.array([[1.0]]), np.array([[2.0]])],
                      [[np.array([[1.0]]), np.array([[1.0]])]], np.array([1.0]))
    sol = solve(prob)
    assert sol.status == "optimal"
    assert sol.primal_obj == pytest.approx(1.0, abs=1e-6)


def _known_optimum_problem(rng, dims, p):
    """Build a problem with a complementary primal-dual pair, so the optimal
    value <C, X0> is known by strong duality."""
    X0, Z0, C = [], [], []
    y0 = rng.standard_normal(p)
    A = [[None] * len(dims) for _ in range(p)]
    for j, d in enumerate(dims):
        U = np.linalg.qr(rng.standard_normal((d, d)))[0]
        r = rng.integers(1, d + 1)
        wx = np.concatenate([rng.uniform(0.5, 2.0, size=r), np.zeros(d - r)])
        wz = np.concatenate([np.zeros(r), rng.uniform(0.5, 2.0, size=d - r)])
        X0.append(U @ np.diag(wx) @ U.T)
        Z0.append(U @ np.diag(wz) @ U.T)
        for k in range(p):
            A[k][j] = random_symmetric(rng, d)
        C.append(Z0[j] + sum(y0[k] * A[k][j] for k in range(p)))
    b = np.array([sum(np.tensordot(A[k][j], X0[j]) for j in range(len(dims)))
                  for k in range(p)])
    opt = sum(np.tensordot(C[j], X0[j]) for j in range(len(dims)))
    return SdpProblem(dims, C, A, b), float(opt)


def test_random_problems_reach_known_optimum():
    rng = np.random.default_rng(1)
    for _ in range(30):
        dims = [int(d) for d in rng.integers(1, 6, size=rng.integers(1, 3))]
        p = int(rng.integers(1, 2 + sum(dims)))
        prob, opt = _known_optimum_problem(rng, dims, p)
        sol = solve(prob)
        assert sol.status == "optimal"
        scale = 1.0 + abs(opt)
        assert abs(sol.primal_obj - opt) <= 1e-5 * scale
        assert sol.residuals["primal"] <= 1e-6
        assert sol.residuals["dual"] <= 1e-6
        assert sol.residuals["gap"] <= 1e-6


def test_solution_kkt_residuals_recomputed_independently():
    rng = np.random.default_rng(2)
    prob, _ = _known_optimum_problem(rng, [4, 3], 5)
    sol = solve(prob)
    assert sol.status == "optimal"
    # primal feasibility
    for k in range(prob.n_constraints):
        lhs = sum(np.tensordot(prob.A[k][j], sol.X[j]) for j in range(2))
        assert lhs == pytest.approx(prob.b[k], abs=1e-5)
    # dual feasibility and conic membership
    for j in range(2):
        resid = prob.C[j] - sol.Z[j] - sum(
            sol.y[k] * prob.A[k][j] for k in range(prob.n_constraints))
        assert np.linalg.norm(resid) <= 1e-5
        assert np.linalg.eigvalsh(sol.X[j])[0] >= -1e-8
        assert np.linalg.eigvalsh(sol.Z[j])[0] >= -1e-8


def test_unconstrained_problem():
    prob = SdpProblem([2], [np.eye(2)], [], np.zeros(0))
    sol = solve(prob)
    assert sol.status == "optimal"
    assert sol.primal_obj == pytest.approx(0.0, abs=1e-6)


def test_validation_errors():
    with pytest.raises(SdpError):
        SdpProblem([2], [np.eye(3)], [], np.zeros(0))
    with pytest.raises(SdpError):
        SdpProblem([0], [np.zeros((0, 0))], [], np.zeros(0))
    with pytest.raises(SdpError):
        SdpProblem([2], [np.eye(2)], [[np.eye(2)]], np.array([np.inf]))
    with pytest.raises(SdpError):
        SdpProblem([2], [np.eye(2)], [], np.array([1.0]))


def test_debug_log_emits_iterates(monkeypatch, capfd):
    monkeypatch.setenv("MATCUBE_LOG", "debug")
    prob = SdpProblem([2], [np.eye(2)], [[np.eye(2)]], np.array([1.0]))
    solve(prob)
    assert '"mu"' in capfd.readouterr().err
