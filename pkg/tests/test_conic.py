import numpy as np
import pytest

from rdaplan.geometry import ConeKind, make_ball, make_polytope
from rdaplan.subsolvers import conic
from rdaplan.subsolvers.conic import (ConicLsqProblem, ball_decomposition,
                                      project_feasible, solve_conic_lsq)

ORTH2 = ConeKind("orthant", 2)
ORTH3 = ConeKind("orthant", 3)
ORTH4 = ConeKind("orthant", 4)
SOC3 = ConeKind("second-order", 3)


def _square_D():
    return make_polytope([[0, 0], [1, 0], [1, 1], [0, 1]]).D


def _random_problem(rng, soc=False):
    n_lam = 3 if soc else 4
    n_mu = 4
    n = n_lam + n_mu + 1
    M = rng.normal(size=(3, n))
    r = rng.normal(size=3)
    D = (make_ball((0.0, 0.0), 1.0).D if soc else _square_D())
    return ConicLsqProblem(
        M=M, r=r, n_lam=n_lam, n_mu=n_mu,
        lam_cone=SOC3 if soc else ORTH4, mu_cone=ORTH4, D=D)


def test_ball_decomposition_reconstructs():
    D = _square_D()
    V, w = ball_decomposition(D)
    np.testing.assert_allclose(V @ np.diag(w) @ V.T, D @ D.T, atol=1e-12)
    assert np.all(w >= 0)


def test_validation():
    with pytest.raises(ValueError):
        ConicLsqProblem(M=np.zeros((3, 9)), r=np.zeros(2), n_lam=4, n_mu=4,
                        lam_cone=ORTH4, mu_cone=ORTH4, D=_square_D())
    with pytest.raises(ValueError):
        ConicLsqProblem(M=np.zeros((3, 5)), r=np.zeros(3), n_lam=4, n_mu=4,
                        lam_cone=ORTH4, mu_cone=ORTH4, D=_square_D())


def test_project_feasible_properties(rng):
    for soc in (False, True):
        prob = _random_problem(rng, soc=soc)
        for _ in range(30):
            v = rng.normal(size=prob.n) * 2
            pv = project_feasible(prob, v)
            lam = pv[:prob.n_lam]
            # feasibility of the image
            assert np.linalg.norm(prob.D.T @ lam) <= 1.0 + 1e-7
            if soc:
                assert np.linalg.norm(lam[:-1]) <= lam[-1] + 1e-7
            else:
                assert np.all(lam >= -1e-12)
            assert np.all(pv[prob.n_lam:] >= -1e-12)
            # idempotency
            np.testing.assert_allclose(project_feasible(prob, pv), pv,
                                       atol=1e-6)
            # a projection can only move points closer to other images
            y = project_feasible(prob, rng.normal(size=prob.n) * 2)
            assert (np.linalg.norm(pv - y)
                    <= np.linalg.norm(v - y) + 1e-9)


def test_interior_unconstrained_optimum(rng):
    # target chosen strictly inside the feasible set: solver must match
    # the plain least-squares solution
    n_lam, n_mu = 4, 4
    n = n_lam + n_mu + 1
    M = np.eye(3, n)
    x_star = np.full(n, 0.1)
    prob = ConicLsqProblem(M=M, r=M @ x_star, n_lam=n_lam, n_mu=n_mu,
                           lam_cone=ORTH4, mu_cone=ORTH4, D=_square_D())
    x, report = solve_conic_lsq(prob)
    assert report.status == "optimal"
    np.testing.assert_allclose(M @ x, M @ x_star, atol=1e-6)


def test_matches_conic_interior_point_oracle(rng):
    import cvxpy as cp

    for soc in (False, True):
        for _ in range(10):
            prob = _random_problem(rng, soc=soc)
            x, report = solve_conic_lsq(prob)
            lam = x[:prob.n_lam]
            assert np.linalg.norm(prob.D.T @ lam) <= 1.0 + 1e-6
            xv = cp.Variable(prob.n)
            lamv = xv[:prob.n_lam]
            cons = [xv[prob.n_lam:] >= 0,
                    cp.norm(prob.D.T @ lamv) <= 1]
            if soc:
                cons.append(cp.norm(lamv[:-1]) <= lamv[-1])
            else:
                cons.append(lamv >= 0)
            cvx = cp.Problem(
                cp.Minimize(0.5 * cp.sum_squares(prob.M @ xv - prob.r)),
                cons)
            cvx.solve(solver=cp.CLARABEL)
            assert report.objective == pytest.approx(cvx.value, abs=1e-5)


def test_warm_start_helps(rng):
    base = _random_problem(rng)
    x, rep_cold = solve_conic_lsq(base)
    warm = ConicLsqProblem(M=base.M, r=base.r + 1e-3, n_lam=base.n_lam,
                           n_mu=base.n_mu, lam_cone=base.lam_cone,
                           mu_cone=base.mu_cone, D=base.D, warm_start=x)
    _, rep_warm = solve_conic_lsq(warm)
    assert rep_warm.iterations <= rep_cold.iterations


def test_deterministic(rng):
    prob = _random_problem(rng)
    x1, _ = solve_conic_lsq(prob)
    x2, _ = solve_conic_lsq(prob)
    assert np.array_equal(x1, x2)


def test_backend_parity(rng):
    from rdaplan.subsolvers import _apg_py

    if conic.BACKEND != "compiled":
        pytest.skip("compiled kernel not available")
    saved = conic._kernel
    results = []
    try:
        for kernel in (saved, _apg_py):
            conic._kernel = kernel
            xs = []
            rng_local = np.random.default_rng(7)
            for i in range(6):
                prob = _random_problem(rng_local, soc=bool(i % 2))
                x, _rep = solve_conic_lsq(prob)
                xs.append(x)
            results.append(np.concatenate(xs))
    finally:
        conic._kernel = saved
    np.testing.assert_allclose(results[0], results[1], atol=1e-9)


def test_iteration_cap_returns_feasible(rng):
    prob = _random_problem(rng)
    x, report = solve_conic_lsq(prob, max_iter=3)
    lam = x[:prob.n_lam]
    assert np.linalg.norm(prob.D.T @ lam) <= 1.0 + 1e-7
    assert np.all(x[prob.n_lam:] >= -1e-12)
