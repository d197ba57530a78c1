"""Tests for the Newton-type optimizers and their inner subproblem solvers."""

import numpy as np
import pytest
import scipy.optimize

from sketchopt.hessian_oracle import (
    FiniteSumProblem,
    convex_ridge_lambda,
    make_loss,
)
from sketchopt.optimizers import (
    OptConfig,
    OptTrace,
    cg_solve,
    cg_steihaug,
    minnorm_lsq,
    model_reduction_ratio,
    newton_cg,
    newton_mr,
    trust_region,
)


def matvec(H):
    return lambda v: H @ v


def exact_tr_2d(H, g, radius):
    """Global trust-region minimizer via eigendecomposition + scalar root."""
    w, V = np.linalg.eigh(H)
    gt = V.T @ g
    if np.all(w > 0):
        p = -V @ (gt / w)
        if np.linalg.norm(p) <= radius:
            return p
    lo = max(0.0, -w.min()) + 1e-14

    def excess(lam):
        return np.linalg.norm(gt / (w + lam)) - radius

    hi = lo + 1.0
    while excess(hi) > 0:
        hi *= 2.0
    lam = scipy.optimize.brentq(excess, lo, hi, xtol=1e-14)
    return -V @ (gt / (w + lam))


def model_value(H, g, p):
    return float(g @ p + 0.5 * p @ (H @ p))


def quadratic_problem(rng, n=60, d=5, lam=0.1):
    A = rng.standard_normal((n, d))
    labels = rng.standard_normal(n)
    return FiniteSumProblem(A=A, labels=labels, loss=make_loss("quadratic"),
                            ridge_lambda=lam)


def nlls_problem(rng, n=200, d=5, lam=0.0):
    A = rng.standard_normal((n, d))
    w_star = rng.standard_normal(d)
    labels = (A @ w_star >= 0).astype(float)
    return FiniteSumProblem(A=A, labels=labels,
                            loss=make_loss("nlls_classification"),
                            ridge_lambda=lam)


def accepted(trace: OptTrace, column):
    vals = getattr(trace, column)
    return [v for v, a in zip(vals, trace.accepted) if a]


# ---------------------------------------------------------------------------
# cg_solve
# ---------------------------------------------------------------------------


def test_cg_identity_single_step():
    g = np.array([1.0, 1.0])
    p = cg_solve(matvec(np.eye(2)), g, cap=100, tol=1e-10)
    np.testing.assert_allclose(p, -g, atol=1e-12)


def test_cg_diagonal_closed_form():
    H = np.diag([1.0, 10.0])
    g = np.array([1.0, 1.0])
    p = cg_solve(matvec(H), g, cap=100, tol=1e-12)
    np.testing.assert_allclose(p, [-1.0, -0.1], atol=1e-10)


def test_cg_negative_curvature_at_start_falls_back_to_steepest():
    H = np.diag([-1.0, 1.0])
    g = np.array([1.0, 0.0])
    p = cg_solve(matvec(H), g, cap=100, tol=1e-10)
    np.testing.assert_allclose(p, -g, atol=1e-14)


def test_cg_negative_curvature_later_returns_descent_iterate():
    H = np.diag([1.0, 2.0, -0.5])
    g = np.array([1.0, 1.0, 0.05])
    p = cg_solve(matvec(H), g, cap=100, tol=1e-12)
    assert p @ g < 0.0
    assert np.all(np.isfinite(p))


def test_cg_zero_gradient():
    p = cg_solve(matvec(np.eye(3)), np.zeros(3), cap=10, tol=1e-10)
    np.testing.assert_allclose(p, np.zeros(3), atol=1e-15)


# ---------------------------------------------------------------------------
# minnorm_lsq
# ---------------------------------------------------------------------------


def test_minnorm_invertible_matches_inverse():
    rng = np.random.default_rng(60)
    M = rng.standard_normal((5, 5))
    H = M @ M.T + 0.5 * np.eye(5)
    g = rng.standard_normal(5)
    p = minnorm_lsq(matvec(H), g, cap=200, tol=1e-12)
    np.testing.assert_allclose(p, -np.linalg.solve(H, g), atol=1e-8)


def test_minnorm_zero_on_kernel():
    H = np.diag([1.0, 0.0])
    g = np.array([1.0, 1.0])
    p = minnorm_lsq(matvec(H), g, cap=50, tol=1e-12)
    np.testing.assert_allclose(p, [-1.0, 0.0], atol=1e-10)


def test_minnorm_matches_dense_pseudoinverse():
    rng = np.random.default_rng(61)
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    w = np.array([2.0, -1.0, 0.5, -0.25, 0.0, 0.0])
    H = (Q * w) @ Q.T
    H = 0.5 * (H + H.T)
    g = rng.standard_normal(6)
    p = minnorm_lsq(matvec(H), g, cap=200, tol=1e-14)
    np.testing.assert_allclose(p, -np.linalg.pinv(H) @ g, atol=1e-6)


# ---------------------------------------------------------------------------
# cg_steihaug
# ---------------------------------------------------------------------------


def test_steihaug_zero_gradient_returns_zero():
    p = cg_steihaug(matvec(np.eye(2)), np.zeros(2), radius=1.0, cap=10,
                    tol=1e-10)
    np.testing.assert_allclose(p, np.zeros(2), atol=1e-15)


def test_steihaug_interior_newton_point():
    g = np.array([0.3, -0.2])
    p = cg_steihaug(matvec(np.eye(2)), g, radius=1.0, cap=10, tol=1e-12)
    np.testing.assert_allclose(p, -g, atol=1e-12)


def test_steihaug_negative_curvature_boundary_matches_exact():
    H = np.diag([-1.0, 1.0])
    g = np.array([1.0, 0.0])
    p = cg_steihaug(matvec(H), g, radius=1.0, cap=10, tol=1e-12)
    np.testing.assert_allclose(p, [-1.0, 0.0], atol=1e-10)
    exact = exact_tr_2d(H, g, 1.0)
    assert abs(model_value(H, g, p) - model_value(H, g, exact)) <= 1e-8


def test_steihaug_matches_exact_2d_when_newton_point_interior():
    rng = np.random.default_rng(62)
    for _ in range(50):
        M = rng.standard_normal((2, 2))
        H = M @ M.T + 0.2 * np.eye(2)
        g = rng.standard_normal(2)
        radius = 1.1 * np.linalg.norm(np.linalg.solve(H, g))
        p = cg_steihaug(matvec(H), g, radius=radius, cap=10, tol=1e-14)
        exact = exact_tr_2d(H, g, radius)
        assert abs(model_value(H, g, p) - model_value(H, g, exact)) <= 1e-8


def test_steihaug_feasible_with_nonpositive_model_value():
    rng = np.random.default_rng(63)
    for _ in range(50):
        M = rng.standard_normal((2, 2))
        H = 0.5 * (M + M.T)  # possibly indefinite
        g = rng.standard_normal(2)
        radius = abs(rng.standard_normal()) + 0.1
        p = cg_steihaug(matvec(H), g, radius=radius, cap=10, tol=1e-12)
        assert np.linalg.norm(p) <= radius + 1e-12
        m = model_value(H, g, p)
        assert m <= 0.0
        # never better than the global subproblem minimum
        exact = exact_tr_2d(H, g, radius)
        assert m >= model_value(H, g, exact) - 1e-9


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        OptConfig(line_search_rho=0.0)
    with pytest.raises(ValueError):
        OptConfig(line_search_rho=1.0)
    with pytest.raises(ValueError):
        OptConfig(tr_eta=1.5)
    with pytest.raises(ValueError):
        OptConfig(tr_gamma=0.9)
    with pytest.raises(ValueError):
        OptConfig(scheme="ls")  # sampling scheme without sample_size
    with pytest.raises(ValueError):
        OptConfig(scheme="nonsense", sample_size=10)


def test_model_reduction_ratio_degenerate_rule():
    rho, degenerate = model_reduction_ratio(actual=0.0, predicted=0.0,
                                            step_norm=0.0)
    assert rho == 1.0 and degenerate
    rho, degenerate = model_reduction_ratio(actual=-0.5, predicted=-1.0,
                                            step_norm=1.0)
    assert rho == pytest.approx(0.5) and not degenerate


# ---------------------------------------------------------------------------
# newton_cg
# ---------------------------------------------------------------------------


def test_newton_cg_full_quadratic_converges_fast():
    rng = np.random.default_rng(64)
    problem = quadratic_problem(rng)
    trace = newton_cg(problem, OptConfig(grad_tol=1e-10))
    assert trace.status == "converged"
    assert trace.grad_norm[-1] <= 1e-10
    assert trace.iteration[-1] <= 2
    F = accepted(trace, "objective")
    assert all(b <= a + 1e-15 for a, b in zip(F, F[1:]))


def test_newton_cg_leverage_scheme_reaches_tolerance():
    rng = np.random.default_rng(65)
    problem = quadratic_problem(rng, n=300, d=5, lam=0.1)
    cfg = OptConfig(scheme="ls", sample_size=150, grad_tol=1e-6, seed=2,
                    max_outer=60)
    trace = newton_cg(problem, cfg)
    assert trace.status == "converged"
    assert trace.grad_norm[-1] <= 1e-6
    F = accepted(trace, "objective")
    assert all(b <= a + 1e-15 for a, b in zip(F, F[1:]))


def test_newton_cg_error_decay_near_solution():
    rng = np.random.default_rng(66)
    problem = nlls_problem(rng, n=300, d=4)
    problem.ridge_lambda = convex_ridge_lambda(problem) * 1e-3
    ref = newton_cg(problem, OptConfig(grad_tol=1e-12, max_outer=100))
    x_star = ref.x_final
    cfg = OptConfig(scheme="ls", sample_size=200, grad_tol=1e-11,
                    max_outer=100, seed=3, keep_iterates=True)
    trace = newton_cg(problem, cfg)
    errs = [np.linalg.norm(x - x_star) for x in trace.iterates]
    tail = [e for e in errs if e > 1e-11][-5:]
    assert len(tail) >= 2
    assert all(b <= 0.9 * a for a, b in zip(tail, tail[1:]))


# ---------------------------------------------------------------------------
# newton_mr
# ---------------------------------------------------------------------------


def test_newton_mr_matches_newton_cg_on_strongly_convex_quadratic():
    rng = np.random.default_rng(67)
    problem = quadratic_problem(rng)
    t_cg = newton_cg(problem, OptConfig(grad_tol=1e-10))
    t_mr = newton_mr(problem, OptConfig(grad_tol=1e-10))
    assert np.linalg.norm(t_cg.x_final - t_mr.x_final) <= 1e-8


def test_newton_mr_nonconvex_gradnorm_monotone():
    rng = np.random.default_rng(68)
    problem = nlls_problem(rng, n=200, d=4)
    trace = newton_mr(problem, OptConfig(grad_tol=1e-5, max_outer=100))
    assert trace.status == "converged"
    assert trace.grad_norm[-1] <= 1e-5
    G = accepted(trace, "grad_norm")
    assert all(b <= a + 1e-15 for a, b in zip(G, G[1:]))


# ---------------------------------------------------------------------------
# trust_region
# ---------------------------------------------------------------------------


def test_trust_region_full_quadratic_accepts_everything():
    rng = np.random.default_rng(69)
    problem = quadratic_problem(rng)
    trace = trust_region(problem, OptConfig(grad_tol=1e-8))
    assert trace.status == "converged"
    assert trace.grad_norm[-1] <= 1e-8
    assert all(trace.accepted)
    radii = trace.step_or_radius[1:]
    assert all(b >= a for a, b in zip(radii, radii[1:]))


def test_trust_region_rejections_keep_objective_and_shrink_radius():
    rng = np.random.default_rng(70)
    problem = nlls_problem(rng, n=400, d=6)
    cfg = OptConfig(scheme="uniform", sample_size=8, grad_tol=1e-10,
                    max_outer=60, tr_delta0=100.0, seed=1)
    trace = trust_region(problem, cfg)
    rejected = [i for i, a in enumerate(trace.accepted) if not a]
    assert rejected, "expected at least one rejected step with a crude sketch"
    for i in rejected:
        assert trace.objective[i] == trace.objective[i - 1]
        assert trace.step_or_radius[i] < trace.step_or_radius[i - 1]
    F = accepted(trace, "objective")
    assert all(b <= a + 1e-15 for a, b in zip(F, F[1:]))


# ---------------------------------------------------------------------------
# shared trace invariants
# ---------------------------------------------------------------------------


def run_all_three(problem, **kw):
    return [
        newton_cg(problem, OptConfig(**kw)),
        newton_mr(problem, OptConfig(**kw)),
        trust_region(problem, OptConfig(**kw)),
    ]


def test_oracle_calls_strictly_increasing():
    rng = np.random.default_rng(71)
    problem = nlls_problem(rng, n=100, d=4, lam=0.01)
    for trace in run_all_three(problem, scheme="uniform", sample_size=20,
                               grad_tol=1e-6, max_outer=20, seed=5):
        calls = trace.oracle_calls
        assert all(b > a for a, b in zip(calls, calls[1:]))


def test_budget_cutoff_overshoots_at_most_one_iteration():
    rng = np.random.default_rng(72)
    problem = nlls_problem(rng, n=300, d=5)
    for trace in run_all_three(problem, scheme="ls", sample_size=50,
                               grad_tol=1e-14, max_outer=500,
                               max_oracle_calls=40, seed=6):
        assert trace.status == "budget"
        assert len(trace.oracle_calls) >= 2
        # every record but the last was within budget
        assert trace.oracle_calls[-2] <= 40


def test_identical_seed_identical_trace():
    rng = np.random.default_rng(73)
    problem = nlls_problem(rng, n=150, d=4)
    cfg = dict(scheme="uniform", sample_size=25, grad_tol=1e-6, max_outer=30,
               seed=9)
    for algo in (newton_cg, newton_mr, trust_region):
        t1 = algo(problem, OptConfig(**cfg))
        t2 = algo(problem, OptConfig(**cfg))
        assert t1.objective == t2.objective
        assert t1.grad_norm == t2.grad_norm
        assert t1.oracle_calls == t2.oracle_calls
        np.testing.assert_array_equal(t1.x_final, t2.x_final)
        t3 = algo(problem, OptConfig(**{**cfg, "seed": 10}))
        assert t1.objective != t3.objective


def test_ls_det_scheme_runs_end_to_end():
    rng = np.random.default_rng(74)
    problem = nlls_problem(rng, n=200, d=4)
    cfg = OptConfig(scheme="ls-det", sample_size=30, ls_det_fraction=0.5,
                    grad_tol=1e-5, max_outer=60, seed=11)
    trace = trust_region(problem, cfg)
    assert trace.status in ("converged", "max_outer")
    F = accepted(trace, "objective")
    assert F[-1] < F[0]
