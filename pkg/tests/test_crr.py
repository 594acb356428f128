import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import gross_fixture
from robust_estim.core import (
    GroundTruthReg,
    InvalidK,
    MissingTruth,
    Projection,
    RegressionProblem,
    SolverConfig,
    Termination,
    projector,
)
from robust_estim.crr import crr_step, iterate_hard_threshold, solve_crr, solve_crr_traced
from robust_estim.datagen import CorruptionPlan, gen_regression
from robust_estim.diagnostics import oracle_trimmed_ls


def test_step_hand_example():
    X = np.ones((1, 4))
    y = np.array([0.0, 0.0, 0.0, 8.0])
    np.testing.assert_allclose(crr_step(Projection(X), y, np.zeros(4), 1), [0, 0, 0, 6], atol=1e-14)
    # the dense form of the projection gives the same step
    np.testing.assert_allclose(crr_step(projector(X), y, np.zeros(4), 1), [0, 0, 0, 6], atol=1e-14)


def test_step_clean_fixed_point(rng):
    X = rng.standard_normal((3, 25))
    y = X.T @ rng.standard_normal(3)
    np.testing.assert_allclose(crr_step(Projection(X), y, np.zeros(25), 4), 0.0, atol=1e-12)


def test_step_k_zero(rng):
    X = rng.standard_normal((2, 10))
    out = crr_step(Projection(X), rng.standard_normal(10), rng.standard_normal(10), 0)
    np.testing.assert_array_equal(out, np.zeros(10))


def test_clean_noiseless_one_iteration(rng):
    X = rng.standard_normal((4, 50))
    w = rng.standard_normal(4)
    est = solve_crr(RegressionProblem(X=X, y=X.T @ w), SolverConfig(k=5))
    np.testing.assert_allclose(est.w, w, atol=1e-10)
    assert np.count_nonzero(np.abs(est.b) > 1e-10) == 0
    assert est.iters == 1 and est.termination == Termination.CONVERGED


def test_single_gross_corruption_matches_oracle():
    prob = gross_fixture(seed=3, n=20, d=2, k_star=1, magnitude=15.0)
    est = solve_crr(prob, SolverConfig(k=1))
    orc = oracle_trimmed_ls(prob.X, prob.y, 1)
    assert est.support.tolist() == prob.truth.support.tolist() == list(orc.support)
    np.testing.assert_allclose(est.w, prob.truth.w_star, atol=1e-8)


def test_small_instance_matches_oracle():
    prob = gen_regression(12, 2, 0.1, CorruptionPlan(2, low=5.0, high=10.0), seed=11)
    est = solve_crr(prob, SolverConfig(k=2, tol=1e-12))
    orc = oracle_trimmed_ls(prob.X, prob.y, 2)
    assert tuple(est.support) == orc.support
    np.testing.assert_allclose(est.w, orc.w, atol=1e-8)


def test_default_k_from_truth_and_missing():
    prob = gross_fixture(k_star=2)
    assert len(solve_crr(prob).support) <= 2
    bare = RegressionProblem(X=prob.X, y=prob.y)
    with pytest.raises(InvalidK):
        solve_crr(bare)
    with pytest.raises(MissingTruth):
        solve_crr_traced(bare, SolverConfig(k=1))


def test_k_below_k_star_still_runs():
    prob = gross_fixture(k_star=3, n=30)
    est = solve_crr(prob, SolverConfig(k=1))
    assert len(est.support) <= 1


def test_max_iters_termination():
    prob = gen_regression(200, 5, 1.0, CorruptionPlan(20), seed=0)
    est = solve_crr(prob, SolverConfig(k=40, tol=1e-300, max_iters=2))
    assert est.termination == Termination.MAX_ITERS and est.iters == 2


def test_traced_matches_untraced_and_bookkeeping():
    prob = gross_fixture(seed=5, n=40, d=3, k_star=3)
    cfg = SolverConfig(k=3)
    est, tr = solve_crr_traced(prob, cfg)
    plain = solve_crr(prob, cfg)
    np.testing.assert_array_equal(est.w, plain.w)
    np.testing.assert_array_equal(est.b, plain.b)
    assert len(tr) == est.iters + 1
    assert (tr.md[0], tr.fa[0], tr.ci[0]) == (3, 0, 0)
    assert tr.md[-1] == tr.fa[-1] == 0 and tr.ci[-1] == 3
    assert tr.lambda_norm[-1] <= 1e-10
    # recorded regression fixture: the error does not grow after the first step
    assert all(b <= a + 1e-12 for a, b in zip(tr.b_err[1:], tr.b_err[2:]))
    rows = list(tr.rows())
    assert rows[0]["t"] == 0 and set(rows[0]) == {"t", "lambda_norm", "md", "fa", "ci", "b_err",
                                                  "w_err", "objective"}


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(20, 80), d=st.integers(1, 4),
       k=st.integers(0, 6), sigma=st.sampled_from([0.0, 0.1, 1.0]))
def test_objective_not_above_start_and_deterministic(seed, n, d, k, sigma):
    prob = gen_regression(n, d, sigma, CorruptionPlan(min(k, 3)), seed)
    cfg = SolverConfig(k=k)
    est = solve_crr(prob, cfg)
    f0 = Projection(prob.X).objective(prob.y, np.zeros(n))
    assert est.objective <= f0 + 1e-9 * max(1.0, f0)
    assert np.count_nonzero(est.b) <= k
    again = solve_crr(prob, cfg)
    np.testing.assert_array_equal(est.w, again.w)
    np.testing.assert_array_equal(est.b, again.b)


def test_restart_at_fixed_point_stops_in_one_step():
    prob = gen_regression(100, 3, 0.5, CorruptionPlan(5), seed=2)
    proj = Projection(prob.X)
    b, _, term = iterate_hard_threshold(proj, prob.y, 10, tol=1e-13)
    assert term == Termination.CONVERGED
    b2, iters, _ = iterate_hard_threshold(proj, prob.y, 10, tol=1e-9, b0=b)
    assert iters == 1
