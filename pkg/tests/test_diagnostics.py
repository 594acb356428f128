import itertools
from math import comb

import numpy as np
import pytest
from scipy.linalg import fractional_matrix_power
from scipy.stats import norm

from robust_estim.core import HypothesisViolated, InvalidArgs, TooLarge
from robust_estim.diagnostics import (
    angle_deg,
    bound_e0,
    bound_gaussian_sss_leading,
    d_inv_cubed,
    moment_bound,
    oracle_trimmed_ls,
    rank_one_power,
    sgsc_sgss_exact,
    ssc_sss_exact,
    ssc_sss_sampled,
    truncated_moment_mc,
    truncated_moment_quadrature,
)
from robust_estim.thresholding import group_partition

# hand evaluation: m = 80, log(e * 500) = 7.2146, sqrt(80 * (1 + 2e sqrt(6 * 7.2146)))
E0_FIXTURE = 54.23576190011212


def test_ssc_identity():
    assert ssc_sss_exact(np.eye(2), 1) == pytest.approx((0.0, 1.0))
    assert ssc_sss_exact(np.eye(2), 2) == pytest.approx((1.0, 1.0))


def test_ssc_full_support_matches_gram(rng):
    X = rng.standard_normal((3, 9))
    ev = np.linalg.eigvalsh(X @ X.T)
    lo, hi = ssc_sss_exact(X, 9)
    assert lo == pytest.approx(ev[0], abs=1e-10) and hi == pytest.approx(ev[-1], abs=1e-10)


def test_ssc_brute_force(rng):
    X = rng.standard_normal((2, 7))
    for k in range(1, 8):
        evs = [np.linalg.eigvalsh(X[:, list(S)] @ X[:, list(S)].T)
               for S in itertools.combinations(range(7), k)]
        lo, hi = ssc_sss_exact(X, k)
        assert lo == pytest.approx(min(e[0] for e in evs), abs=1e-12)
        assert hi == pytest.approx(max(e[-1] for e in evs), abs=1e-12)


def test_ssc_too_large():
    with pytest.raises(TooLarge):
        ssc_sss_exact(np.ones((1, 60)), 30)


def test_group_constants(rng):
    X = rng.standard_normal((3, 12))
    part1 = group_partition(12, 1)
    for k in (1, 4, 12):
        assert sgsc_sgss_exact(X, k, part1) == pytest.approx(ssc_sss_exact(X, k))
    part = group_partition(12, 2)
    assert sgsc_sgss_exact(X, 6, part) == pytest.approx(ssc_sss_exact(X, 12))
    glo, ghi = sgsc_sgss_exact(X, 3, part)
    plo, phi = ssc_sss_exact(X, 6)
    assert plo <= glo + 1e-12 and ghi <= phi + 1e-12


def test_sampled_is_one_sided_and_exact_when_covering(rng):
    X = rng.standard_normal((3, 10))
    lo, hi = ssc_sss_exact(X, 4)
    slo, shi = ssc_sss_sampled(X, 4, 50, seed=1)
    assert slo >= lo - 1e-12 and shi <= hi + 1e-12
    assert ssc_sss_sampled(X, 4, comb(10, 4), seed=1) == pytest.approx((lo, hi))


def test_oracle_examples(rng):
    X = np.ones((1, 4))
    res = oracle_trimmed_ls(X, np.array([1.0, 1.0, 1.0, 100.0]), 1)
    assert res.support == (3,)
    assert res.w == pytest.approx([1.0])
    X = rng.standard_normal((2, 8))
    y = rng.standard_normal(8)
    res0 = oracle_trimmed_ls(X, y, 0)
    assert res0.support == () and not res0.b.any()
    np.testing.assert_allclose(res0.w, np.linalg.lstsq(X.T, y, rcond=None)[0], atol=1e-12)


def test_oracle_against_grid_search():
    # exhaustive k-sparse b on the {-20..20} grid for tiny instances
    r = np.random.default_rng(7)
    for _ in range(3):
        n, d = 5, 1
        X = r.standard_normal((d, n))
        y = np.round(X.T @ [1.0] + r.standard_normal(n))
        y[r.integers(n)] += 12
        P = X.T @ np.linalg.solve(X @ X.T, X)
        R = np.eye(n) - P
        best = np.inf
        for i in range(n):
            for v in range(-20, 21):
                b = np.zeros(n)
                b[i] = v
                r_ = R @ (y - b)
                best = min(best, 0.5 * r_ @ r_)
        res = oracle_trimmed_ls(X, y, 1)
        # the continuous optimum is no worse than the integer grid
        assert res.objective <= best + 1e-12
        b_round = np.round(res.b)
        r_ = R @ (y - b_round)
        assert 0.5 * r_ @ r_ >= res.objective - 1e-12


def test_rank_one_power_matches_scipy(rng):
    v = rng.standard_normal(4) * 0.3
    M = np.eye(4) + np.outer(v, v)
    for p in (-1.5, -1.0, 0.5, 2.0):
        np.testing.assert_allclose(rank_one_power(v, p), np.real(fractional_matrix_power(M, p)), atol=1e-12)
    lam = rng.standard_normal(3) * 0.004
    np.testing.assert_allclose(d_inv_cubed(lam, 0.5),
                               np.real(fractional_matrix_power(np.eye(3) + np.outer(lam, lam) / 0.25, -1.5)),
                               atol=1e-12)


@pytest.mark.parametrize("sigma,tau", [(1.0, 1.0), (0.5, 1.0), (2.0, 0.5), (1.0, 2.5)])
def test_quadrature_closed_form(sigma, tau):
    # E[1{|y|>tau} y x] = lam * E[y^2 1{|y|>tau}] / s^2 with y ~ N(0, s^2)
    lam = np.array([0.3, -0.4, 0.0]) * sigma / 100
    s = np.sqrt(sigma ** 2 + lam @ lam)
    t = tau / s
    second = s ** 2 * 2 * (t * norm.pdf(t) + norm.sf(t))
    _, vec = truncated_moment_quadrature(lam, sigma, tau)
    np.testing.assert_allclose(vec, lam * second / s ** 2, rtol=1e-9, atol=1e-15)


def test_quadrature_zero_lambda():
    c, vec = truncated_moment_quadrature(np.zeros(3), 1.0, 1.0)
    assert not vec.any()
    assert c == pytest.approx(2 * (norm.pdf(1.0) + norm.sf(1.0)), rel=1e-10)


def test_hypothesis_guard():
    with pytest.raises(HypothesisViolated):
        truncated_moment_quadrature([0.1, 0, 0], 1.0, 1.0)
    with pytest.raises(InvalidArgs):
        truncated_moment_quadrature([0.001], 1.0, 0.0)


def test_mc_zero_lambda_within_3se():
    for cv in (True, False):
        est = truncated_moment_mc(np.zeros(3), 1.0, 1.0, 2 * 10**5, seed=3, control_variate=cv)
        assert np.all(np.abs(est.mean) <= 3 * est.se)


def test_mc_reproducible_and_se_rate():
    lam = np.array([0.005, 0.0, 0.0])
    a = truncated_moment_mc(lam, 1.0, 1.0, 10**5, seed=1, chunk=25000)
    b = truncated_moment_mc(lam, 1.0, 1.0, 10**5, seed=1, chunk=25000)
    np.testing.assert_array_equal(a.mean, b.mean)
    big = truncated_moment_mc(lam, 1.0, 1.0, 4 * 10**5, seed=1)
    np.testing.assert_allclose(big.se / a.se, 0.5, rtol=0.05)


def test_mc_control_variate_agrees_with_plain():
    lam = np.array([0.005, 0.002, 0.0])
    cv = truncated_moment_mc(lam, 1.0, 1.0, 10**6, seed=4, control_variate=True)
    plain = truncated_moment_mc(lam, 1.0, 1.0, 10**6, seed=4, control_variate=False)
    assert np.all(cv.se < plain.se)
    _, quad = truncated_moment_quadrature(lam, 1.0, 1.0)
    assert np.all(np.abs(cv.mean - quad) <= 4 * cv.se)
    assert np.all(np.abs(plain.mean - quad) <= 4 * plain.se)


def test_angle():
    assert angle_deg(np.array([1.0, 0]), np.array([0, 2.0])) == pytest.approx(90.0)
    assert angle_deg(np.array([1.0, 1.0]), np.array([2.0, 2.0])) == pytest.approx(0.0, abs=1e-6)


def test_bound_fixtures():
    assert bound_e0(4000, 10, 40, 40, 1.0, 0.1) == pytest.approx(E0_FIXTURE, rel=1e-12)
    assert bound_e0(4000, 10, 40, 40, 2.0, 0.1) == pytest.approx(2 * E0_FIXTURE, rel=1e-12)
    assert bound_gaussian_sss_leading(1.0, 100) == pytest.approx(100 * (1 + 3 * np.e * np.sqrt(6)))
    assert moment_bound(1.0, 1.0) == pytest.approx(0.9687, abs=1e-4)
    with pytest.raises(InvalidArgs):
        bound_e0(100, 3, 0, 0, 1.0, 0.1)
    with pytest.raises(InvalidArgs):
        bound_gaussian_sss_leading(0.0, 10)
