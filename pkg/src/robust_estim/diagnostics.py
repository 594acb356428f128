"""Oracles and numerical checks for the hard-thresholding estimators.

Everything here is ground-truth machinery: exhaustive subset-restricted
eigenvalue constants, the trimmed least-squares global optimum, a Monte-Carlo
and quadrature pair for the truncated first moment ``E[1{|y|>tau} y x]``, and
plug-in evaluations of explicit error/eigenvalue bound expressions. The bound
evaluators are soft diagnostics and never gate solver correctness.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy import integrate

from .core import HypothesisViolated, InvalidArgs, Projection, RankDeficient, TooLarge
from .thresholding import GroupPartition

MAX_SUBSETS = 10**6
_CHUNK = 20000


def _check_count(n: int, k: int) -> None:
    if not 0 <= k <= n:
        raise InvalidArgs(f"subset size {k} outside [0, {n}]")
    if comb(n, k) > MAX_SUBSETS:
        raise TooLarge(f"C({n}, {k}) = {comb(n, k)} subsets exceeds {MAX_SUBSETS}")


def _combo_chunks(n: int, k: int):
    it = itertools.combinations(range(n), k)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        yield np.array(block, dtype=int).reshape(len(block), k)


def _gram_extrema(X: np.ndarray, col_sets: np.ndarray) -> tuple[float, float]:
    """Min of lambda_min and max of lambda_max of ``X_S X_S^T`` over rows of ``col_sets``."""
    XS = X[:, col_sets]                                   # d x m x k
    G = np.einsum("imk,jmk->mij", XS, XS)
    G = 0.5 * (G + np.swapaxes(G, 1, 2))
    ev = np.linalg.eigvalsh(G)
    return float(ev[:, 0].min()), float(ev[:, -1].max())


def ssc_sss_exact(X: np.ndarray, k: int) -> tuple[float, float]:
    """Exact ``(min_S lambda_min(X_S X_S^T), max_S lambda_max(X_S X_S^T))`` over ``|S| = k``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[1]
    _check_count(n, k)
    if k == 0:
        return 0.0, 0.0
    lo, hi = np.inf, -np.inf
    for block in _combo_chunks(n, k):
        a, b = _gram_extrema(X, block)
        lo, hi = min(lo, a), max(hi, b)
    return lo, hi


def sgsc_sgss_exact(X: np.ndarray, k: int, part: GroupPartition) -> tuple[float, float]:
    """Group analogue of :func:`ssc_sss_exact` over unions of ``k`` aligned groups."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != part.n:
        raise InvalidArgs("partition length does not match X")
    g = part.n_groups
    _check_count(g, k)
    if k == 0:
        return 0.0, 0.0
    offsets = np.arange(part.d)
    lo, hi = np.inf, -np.inf
    for block in _combo_chunks(g, k):
        cols = (block[:, :, None] * part.d + offsets).reshape(len(block), k * part.d)
        a, b = _gram_extrema(X, cols)
        lo, hi = min(lo, a), max(hi, b)
    return lo, hi


def ssc_sss_sampled(X: np.ndarray, k: int, samples: int, seed: int) -> tuple[float, float]:
    """Extrema over ``samples`` random supports of size ``k``.

    One-sided: the returned ``lambda_lo`` is >= the exact constant and
    ``Lambda_hi`` is <= it. When ``samples`` is at least the number of supports
    the enumeration is exhaustive and the result is exact.
    """
    if samples < 1:
        raise InvalidArgs("samples must be >= 1")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[1]
    if not 1 <= k <= n:
        raise InvalidArgs(f"subset size {k} outside [1, {n}]")
    if samples >= comb(n, k):
        return ssc_sss_exact(X, k)
    rng = np.random.Generator(np.random.Philox(seed))
    lo, hi = np.inf, -np.inf
    done = 0
    while done < samples:
        m = min(_CHUNK, samples - done)
        sets = np.argsort(rng.random((m, n)), axis=1)[:, :k]
        a, b = _gram_extrema(X, sets)
        lo, hi = min(lo, a), max(hi, b)
        done += m
    return lo, hi


@dataclass(frozen=True)
class OracleResult:
    b: np.ndarray
    w: np.ndarray
    support: tuple
    objective: float


def oracle_trimmed_ls(X: np.ndarray, y: np.ndarray, k: int) -> OracleResult:
    """Global minimiser of ``1/2 ||(I - P_X)(y - b)||^2`` over ``||b||_0 <= k``.

    For a fixed support ``S`` the optimal ``b_S`` zeroes the residual on ``S``,
    so the objective equals the least-squares residual on the complement.
    Ties go to the lexicographically smallest support.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    d, n = X.shape
    _check_count(n, k)
    if n - k < d:
        raise InvalidArgs(f"n - k = {n - k} points left, fewer than d = {d}")
    best = None
    for S in itertools.combinations(range(n), k):
        keep = np.ones(n, dtype=bool)
        keep[list(S)] = False
        try:
            proj = Projection(X[:, keep])
        except RankDeficient:
            continue
        res = proj.residual(y[keep])
        obj = 0.5 * float(res @ res)
        if best is None or obj < best[0] - 1e-12 * max(1.0, best[0]):
            best = (obj, S, proj.coef(y[keep]))
    if best is None:
        raise RankDeficient("every complement design is rank deficient")
    obj, S, w = best
    b = np.zeros(n)
    idx = list(S)
    b[idx] = y[idx] - X[:, idx].T @ w
    return OracleResult(b=b, w=w, support=tuple(S), objective=obj)


# ---------------------------------------------------------------------------
# truncated first moment
# ---------------------------------------------------------------------------

def _check_lambda(lam, sigma: float, tau: float) -> np.ndarray:
    lam = np.asarray(lam, dtype=float).reshape(-1)
    if not sigma > 0 or not tau > 0:
        raise InvalidArgs("sigma and tau must be positive")
    if np.linalg.norm(lam) > sigma / 100:
        raise HypothesisViolated(f"||lambda|| = {np.linalg.norm(lam):.4g} exceeds sigma/100")
    return lam


def rank_one_power(v: np.ndarray, p: float) -> np.ndarray:
    """``(I + v v^T)^p`` via ``I + ((1 + |v|^2)^p - 1) v v^T / |v|^2``."""
    v = np.asarray(v, dtype=float)
    nv2 = float(v @ v)
    I = np.eye(len(v))
    if nv2 == 0:
        return I
    return I + ((1.0 + nv2) ** p - 1.0) * np.outer(v, v) / nv2


def d_inv_cubed(lam, sigma: float) -> np.ndarray:
    """``D^{-3}`` where ``D = (I + lam lam^T / sigma^2)^{1/2}``."""
    return rank_one_power(np.asarray(lam, dtype=float) / sigma, -1.5)


def moment_bound(sigma: float, tau: float) -> float:
    """Explicit closed-form upper bound on the truncation constant ``C_tau``."""
    return 2.001 / (sigma * np.sqrt(2 * np.pi)) * (tau + 1 / tau) * np.exp(-tau ** 2 / (2.001 * sigma ** 2))


def truncated_moment_quadrature(lam, sigma: float, tau: float) -> tuple[float, np.ndarray]:
    """``(C_tau, C_tau D^{-3} lam)`` with ``C_tau`` by adaptive quadrature over ``|y| > tau``."""
    lam = _check_lambda(lam, sigma, tau)
    Dm2 = rank_one_power(lam / sigma, -1.0)
    q = float(lam @ Dm2 @ lam)
    rate = 1.0 / (2 * sigma ** 2) - q / (2 * sigma ** 4)

    def integrand(y):
        return y * y * np.exp(-rate * y * y) / (sigma ** 3 * np.sqrt(2 * np.pi))

    # integrand is even; integrate one tail and double
    val, _ = integrate.quad(integrand, tau, np.inf, epsrel=1e-10, epsabs=0.0, limit=200)
    c_tau = 2.0 * val
    return c_tau, c_tau * (d_inv_cubed(lam, sigma) @ lam)


@dataclass(frozen=True)
class MomentEstimate:
    mean: np.ndarray
    se: np.ndarray
    n_samples: int


def truncated_moment_mc(lam, sigma: float, tau: float, n_samples: int, seed: int,
                        chunk: int = 10**6, control_variate: bool = True) -> MomentEstimate:
    """Monte-Carlo estimate of ``E[1{|y| > tau} y x]`` with ``y = x^T lam + g``.

    Chunk ``c`` draws from its own Philox stream keyed by ``(seed, c)``, so the
    result is reproducible for a fixed chunk size. With ``control_variate`` the
    estimator is ``lam - mean(1{|y| <= tau} y x)``, using the exactly known
    ``E[y x] = lam``; this is unbiased and has a smaller variance than the
    direct average when most of the mass of ``y^2`` lies outside ``[-tau, tau]``.
    """
    lam = _check_lambda(lam, sigma, tau)
    if n_samples < 2:
        raise InvalidArgs("n_samples must be >= 2")
    d = len(lam)
    s1 = np.zeros(d)
    s2 = np.zeros(d)
    done, c = 0, 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(c,))))
        x = rng.standard_normal((m, d))
        y = x @ lam + sigma * rng.standard_normal(m)
        inside = np.abs(y) <= tau if control_variate else np.abs(y) > tau
        z = np.where(inside, y, 0.0)[:, None] * x
        s1 += z.sum(axis=0)
        s2 += (z * z).sum(axis=0)
        done += m
        c += 1
    mean = s1 / n_samples
    var = (s2 - n_samples * mean ** 2) / (n_samples - 1)
    se = np.sqrt(np.maximum(var, 0.0) / n_samples)
    if control_variate:
        mean = lam - mean
    return MomentEstimate(mean=mean, se=se, n_samples=n_samples)


def angle_deg(u: np.ndarray, v: np.ndarray) -> float:
    """Angle between ``u`` and ``v`` in degrees; the half-angle form stays accurate near 0."""
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    a, b = np.linalg.norm(v) * u, np.linalg.norm(u) * v
    return float(np.degrees(2 * np.arctan2(np.linalg.norm(a - b), np.linalg.norm(a + b))))


# ---------------------------------------------------------------------------
# explicit bound expressions
# ---------------------------------------------------------------------------

def bound_e0(n: int, d: int, k: int, k_star: int, sigma: float, delta: float) -> float:
    """Coarse-phase noise level ``sigma sqrt(k+k*) sqrt(1 + 2e sqrt(6 log(e n / (delta (k+k*)))))``.

    ``d`` is accepted for signature symmetry; the expression does not use it.
    """
    m = k + k_star
    if m < 1 or n <= 0 or sigma < 0 or not 0 < delta < 1 or d < 1:
        raise InvalidArgs("bound_e0 needs k + k_star >= 1, n, d > 0, sigma >= 0, 0 < delta < 1")
    inner = np.log(np.e * n / (delta * m))
    if inner < 0:
        raise InvalidArgs("log argument below one; n is too small for k + k_star")
    return float(sigma * np.sqrt(m) * np.sqrt(1 + 2 * np.e * np.sqrt(6 * inner)))


def bound_gaussian_sss_leading(gamma: float, n: int) -> float:
    """Leading term ``gamma n (1 + 3e sqrt(6 log(e/gamma)))`` of the Gaussian SSS bound."""
    if not 0 < gamma <= 1 or n <= 0:
        raise InvalidArgs("need 0 < gamma <= 1 and n > 0")
    return float(gamma * n * (1 + 3 * np.e * np.sqrt(6 * np.log(np.e / gamma))))
