"""Spectral quantities of a stationary AR(d) process and its VAR(1) embedding."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import InvalidArgs, NonStationary

DEFAULT_GRID = 4096
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def companion_matrix(w) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1)
    d = len(w)
    W = np.zeros((d, d))
    W[0] = w
    W[np.arange(1, d), np.arange(d - 1)] = 1.0
    return W


def spectral_radius(w) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(companion_matrix(w)))))


def stationarity_check(w) -> bool:
    return spectral_radius(w) < 1.0 - 1e-9


def _require_stationary(w):
    w = np.asarray(w, dtype=float).reshape(-1)
    if not stationarity_check(w):
        raise NonStationary(f"AR coefficients {w} are not stationary")
    return w


def _transfer_sq(w: np.ndarray, omega) -> np.ndarray:
    """``|1 - sum_k w_k e^{ik omega}|^2`` from its real and imaginary parts."""
    omega = np.asarray(omega, dtype=float)
    ks = np.arange(1, len(w) + 1)
    phase = np.multiply.outer(omega, ks)
    re = 1.0 - np.cos(phase) @ w
    im = -(np.sin(phase) @ w)
    return re * re + im * im


def spectral_density(w, sigma: float, omega) -> np.ndarray | float:
    w = _require_stationary(w)
    out = sigma ** 2 / _transfer_sq(w, omega)
    return float(out) if np.ndim(out) == 0 else out


def _golden_min(f, a: float, b: float, tol: float = 1e-12, max_iter: int = 200) -> float:
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _grid_min(f, grid_size: int) -> float:
    """Minimum of a 2*pi-periodic scalar function: dense grid, then golden refinement."""
    if grid_size < 256:
        raise InvalidArgs(f"grid_size must be >= 256, got {grid_size}")
    h = 2 * np.pi / grid_size
    grid = np.arange(grid_size) * h
    vals = f(grid)
    i = int(np.argmin(vals))
    w0 = _golden_min(lambda t: float(f(np.array([t]))[0]), grid[i] - h, grid[i] + h)
    return min(float(vals[i]), float(f(np.array([w0]))[0]))


def spectral_extrema(w, sigma: float, grid_size: int = DEFAULT_GRID) -> tuple[float, float]:
    """``(sup rho, inf rho)`` over ``[0, 2 pi)``."""
    w = _require_stationary(w)
    lo = _grid_min(lambda om: _transfer_sq(w, om), grid_size)
    hi = -_grid_min(lambda om: -_transfer_sq(w, om), grid_size)
    return sigma ** 2 / lo, sigma ** 2 / hi


def _var_min_eig(W: np.ndarray, omega: np.ndarray) -> np.ndarray:
    B = np.eye(W.shape[0])[None] - W[None] * np.exp(-1j * np.asarray(omega))[:, None, None]
    H = np.conj(np.swapaxes(B, 1, 2)) @ B
    return np.linalg.eigvalsh(H)[:, 0]


def var_operator(w, omega: float) -> np.ndarray:
    """Hermitian ``(I - W^T e^{i omega})(I - W e^{-i omega})`` for companion ``W``."""
    W = companion_matrix(w)
    I = np.eye(W.shape[0])
    return (I - W.T * np.exp(1j * omega)) @ (I - W * np.exp(-1j * omega))


def var_spectral_bound(w, sigma: float, grid_size: int = DEFAULT_GRID) -> float:
    w = _require_stationary(w)
    W = companion_matrix(w)
    return sigma ** 2 / _grid_min(lambda om: _var_min_eig(W, np.atleast_1d(om)), grid_size)


@dataclass(frozen=True)
class SpectralSummary:
    big_m: float
    small_m: float
    m_w_companion: float
    grid_size: int
    sigma: float
    w: np.ndarray


def spectral_summary(w, sigma: float, grid_size: int = DEFAULT_GRID) -> SpectralSummary:
    big, small = spectral_extrema(w, sigma, grid_size)
    return SpectralSummary(big_m=big, small_m=small,
                           m_w_companion=var_spectral_bound(w, sigma, grid_size),
                           grid_size=grid_size, sigma=float(sigma),
                           w=np.asarray(w, dtype=float))
