"""Consistent robust regression by hard thresholding on the corruption vector.

The corruption estimate is updated with a unit gradient step on
``f(b) = 1/2 ||(I - P_X)(y - b)||^2`` followed by hard thresholding:

    b <- HT_k(P_X b + (I - P_X) y)

starting from ``b = 0``; the model is the least-squares fit to ``y - b``.
"""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .core import (
    DiagnosticTrace,
    Estimate,
    InvalidK,
    MissingTruth,
    Projection,
    RegressionProblem,
    SolverConfig,
    Termination,
)
from .thresholding import hard_threshold

Thresholder = Callable[[np.ndarray, int], np.ndarray]


def crr_step(proj, y: np.ndarray, b: np.ndarray, k: int,
             threshold: Thresholder = hard_threshold) -> np.ndarray:
    """One update ``HT_k(P_X b + (I - P_X) y)``.

    ``proj`` may be a :class:`Projection` or a dense projection matrix.
    """
    if isinstance(proj, Projection):
        z = y + proj.apply(b - y)
    else:
        z = np.asarray(proj) @ b + (y - np.asarray(proj) @ y)
    return threshold(z, k)


def iterate_hard_threshold(proj: Projection, y: np.ndarray, k: int, *,
                           threshold: Thresholder = hard_threshold,
                           tol: float = 1e-8, max_iters: int = 500,
                           b0: Optional[np.ndarray] = None,
                           callback: Optional[Callable[[int, np.ndarray], None]] = None):
    """Run the thresholded fixed-point iteration until ``||b^t - b^{t-1}|| <= tol``.

    Returns ``(b, iters, termination)``. ``callback(t, b)`` sees every iterate,
    including ``b^0``.
    """
    b = np.zeros_like(y) if b0 is None else np.array(b0, dtype=float)
    if callback is not None:
        callback(0, b)
    for t in range(1, max_iters + 1):
        b_new = crr_step(proj, y, b, k, threshold)
        step = np.linalg.norm(b_new - b)
        b = b_new
        if callback is not None:
            callback(t, b)
        if step <= tol:
            return b, t, Termination.CONVERGED
    return b, max_iters, Termination.MAX_ITERS


def resolve_k(config: SolverConfig, truth, limit: int, factor: int = 1) -> int:
    """Thresholding level: ``config.k`` or ``factor * k_star`` from ground truth."""
    if config.k is not None:
        k = config.k
    elif truth is not None:
        k = factor * truth.k_star
    else:
        raise InvalidK("config.k is unset and no ground truth supplies k_star")
    if not 0 <= k <= limit:
        raise InvalidK(f"k={k} outside [0, {limit}]")
    return int(k)


def _finish(proj: Projection, y, b, iters, termination) -> Estimate:
    return Estimate(w=proj.coef(y - b), b=b, iters=iters, termination=termination,
                    objective=proj.objective(y, b))


def solve_crr(problem: RegressionProblem, config: SolverConfig = SolverConfig()) -> Estimate:
    proj = Projection(problem.X)
    k = resolve_k(config, problem.truth, problem.n)
    b, iters, term = iterate_hard_threshold(proj, problem.y, k, tol=config.tol,
                                            max_iters=config.max_iters)
    return _finish(proj, problem.y, b, iters, term)


class Tracer:
    """Callback that records support bookkeeping against a known ``b*``."""

    def __init__(self, proj: Projection, y: np.ndarray, b_star: np.ndarray,
                 w_star: Optional[np.ndarray] = None):
        self.proj = proj
        self.y = y
        self.b_star = np.asarray(b_star, dtype=float)
        self.true_support = self.b_star != 0
        self.w_star = w_star
        self.trace = DiagnosticTrace()

    def __call__(self, t: int, b: np.ndarray) -> None:
        est = b != 0
        tr = self.trace
        tr.lambda_norm.append(float(np.linalg.norm(self.proj.coef(b - self.b_star))))
        tr.md.append(int(np.sum(self.true_support & ~est)))
        tr.fa.append(int(np.sum(est & ~self.true_support)))
        tr.ci.append(int(np.sum(est & self.true_support)))
        tr.b_err.append(float(np.linalg.norm(b - self.b_star)))
        if self.w_star is None:
            tr.w_err.append(float("nan"))
        else:
            w_t = self.proj.coef(self.y - b)
            tr.w_err.append(float(np.linalg.norm(w_t - self.w_star)))
        tr.objective.append(self.proj.objective(self.y, b))


def solve_crr_traced(problem: RegressionProblem, config: SolverConfig = SolverConfig()):
    if problem.truth is None:
        raise MissingTruth("traced solve needs ground truth")
    proj = Projection(problem.X)
    k = resolve_k(config, problem.truth, problem.n)
    tracer = Tracer(proj, problem.y, problem.truth.b_star, problem.truth.w_star)
    b, iters, term = iterate_hard_threshold(proj, problem.y, k, tol=config.tol,
                                            max_iters=config.max_iters, callback=tracer)
    return _finish(proj, problem.y, b, iters, term), tracer.trace
