"""Shared domain types, error classes and projection / least-squares primitives.

Design matrices follow the column convention used throughout the package:
``X`` has shape ``(d, n)`` and column ``i`` is the covariate ``x_i``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

RANK_TOL = 1e-10


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

class EstimationError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgs(EstimationError, ValueError):
    pass


class InvalidSize(InvalidArgs):
    pass


class InvalidPlan(InvalidArgs):
    pass


class InvalidK(InvalidArgs):
    pass


class NotDivisible(InvalidArgs):
    pass


class TooShort(InvalidArgs):
    pass


class InvalidClipLevel(InvalidArgs):
    pass


class TooLarge(InvalidArgs):
    """Exhaustive enumeration requested over more than the allowed number of subsets."""


class HypothesisViolated(InvalidArgs):
    pass


class MissingTruth(InvalidArgs):
    pass


class RankDeficient(EstimationError, np.linalg.LinAlgError):
    pass


class NonStationary(EstimationError, ValueError):
    pass


class ParseError(EstimationError, ValueError):
    pass


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

class Termination(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    FAILED = "Failed"


@dataclass(frozen=True)
class GroundTruthReg:
    w_star: np.ndarray
    b_star: np.ndarray
    eps: np.ndarray
    support: np.ndarray
    sigma: float

    @property
    def k_star(self) -> int:
        return int(len(self.support))


@dataclass(frozen=True)
class RegressionProblem:
    X: np.ndarray
    y: np.ndarray
    truth: Optional[GroundTruthReg] = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if X.shape[1] != y.shape[0]:
            raise InvalidSize(f"X has {X.shape[1]} columns but y has length {y.shape[0]}")
        if not X.shape[1] >= X.shape[0] >= 1:
            raise InvalidSize(f"need n >= d >= 1, got d={X.shape[0]}, n={X.shape[1]}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def d(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class FixedClip:
    level: float


@dataclass(frozen=True)
class MadClip:
    """Clip at ``multiplier * sigma_hat`` where sigma_hat comes from the MAD of
    first differences. ``multiplier=None`` means ``3 * sqrt(2 log n)``."""
    multiplier: Optional[float] = None


ClipPolicy = Optional[object]  # FixedClip | MadClip | None


@dataclass(frozen=True)
class SolverConfig:
    k: Optional[int] = None
    tol: float = 1e-8
    max_iters: int = 500
    seed: int = 0
    clip: ClipPolicy = field(default_factory=MadClip)
    trim: bool = True

    def __post_init__(self):
        if self.k is not None and self.k < 0:
            raise InvalidK(f"k must be nonnegative, got {self.k}")
        if not self.tol > 0:
            raise InvalidArgs("tol must be positive")
        if self.max_iters < 1:
            raise InvalidArgs("max_iters must be positive")


@dataclass(frozen=True)
class Estimate:
    w: np.ndarray
    b: np.ndarray
    iters: int
    termination: Termination
    objective: float

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.b)


@dataclass
class DiagnosticTrace:
    """Per-iteration record of a traced solve; row ``t`` describes ``b^t``."""
    lambda_norm: list = field(default_factory=list)
    md: list = field(default_factory=list)
    fa: list = field(default_factory=list)
    ci: list = field(default_factory=list)
    b_err: list = field(default_factory=list)
    w_err: list = field(default_factory=list)
    objective: list = field(default_factory=list)

    def __len__(self):
        return len(self.objective)

    def rows(self):
        for t in range(len(self)):
            yield {
                "t": t,
                "lambda_norm": self.lambda_norm[t],
                "md": self.md[t],
                "fa": self.fa[t],
                "ci": self.ci[t],
                "b_err": self.b_err[t],
                "w_err": self.w_err[t],
                "objective": self.objective[t],
            }


# ---------------------------------------------------------------------------
# projection primitives
# ---------------------------------------------------------------------------

class Projection:
    """Orthogonal projection onto the row space of ``X`` (range of ``X^T``).

    Built from a thin QR factorisation ``X^T = Q R``, so ``P_X v = Q (Q^T v)``
    and ``(X X^T)^{-1} X v = R^{-1} Q^T v``; the Gram inverse is never formed.
    """

    def __init__(self, X: np.ndarray, rank_tol: float = RANK_TOL):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        d, n = X.shape
        if n < d:
            raise RankDeficient(f"X has {n} columns, fewer than its {d} rows")
        q, r = np.linalg.qr(X.T, mode="reduced")
        s = np.linalg.svd(r, compute_uv=False)
        if s[0] == 0 or s[-1] <= rank_tol * s[0]:
            raise RankDeficient(
                f"design is rank deficient (singular values {s[-1]:.3g} / {s[0]:.3g})")
        self.X = X
        self.q = q
        self.r = r
        self.d, self.n = d, n

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.q @ (self.q.T @ v)

    def residual(self, v: np.ndarray) -> np.ndarray:
        return v - self.apply(v)

    def coef(self, v: np.ndarray) -> np.ndarray:
        """Least-squares coefficients ``(X X^T)^{-1} X v``."""
        return solve_triangular(self.r, self.q.T @ v)

    def objective(self, y: np.ndarray, b: np.ndarray) -> float:
        res = self.residual(y - b)
        return 0.5 * float(res @ res)

    def dense(self) -> np.ndarray:
        p = self.q @ self.q.T
        return 0.5 * (p + p.T)


def projector(X: np.ndarray) -> np.ndarray:
    """Dense ``n x n`` projection matrix ``X^T (X X^T)^{-1} X``."""
    return Projection(X).dense()


def ols(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    return Projection(X).coef(np.asarray(y, dtype=float))
