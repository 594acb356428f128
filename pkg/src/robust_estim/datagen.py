"""Seeded synthetic data for robust regression and AR(d) experiments.

Randomness is drawn from counter-based Philox generators. Each entity of an
instance (model, design, noise, corruption locations, corruption values,
initial values) gets its own stream, keyed by ``(seed, entity)`` through
:class:`numpy.random.SeedSequence`. Changing ``k_star`` therefore leaves the
design and noise draws untouched.
"""
from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .core import (
    GroundTruthReg,
    InvalidPlan,
    InvalidSize,
    NonStationary,
    ParseError,
    RegressionProblem,
)
from .spectral import spectral_radius

STREAMS = {
    "w_star": 0,
    "design": 1,
    "noise": 2,
    "corruption_locations": 3,
    "corruption_values": 4,
    "initial": 5,
}


def stream(seed: int, entity: str) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=(STREAMS[entity],))
    return np.random.Generator(np.random.Philox(ss))


class Sign(str, enum.Enum):
    POSITIVE = "positive"
    SYMMETRIC = "symmetric"


@dataclass(frozen=True)
class CorruptionPlan:
    k_star: int
    low: float = 10.0
    high: float = 20.0
    sign: Sign = Sign.POSITIVE
    seed: Optional[int] = None

    def __post_init__(self):
        if self.k_star < 0:
            raise InvalidPlan(f"k_star must be nonnegative, got {self.k_star}")
        if not self.low < self.high:
            raise InvalidPlan(f"need low < high, got {self.low}, {self.high}")


def _draw_corruptions(plan: CorruptionPlan, n: int, seed: int):
    if plan.k_star > n:
        raise InvalidPlan(f"k_star={plan.k_star} exceeds n={n}")
    s = seed if plan.seed is None else plan.seed
    locs = np.sort(stream(s, "corruption_locations").choice(n, size=plan.k_star, replace=False))
    rng = stream(s, "corruption_values")
    vals = rng.uniform(plan.low, plan.high, size=plan.k_star)
    if plan.sign == Sign.SYMMETRIC:
        vals = vals * rng.choice([-1.0, 1.0], size=plan.k_star)
    return locs, vals


# ---------------------------------------------------------------------------
# regression
# ---------------------------------------------------------------------------

def gen_regression(n: int, d: int, sigma: float, plan: CorruptionPlan, seed: int) -> RegressionProblem:
    if not n >= d >= 1:
        raise InvalidSize(f"need n >= d >= 1, got n={n}, d={d}")
    if sigma < 0:
        raise InvalidSize("sigma must be nonnegative")
    w = stream(seed, "w_star").standard_normal(d)
    w /= np.linalg.norm(w)
    X = stream(seed, "design").standard_normal((d, n))
    eps = sigma * stream(seed, "noise").standard_normal(n)
    locs, vals = _draw_corruptions(plan, n, seed)
    b = np.zeros(n)
    b[locs] = vals
    y = X.T @ w + eps + b
    truth = GroundTruthReg(w_star=w, b_star=b, eps=eps, support=locs, sigma=float(sigma))
    return RegressionProblem(X=X, y=y, truth=truth)


def write_problem_csv(problem: RegressionProblem, path) -> None:
    """Columns ``x_1..x_d, y`` and, when truth is attached, ``b_star, eps``."""
    d = problem.d
    header = [f"x_{j + 1}" for j in range(d)] + ["y"]
    cols = [problem.X[j] for j in range(d)] + [problem.y]
    if problem.truth is not None:
        header += ["b_star", "eps"]
        cols += [problem.truth.b_star, problem.truth.eps]
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def read_problem_csv(path):
    """Return ``(X, y, extras)``; ``y`` is ``None`` for a design-only file."""
    with open(path, newline="") as fh:
        text = fh.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{path}: empty file") from None
    try:
        data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if data.size == 0:
        raise ParseError(f"{path}: no data rows")
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ParseError(f"{path}: ragged rows")
    xcols = [i for i, h in enumerate(header) if h.startswith("x_")]
    if not xcols:
        raise ParseError(f"{path}: no x_ columns")
    X = data[:, xcols].T
    named = {h: data[:, i] for i, h in enumerate(header) if not h.startswith("x_")}
    y = named.pop("y", None)
    return X, y, named


# ---------------------------------------------------------------------------
# time series
# ---------------------------------------------------------------------------

def draw_ar_coefficients(rng: np.random.Generator, d: int, scale: Optional[float] = None,
                         max_radius: float = 0.99, max_tries: int = 1000) -> np.ndarray:
    """Uniform direction with norm ``scale`` (default ``0.9/sqrt(d)``), redrawn
    until the companion spectral radius is below ``max_radius``."""
    scale = 0.9 / np.sqrt(d) if scale is None else scale
    for _ in range(max_tries):
        w = rng.standard_normal(d)
        w *= scale / np.linalg.norm(w)
        if spectral_radius(w) < max_radius:
            return w
    raise NonStationary(f"no stable AR({d}) draw with norm {scale} in {max_tries} tries")


def _simulate(w: np.ndarray, sigma: float, n: int, d: int, burn_in: int, seed: int,
              shocks: Optional[np.ndarray] = None) -> np.ndarray:
    """Run ``x_t = sum_i w_i x_{t-i} + eps_t (+ shock_t)`` and return the last n+d values.

    ``shocks`` (length n+d) is added to the innovations of the recorded values.
    """
    p = len(w)
    total = n + d
    x = np.empty(p + burn_in + total)
    x[:p] = stream(seed, "initial").standard_normal(p)
    innov = sigma * stream(seed, "noise").standard_normal(burn_in + total)
    if shocks is not None:
        innov[burn_in:] += shocks
    wr = np.asarray(w, dtype=float)[::-1]
    for t in range(p, len(x)):
        x[t] = wr @ x[t - p:t] + innov[t - p]
    return x[-total:].copy()


def gen_ar_series(n: int, d: int, sigma: float, seed: int, burn_in: int = 100,
                  w_star: Optional[np.ndarray] = None):
    """Clean stationary AR(d) series of length ``n + d``; ``w_star`` forces the model."""
    from .ar import GroundTruthTs, Mode, TimeSeriesRecord

    if d < 1 or n < d + 1:
        raise InvalidSize(f"need d >= 1 and n >= d + 1, got n={n}, d={d}")
    if w_star is None:
        w = draw_ar_coefficients(stream(seed, "w_star"), d)
    else:
        w = np.asarray(w_star, dtype=float).reshape(-1)
        if len(w) != d:
            raise InvalidSize(f"w_star has length {len(w)}, expected {d}")
        if spectral_radius(w) >= 1:
            raise NonStationary("forced w_star is not stationary")
    values = _simulate(w, sigma, n, d, burn_in, seed)
    truth = GroundTruthTs(w_star=w, sigma=float(sigma), mode=Mode.CLEAN,
                          e_locs=np.zeros(0, dtype=int), e_vals=np.zeros(0),
                          clean_values=values.copy())
    return TimeSeriesRecord(values=values, d=d, truth=truth)


def inject_additive(record, plan: CorruptionPlan):
    """Add ``k_star`` outliers to observed values ``y_1..y_n``; the latent series is unchanged."""
    from .ar import Mode, TimeSeriesRecord

    if record.truth is None:
        raise InvalidPlan("record has no ground truth to corrupt")
    n, d = record.n, record.d
    if plan.k_star > n:
        raise InvalidPlan(f"k_star={plan.k_star} exceeds n={n}")
    seed = 0 if plan.seed is None else plan.seed
    rows, vals = _draw_corruptions(replace(plan, seed=seed), n, seed)
    locs = rows + d
    values = record.truth.clean_values.copy()
    values[locs] += vals
    truth = replace(record.truth, mode=Mode.ADDITIVE, e_locs=locs, e_vals=vals)
    return TimeSeriesRecord(values=values, d=d, truth=truth)


def gen_ar_series_io(n: int, d: int, sigma: float, plan: CorruptionPlan, seed: int,
                     burn_in: int = 100, w_star: Optional[np.ndarray] = None):
    """AR(d) series whose innovations at ``k_star`` times carry an outlier.

    Uses the same streams as :func:`gen_ar_series`, so the clean twin with equal
    arguments is stored in ``truth.clean_values``.
    """
    from .ar import Mode, TimeSeriesRecord

    clean = gen_ar_series(n, d, sigma, seed, burn_in=burn_in, w_star=w_star)
    rows, vals = _draw_corruptions(plan, n, seed)
    locs = rows + d
    shocks = np.zeros(n + d)
    shocks[locs] = vals
    values = _simulate(clean.truth.w_star, sigma, n, d, burn_in, seed, shocks=shocks)
    truth = replace(clean.truth, mode=Mode.INNOVATIONAL, e_locs=locs, e_vals=vals)
    return TimeSeriesRecord(values=values, d=d, truth=truth)
