"""Robust AR(d) estimation under additive and innovational outliers.

``solve_crtse`` clips the observed series, builds the lagged design and runs
the corruption-vector iteration with aligned group thresholding (groups of
``d`` consecutive rows). ``solve_ioard`` runs the pointwise iteration on the
lagged design, which matches innovational outliers where each corruption
touches a single response.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    Estimate,
    FixedClip,
    InvalidClipLevel,
    InvalidSize,
    MadClip,
    NotDivisible,
    ParseError,
    Projection,
    SolverConfig,
    Termination,
    TooShort,
)
from .crr import _finish, iterate_hard_threshold, resolve_k
from .thresholding import group_hard_threshold, group_partition, hard_threshold

log = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    CLEAN = "clean"
    ADDITIVE = "additive"
    INNOVATIONAL = "innovational"


@dataclass(frozen=True)
class GroundTruthTs:
    """Model and corruptions behind a synthetic series.

    ``e_locs`` are positions in the ``values`` array (``y_t`` sits at ``t + d - 1``).
    """
    w_star: np.ndarray
    sigma: float
    mode: Mode
    e_locs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    e_vals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    clean_values: Optional[np.ndarray] = None

    @property
    def k_star(self) -> int:
        return int(len(self.e_locs))

    def e_star(self, length: int) -> np.ndarray:
        e = np.zeros(length)
        e[self.e_locs] = self.e_vals
        return e


@dataclass(frozen=True)
class TimeSeriesRecord:
    """Scalar series ``y_{-d+1}, ..., y_n`` stored as one array of length ``n + d``."""
    values: np.ndarray
    d: int
    truth: Optional[GroundTruthTs] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.d < 1:
            raise InvalidSize(f"order d must be >= 1, got {self.d}")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return len(self.values) - self.d


# ---------------------------------------------------------------------------
# preprocessing
# ---------------------------------------------------------------------------

def clip_series(values, level: float) -> np.ndarray:
    if not level > 0:
        raise InvalidClipLevel(f"clip level must be positive, got {level}")
    return np.clip(np.asarray(values, dtype=float), -level, level)


def mad_sigma(values) -> float:
    """Innovation scale from the MAD of first differences, ``1.4826 * MAD / sqrt(2)``."""
    diffs = np.diff(np.asarray(values, dtype=float))
    mad = np.median(np.abs(diffs - np.median(diffs)))
    return 1.4826 * mad / np.sqrt(2.0)


def clip_level(values, policy, n: int) -> Optional[float]:
    if policy is None:
        return None
    if isinstance(policy, FixedClip):
        return float(policy.level)
    if isinstance(policy, MadClip):
        mult = 3.0 * np.sqrt(2.0 * np.log(n)) if policy.multiplier is None else policy.multiplier
        return float(mult * mad_sigma(values))
    raise TypeError(f"unknown clip policy {policy!r}")


def lagged_design(values, d: int) -> tuple[np.ndarray, np.ndarray]:
    values = np.asarray(values, dtype=float).reshape(-1)
    n = len(values) - d
    if n < 1:
        raise TooShort(f"series of length {len(values)} is too short for order {d}")
    # column i holds (y_{i-1}, ..., y_{i-d}); y_i sits at values[i + d - 1]
    X = np.stack([values[d - lag: d - lag + n] for lag in range(1, d + 1)])
    return X, values[d:].copy()


def build_lagged_design(record: TimeSeriesRecord) -> tuple[np.ndarray, np.ndarray]:
    return lagged_design(record.values, record.d)


def trim_to_multiple(record: TimeSeriesRecord) -> TimeSeriesRecord:
    """Drop leading values so that ``d`` divides ``n``; corruption positions shift."""
    drop = record.n % record.d
    if drop == 0:
        return record
    log.info("trimming %d leading values so that d=%d divides n", drop, record.d)
    truth = record.truth
    if truth is not None:
        keep = truth.e_locs >= drop
        clean = None if truth.clean_values is None else truth.clean_values[drop:]
        truth = GroundTruthTs(w_star=truth.w_star, sigma=truth.sigma, mode=truth.mode,
                              e_locs=truth.e_locs[keep] - drop, e_vals=truth.e_vals[keep],
                              clean_values=clean)
    return TimeSeriesRecord(values=record.values[drop:], d=record.d, truth=truth)


def additive_model_corruption(record: TimeSeriesRecord) -> np.ndarray:
    """Regression-level corruption ``e* - E^T w*`` induced by additive outliers.

    ``e*`` is restricted to the responses ``y_1..y_n`` and ``E^T`` is the lagged
    design built from the outlier sequence alone.
    """
    truth = record.truth
    e = truth.e_star(len(record.values))
    E, e_resp = lagged_design(e, record.d)
    return e_resp - E.T @ truth.w_star


# ---------------------------------------------------------------------------
# solvers
# ---------------------------------------------------------------------------

def solve_crtse(record: TimeSeriesRecord, config: SolverConfig = SolverConfig()) -> Estimate:
    d = record.d
    if record.n < d + 1:
        raise TooShort(f"need n >= d + 1, got n={record.n}, d={d}")
    if record.n % d:
        if not config.trim:
            raise NotDivisible(f"d={d} does not divide n={record.n}")
        record = trim_to_multiple(record)
    level = clip_level(record.values, config.clip, record.n)
    values = record.values if level is None else clip_series(record.values, level)
    X, y = lagged_design(values, d)
    part = group_partition(len(y), d)
    k = resolve_k(config, record.truth, part.n_groups, factor=2)
    proj = Projection(X)

    def threshold(v, kk):
        return group_hard_threshold(v, kk, part)

    b, iters, term = iterate_hard_threshold(proj, y, k, threshold=threshold,
                                            tol=config.tol, max_iters=config.max_iters)
    return _finish(proj, y, b, iters, term)


def solve_ioard(record: TimeSeriesRecord, config: SolverConfig = SolverConfig()) -> Estimate:
    if record.n < record.d + 1:
        raise TooShort(f"need n >= d + 1, got n={record.n}, d={record.d}")
    X, y = build_lagged_design(record)
    k = resolve_k(config, record.truth, len(y))
    proj = Projection(X)
    b, iters, term = iterate_hard_threshold(proj, y, k, threshold=hard_threshold,
                                            tol=config.tol, max_iters=config.max_iters)
    return _finish(proj, y, b, iters, term)


def solve_ols_series(record: TimeSeriesRecord) -> Estimate:
    X, y = build_lagged_design(record)
    proj = Projection(X)
    return _finish(proj, y, np.zeros_like(y), 0, Termination.CONVERGED)


# ---------------------------------------------------------------------------
# series file format
# ---------------------------------------------------------------------------

def write_series(record: TimeSeriesRecord, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"# d={record.d} n={record.n}\n")
        for v in record.values:
            fh.write("%.17g\n" % v)


def read_series(path) -> TimeSeriesRecord:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ParseError(f"{path}: missing '# d=<order> n=<length>' header")
    try:
        fields = dict(tok.split("=", 1) for tok in lines[0].lstrip("#").split())
        d, n = int(fields["d"]), int(fields["n"])
        values = np.array([float(v) for v in lines[1:]])
    except (KeyError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    if len(values) != n + d:
        raise ParseError(f"{path}: header says n+d={n + d} values, found {len(values)}")
    return TimeSeriesRecord(values=values, d=d)
