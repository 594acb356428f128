"""Consistent hard-thresholding estimators for robust regression and AR(d) series."""
from .core import (
    Estimate,
    FixedClip,
    MadClip,
    RegressionProblem,
    SolverConfig,
    Termination,
    ols,
    projector,
)
from .crr import solve_crr, solve_crr_traced
from .ar import TimeSeriesRecord, solve_crtse, solve_ioard
from .datagen import CorruptionPlan, gen_ar_series, gen_ar_series_io, gen_regression, inject_additive

__all__ = [
    "CorruptionPlan", "Estimate", "FixedClip", "MadClip", "RegressionProblem", "SolverConfig",
    "Termination", "TimeSeriesRecord", "gen_ar_series", "gen_ar_series_io", "gen_regression",
    "inject_additive", "ols", "projector", "solve_crr", "solve_crr_traced", "solve_crtse",
    "solve_ioard",
]
