"""Sweep experiments over (n, d, sigma, k_star) and SVG rendering of their CSVs."""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from math import comb
from typing import Optional

import numpy as np

from .ar import solve_crtse, solve_ioard, solve_ols_series, trim_to_multiple
from .core import EstimationError, InvalidArgs, ParseError, SolverConfig, Termination, ols
from .crr import solve_crr
from .datagen import CorruptionPlan, gen_ar_series, gen_ar_series_io, gen_regression, inject_additive
from .diagnostics import MAX_SUBSETS, oracle_trimmed_ls

COLUMNS = ["sweep_param", "sweep_value", "trial", "method", "n", "d", "k", "k_star", "sigma",
           "err_l2", "iters", "termination", "wall_ms", "seed"]
SWEEP_PARAMS = ("n", "d", "sigma", "k_star")
METHODS = ("crr", "crtse", "ioard", "ols", "oracle")


class Problem(str, enum.Enum):
    REGRESSION = "regression"
    AR_ADDITIVE = "ar_additive"
    AR_INNOVATIONAL = "ar_innovational"


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep. ``k_star`` is taken from ``k_star_frac * n`` (floored) when the
    fraction is set and ``k_star`` is not the swept parameter; the solver
    thresholding level is ``k_factor * k_star`` groups or points."""
    problem: Problem = Problem.REGRESSION
    sweep_param: str = "n"
    sweep_values: tuple = (1000, 2000, 4000)
    n: int = 1000
    d: int = 10
    sigma: float = 1.0
    k_star: int = 20
    k_star_frac: Optional[float] = None
    k_factor: int = 2
    methods: tuple = ("crr", "ols")
    trials: int = 20
    base_seed: int = 0
    out_path: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "problem", Problem(self.problem))
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.sweep_param not in SWEEP_PARAMS:
            raise InvalidArgs(f"sweep_param must be one of {SWEEP_PARAMS}")
        vals = self.sweep_values
        if not vals or any(b <= a for a, b in zip(vals, vals[1:])):
            raise InvalidArgs("sweep values must be nonempty and strictly increasing")
        if self.trials < 1:
            raise InvalidArgs("trials must be >= 1")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise InvalidArgs(f"unknown methods {sorted(bad)}")
        if "oracle" in self.methods:
            for v in vals:
                p = self.cell_params(v)
                if comb(p["n"], self.method_k("oracle", p)) > MAX_SUBSETS:
                    raise InvalidArgs(f"oracle infeasible at {self.sweep_param}={v}")

    def cell_params(self, value) -> dict:
        p = {"n": self.n, "d": self.d, "sigma": self.sigma, "k_star": self.k_star}
        p[self.sweep_param] = value
        p["n"], p["d"] = int(p["n"]), int(p["d"])
        if self.k_star_frac is not None and self.sweep_param != "k_star":
            p["k_star"] = int(np.floor(self.k_star_frac * p["n"]))
        p["k_star"] = int(p["k_star"])
        p["sigma"] = float(p["sigma"])
        return p

    def method_k(self, method: str, p: dict) -> int:
        ks = self.k_factor * p["k_star"]
        if method == "ols":
            return 0
        if self.problem == Problem.AR_ADDITIVE and method in ("crr", "ioard"):
            # pointwise methods need to cover every row an outlier touches
            return ks * p["d"]
        return ks


PRESETS = {
    "fig1a": ExperimentConfig(problem=Problem.REGRESSION, sweep_param="n",
                              sweep_values=(1000, 2000, 4000, 8000, 16000), d=10, sigma=1.0,
                              k_star_frac=0.02, k_factor=2, methods=("crr", "ols"), trials=20),
    "fig2a": ExperimentConfig(problem=Problem.AR_ADDITIVE, sweep_param="n",
                              sweep_values=(1000, 2000, 4000, 8000), d=5, sigma=1.0,
                              k_star_frac=1 / 200, k_factor=2, methods=("crtse", "ols"), trials=50),
}


def cell_seed(base_seed: int, sweep_param: str, value, trial: int) -> int:
    key = f"{sweep_param}={float(value)!r}|trial={trial}".encode()
    h = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")
    return (int(base_seed) ^ h) & (2**63 - 1)


def _generate(cfg: ExperimentConfig, p: dict, seed: int):
    plan = CorruptionPlan(k_star=p["k_star"], seed=seed)
    if cfg.problem == Problem.REGRESSION:
        return gen_regression(p["n"], p["d"], p["sigma"], plan, seed)
    if cfg.problem == Problem.AR_ADDITIVE:
        return inject_additive(gen_ar_series(p["n"], p["d"], p["sigma"], seed), plan)
    return gen_ar_series_io(p["n"], p["d"], p["sigma"], plan, seed)


def _solve(cfg: ExperimentConfig, method: str, inst, k: int):
    sc = SolverConfig(k=k)
    if cfg.problem == Problem.REGRESSION:
        if method == "crr":
            return solve_crr(inst, sc)
        if method == "ols":
            return ols(inst.X, inst.y), 0, Termination.CONVERGED
        if method == "oracle":
            return oracle_trimmed_ls(inst.X, inst.y, k).w, 0, Termination.CONVERGED
        raise InvalidArgs(f"method {method} does not apply to regression problems")
    if method == "crtse":
        return solve_crtse(inst, sc)
    if method == "ioard":
        return solve_ioard(inst, sc)
    if method == "ols":
        return solve_ols_series(inst)
    if method == "crr":
        return solve_ioard(inst, replace(sc, clip=None))
    if method == "oracle":
        from .ar import build_lagged_design
        X, y = build_lagged_design(inst)
        return oracle_trimmed_ls(X, y, k).w, 0, Termination.CONVERGED
    raise InvalidArgs(f"unknown method {method}")


def run_cell(cfg: ExperimentConfig, value, trial: int) -> list[dict]:
    p = cfg.cell_params(value)
    seed = cell_seed(cfg.base_seed, cfg.sweep_param, value, trial)
    rows = []
    inst = None
    try:
        inst = _generate(cfg, p, seed)
    except EstimationError:
        pass
    for method in sorted(cfg.methods):
        k = cfg.method_k(method, p)
        row = {"sweep_param": cfg.sweep_param, "sweep_value": value, "trial": trial,
               "method": method, "n": p["n"], "d": p["d"], "k": k, "k_star": p["k_star"],
               "sigma": p["sigma"], "err_l2": None, "iters": 0,
               "termination": Termination.FAILED.value, "wall_ms": 0.0, "seed": seed}
        if inst is not None:
            try:
                t0 = time.perf_counter()
                out = _solve(cfg, method, inst, k)
                row["wall_ms"] = 1e3 * (time.perf_counter() - t0)
                if isinstance(out, tuple):
                    w, iters, term = out
                else:
                    w, iters, term = out.w, out.iters, out.termination
                row["err_l2"] = float(np.linalg.norm(w - inst.truth.w_star))
                row["iters"] = int(iters)
                row["termination"] = Termination(term).value
            except (EstimationError, np.linalg.LinAlgError):
                pass
        rows.append(row)
    return rows


def _cell_job(args):
    cfg, value, trial = args
    return run_cell(cfg, value, trial)


def default_workers() -> int:
    env = os.environ.get("ROBUST_ESTIM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> list[dict]:
    """Run every (sweep value, trial) cell; rows sorted by (sweep_value, trial, method)."""
    jobs = [(cfg, v, t) for v in cfg.sweep_values for t in range(cfg.trials)]
    workers = default_workers() if workers is None else workers
    workers = max(1, min(workers, len(jobs)))
    if workers == 1:
        results = [_cell_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_job, jobs))
    rows = [r for cell in results for r in cell]
    rows.sort(key=lambda r: (r["sweep_value"], r["trial"], r["method"]))
    return rows


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def rows_to_csv(rows: list[dict], columns=COLUMNS) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(r.get(c)) for c in columns) + "\n")
    return buf.getvalue()


_INT_COLS = {"trial", "n", "d", "k", "k_star", "iters", "seed"}
_FLOAT_COLS = {"sigma", "err_l2", "wall_ms"}


def _parse_number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_experiment_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not {"sweep_value", "method", "err_l2"} <= set(reader.fieldnames):
        raise ParseError("not an experiment CSV (missing sweep_value/method/err_l2 columns)")
    rows = []
    try:
        for raw in reader:
            r = dict(raw)
            for c in _INT_COLS & r.keys():
                r[c] = int(r[c])
            for c in _FLOAT_COLS & r.keys():
                r[c] = float(r[c]) if r[c] != "" else None
            r["sweep_value"] = _parse_number(r["sweep_value"])
            rows.append(r)
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc)) from None
    return rows


def median_table(rows: list[dict], metric: str = "err_l2") -> dict:
    """``{method: [(sweep_value, median), ...]}`` ignoring failed cells."""
    acc: dict = {}
    for r in rows:
        if r.get(metric) is None:
            continue
        acc.setdefault(r["method"], {}).setdefault(r["sweep_value"], []).append(r[metric])
    return {m: sorted((v, float(np.median(xs))) for v, xs in by.items()) for m, by in sorted(acc.items())}


def config_to_json(cfg: ExperimentConfig) -> str:
    d = asdict(cfg)
    d["problem"] = cfg.problem.value
    return json.dumps(d, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"]


def render_svg(table: dict, *, loglog: bool = False, xlabel: str = "sweep value",
               ylabel: str = "median err_l2", width: int = 640, height: int = 420) -> str:
    if not table:
        raise ParseError("no data to plot")
    pts = [(x, y) for series in table.values() for x, y in series]
    tx = (lambda v: np.log10(v)) if loglog else (lambda v: v)
    if loglog and any(x <= 0 or y <= 0 for x, y in pts):
        raise ParseError("log-log plot needs positive values")
    xs = [tx(x) for x, _ in pts]
    ys = [tx(y) for _, y in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    ml, mr, mt, mb = 70, 130, 20, 50
    pw, ph = width - ml - mr, height - mt - mb

    def sx(v):
        return ml + (tx(v) - x0) / (x1 - x0) * pw

    def sy(v):
        return mt + ph - (tx(v) - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
    for frac in (0.0, 0.5, 1.0):
        xv, yv = x0 + frac * (x1 - x0), y0 + frac * (y1 - y0)
        xl = 10 ** xv if loglog else xv
        yl = 10 ** yv if loglog else yv
        out.append(f'<text x="{ml + frac * pw:.1f}" y="{mt + ph + 16}" text-anchor="middle">{xl:.3g}</text>')
        out.append(f'<text x="{ml - 6}" y="{mt + ph - frac * ph + 4:.1f}" text-anchor="end">{yl:.3g}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {mt + ph / 2})">{ylabel}</text>')
    for i, (method, series) in enumerate(table.items()):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in series)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        ly = mt + 16 + 18 * i
        out.append(f'<text x="{ml + pw + 12}" y="{ly}" fill="{color}">{method}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
