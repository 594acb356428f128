"""Command-line front end: ``gen | solve | experiment | diagnose | plot``.

Exit codes: 0 ok, 2 invalid arguments, 3 I/O or parse failure, 4 numerical
failure (rank deficiency, non-stationarity).
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import experiment as ex
from .ar import (
    GroundTruthTs,
    Mode,
    TimeSeriesRecord,
    build_lagged_design,
    read_series,
    solve_crtse,
    solve_ioard,
    solve_ols_series,
    write_series,
)
from .core import (
    GroundTruthReg,
    InvalidArgs,
    NonStationary,
    ParseError,
    RankDeficient,
    RegressionProblem,
    SolverConfig,
    Termination,
    ols,
)
from .crr import solve_crr, solve_crr_traced
from .datagen import (
    CorruptionPlan,
    gen_ar_series,
    gen_ar_series_io,
    gen_regression,
    inject_additive,
    read_problem_csv,
    write_problem_csv,
)
from .diagnostics import (
    angle_deg,
    d_inv_cubed,
    moment_bound,
    oracle_trimmed_ls,
    sgsc_sgss_exact,
    ssc_sss_exact,
    truncated_moment_mc,
    truncated_moment_quadrature,
)
from .thresholding import group_partition

EXIT_OK, EXIT_ARGS, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

SOLVE_COLUMNS = ["method", "n", "d", "k", "k_star", "sigma", "err_l2", "iters", "termination",
                 "wall_ms", "seed"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidArgs(message)


def _csv_line(values) -> str:
    return ",".join(ex._fmt(v) for v in values)


def _write_truth(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _read_truth(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from None


def _sidecar_for(input_path: Path) -> Path:
    return input_path.with_suffix(".truth.json")


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    prefix = Path(args.out)
    plan = CorruptionPlan(k_star=args.kstar, low=args.low, high=args.high)
    if args.kind == "regression":
        prob = gen_regression(args.n, args.d, args.sigma, plan, args.seed)
        write_problem_csv(prob, prefix.with_suffix(".csv"))
        t = prob.truth
        _write_truth(prefix.with_suffix(".truth.json"), {
            "kind": "regression", "w_star": t.w_star.tolist(), "support": t.support.tolist(),
            "sigma": t.sigma, "seed": args.seed, "k_star": t.k_star, "mode": "regression"})
        return EXIT_OK
    mode = Mode(args.mode)
    if mode == Mode.INNOVATIONAL:
        rec = gen_ar_series_io(args.n, args.d, args.sigma, plan, args.seed)
    else:
        rec = gen_ar_series(args.n, args.d, args.sigma, args.seed)
        if mode == Mode.ADDITIVE:
            rec = inject_additive(rec, replace(plan, seed=args.seed))
    write_series(rec, prefix.with_suffix(".txt"))
    t = rec.truth
    _write_truth(prefix.with_suffix(".truth.json"), {
        "kind": "ar", "w_star": t.w_star.tolist(), "support": t.e_locs.tolist(),
        "e_vals": t.e_vals.tolist(), "sigma": t.sigma, "seed": args.seed,
        "k_star": t.k_star, "mode": mode.value, "d": rec.d})
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def _load_instance(path: Path, truth: dict | None):
    """Regression CSV or AR series text, chosen by extension."""
    if not path.exists():
        raise FileNotFoundError(path)
    if path.suffix == ".csv":
        X, y, extras = read_problem_csv(path)
        if y is None:
            raise ParseError(f"{path}: no y column")
        gt = None
        if truth is not None:
            b = extras.get("b_star", np.zeros(len(y)))
            eps = extras.get("eps", np.zeros(len(y)))
            gt = GroundTruthReg(w_star=np.asarray(truth["w_star"], dtype=float), b_star=b,
                                eps=eps, support=np.asarray(truth["support"], dtype=int),
                                sigma=float(truth["sigma"]))
        return RegressionProblem(X=X, y=y, truth=gt)
    rec = read_series(path)
    if truth is not None:
        gt = GroundTruthTs(w_star=np.asarray(truth["w_star"], dtype=float),
                           sigma=float(truth["sigma"]), mode=Mode(truth.get("mode", "clean")),
                           e_locs=np.asarray(truth.get("support", []), dtype=int),
                           e_vals=np.asarray(truth.get("e_vals", []), dtype=float))
        rec = TimeSeriesRecord(values=rec.values, d=rec.d, truth=gt)
    return rec


def _run_method(inst, method: str, cfg: SolverConfig):
    """Return ``(w, k_used, iters, termination)``."""
    truth = inst.truth
    if isinstance(inst, RegressionProblem):
        if method == "ols":
            return ols(inst.X, inst.y), 0, 0, Termination.CONVERGED
        if method == "crr":
            est = solve_crr(inst, cfg)
            k = cfg.k if cfg.k is not None else truth.k_star
            return est.w, k, est.iters, est.termination
        if method == "oracle":
            k = cfg.k if cfg.k is not None else (truth.k_star if truth else None)
            if k is None:
                raise InvalidArgs("oracle needs --k or a truth sidecar")
            return oracle_trimmed_ls(inst.X, inst.y, k).w, k, 0, Termination.CONVERGED
        raise InvalidArgs(f"method {method} needs a time-series input")
    if method == "ols":
        est = solve_ols_series(inst)
        return est.w, 0, 0, est.termination
    if method == "crtse":
        est = solve_crtse(inst, cfg)
        k = cfg.k if cfg.k is not None else 2 * truth.k_star
        return est.w, k, est.iters, est.termination
    if method in ("ioard", "crr"):
        est = solve_ioard(inst, cfg)
        k = cfg.k if cfg.k is not None else truth.k_star
        return est.w, k, est.iters, est.termination
    if method == "oracle":
        X, y = build_lagged_design(inst)
        k = cfg.k if cfg.k is not None else (truth.k_star if truth else None)
        if k is None:
            raise InvalidArgs("oracle needs --k or a truth sidecar")
        return oracle_trimmed_ls(X, y, k).w, k, 0, Termination.CONVERGED
    raise InvalidArgs(f"unknown method {method}")


def cmd_solve(args) -> int:
    path = Path(args.input)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    truth_path = Path(args.truth) if args.truth else _sidecar_for(path)
    truth = _read_truth(truth_path) if truth_path.exists() else None
    inst = _load_instance(path, truth)
    cfg = SolverConfig(k=args.k, tol=args.tol, max_iters=args.max_iters, seed=args.seed)
    t0 = time.perf_counter()
    w, k, iters, term = _run_method(inst, args.method, cfg)
    wall_ms = 1e3 * (time.perf_counter() - t0)
    err = None if truth is None else float(np.linalg.norm(w - inst.truth.w_star))
    k_star = None if truth is None else int(truth["k_star"])
    sigma = None if truth is None else float(truth["sigma"])
    if args.header:
        print(",".join(SOLVE_COLUMNS))
    print(_csv_line([args.method, inst.n, inst.d, k, k_star, sigma, err, iters,
                     Termination(term).value, wall_ms, args.seed]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------

_EXP_FIELDS = ("problem", "sweep_param", "sweep_values", "n", "d", "sigma", "k_star",
               "k_star_frac", "k_factor", "methods", "trials", "base_seed")


def build_experiment_config(args) -> ex.ExperimentConfig:
    """Preset, then JSON config, then explicit flags; later sources win."""
    cfg = ex.PRESETS[args.preset] if args.preset else ex.ExperimentConfig()
    overrides = {}
    if args.config:
        cfg_path = Path(args.config)
        if not cfg_path.exists():
            raise FileNotFoundError(f"config file not found: {cfg_path}")
        data = _read_truth(cfg_path)
        unknown = set(data) - set(_EXP_FIELDS) - {"out_path"}
        if unknown:
            raise InvalidArgs(f"unknown config keys {sorted(unknown)}")
        overrides.update(data)
    for name in _EXP_FIELDS:
        val = getattr(args, name, None)
        if val is not None:
            overrides[name] = val
    if "k_star" in overrides and "k_star_frac" not in overrides:
        overrides["k_star_frac"] = None
    return replace(cfg, **overrides, out_path=args.out)


def cmd_experiment(args) -> int:
    cfg = build_experiment_config(args)
    rows = ex.run_experiment(cfg, workers=args.workers)
    text = ex.rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# diagnose
# ---------------------------------------------------------------------------

def cmd_diagnose_ssc(args) -> int:
    path = Path(args.input)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    X, _, _ = read_problem_csv(path)
    n = X.shape[1]
    print("k,lambda_k,Lambda_k")
    if args.group:
        part = group_partition(n, args.group)
        ks = range(1, part.n_groups + 1)
        fn = lambda k: sgsc_sgss_exact(X, k, part)  # noqa: E731
    else:
        ks = range(1, n + 1) if args.k is None else [args.k]
        fn = lambda k: ssc_sss_exact(X, k)  # noqa: E731
    for k in ks:
        lo, hi = fn(k)
        print(_csv_line([k, lo, hi]))
    return EXIT_OK


def cmd_diagnose_moment(args) -> int:
    lam = np.zeros(args.d)
    lam[0] = args.lambda_norm
    c_tau, quad = truncated_moment_quadrature(lam, args.sigma, args.tau)
    mc = truncated_moment_mc(lam, args.sigma, args.tau, args.samples, args.seed)
    direction = d_inv_cubed(lam, args.sigma) @ lam
    qn = float(np.linalg.norm(quad))
    z = float((mc.mean @ quad / qn - qn) / (mc.se @ np.abs(quad) / qn))
    print("d,sigma,tau,lambda_norm,samples,c_tau,bound,quad_norm,mc_norm,angle_deg,z")
    print(_csv_line([args.d, args.sigma, args.tau, args.lambda_norm, args.samples, c_tau,
                     moment_bound(args.sigma, args.tau), qn, float(np.linalg.norm(mc.mean)),
                     angle_deg(mc.mean, direction), z]))
    return EXIT_OK


def cmd_diagnose_trace(args) -> int:
    path = Path(args.input)
    truth_path = Path(args.truth) if args.truth else _sidecar_for(path)
    if not truth_path.exists():
        raise FileNotFoundError(f"trace needs a truth sidecar: {truth_path}")
    prob = _load_instance(path, _read_truth(truth_path))
    if not isinstance(prob, RegressionProblem):
        raise InvalidArgs("trace expects a regression CSV")
    _, trace = solve_crr_traced(prob, SolverConfig(k=args.k, tol=args.tol,
                                                   max_iters=args.max_iters))
    cols = ["t", "lambda_norm", "md", "fa", "ci", "b_err", "w_err", "objective"]
    print(",".join(cols))
    for row in trace.rows():
        print(_csv_line([row[c] for c in cols]))
    return EXIT_OK


# ---------------------------------------------------------------------------
# plot
# ---------------------------------------------------------------------------

def cmd_plot(args) -> int:
    path = Path(args.csv)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    rows = ex.parse_experiment_csv(path.read_text())
    table = ex.median_table(rows)
    xlabel = rows[0]["sweep_param"] if rows else "sweep value"
    svg = ex.render_svg(table, loglog=args.loglog, xlabel=xlabel)
    Path(args.out).write_text(svg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _int_list(text: str):
    return tuple(float(v) if "." in v or "e" in v.lower() else int(v) for v in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="robust-estim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a synthetic instance and its truth sidecar")
    gsub = g.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in ("regression", "ar"):
        q = gsub.add_parser(kind)
        q.add_argument("--n", type=int, required=True)
        q.add_argument("--d", type=int, required=True)
        q.add_argument("--sigma", type=float, default=1.0)
        q.add_argument("--kstar", type=int, default=0)
        q.add_argument("--low", type=float, default=10.0)
        q.add_argument("--high", type=float, default=20.0)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--out", required=True, help="output prefix")
        if kind == "ar":
            q.add_argument("--mode", choices=[m.value for m in Mode], default="clean")
        q.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run one estimator on an instance file")
    s.add_argument("--input", required=True)
    s.add_argument("--truth")
    s.add_argument("--method", choices=ex.METHODS, default="crr")
    s.add_argument("--k", type=int)
    s.add_argument("--tol", type=float, default=1e-8)
    s.add_argument("--max-iters", type=int, default=500)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--header", action="store_true")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("experiment", help="run a parameter sweep and write CSV")
    e.add_argument("--preset", choices=sorted(ex.PRESETS))
    e.add_argument("--config", help="JSON file with ExperimentConfig fields")
    e.add_argument("--problem", choices=[v.value for v in ex.Problem])
    e.add_argument("--sweep-param", choices=ex.SWEEP_PARAMS)
    e.add_argument("--sweep-values", type=_int_list)
    e.add_argument("--n", type=int)
    e.add_argument("--d", type=int)
    e.add_argument("--sigma", type=float)
    e.add_argument("--k-star", type=int)
    e.add_argument("--k-star-frac", type=float)
    e.add_argument("--k-factor", type=int)
    e.add_argument("--methods", type=lambda t: tuple(t.split(",")))
    e.add_argument("--trials", type=int)
    e.add_argument("--base-seed", type=int)
    e.add_argument("--workers", type=int)
    e.add_argument("--out")
    e.set_defaults(func=cmd_experiment)

    dg = sub.add_parser("diagnose", help="numerical diagnostics")
    dsub = dg.add_subparsers(dest="what", required=True, parser_class=_Parser)
    q = dsub.add_parser("ssc", help="exact subset eigenvalue constants of a design")
    q.add_argument("--input", required=True)
    q.add_argument("--k", type=int)
    q.add_argument("--group", type=int, help="group size for the group constants")
    q.set_defaults(func=cmd_diagnose_ssc)
    q = dsub.add_parser("moment", help="truncated first moment: Monte Carlo vs quadrature")
    q.add_argument("--tau", type=float, default=1.0)
    q.add_argument("--sigma", type=float, default=1.0)
    q.add_argument("--lambda-norm", type=float, default=0.005)
    q.add_argument("--d", type=int, default=3)
    q.add_argument("--samples", type=int, default=10**7)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_diagnose_moment)
    q = dsub.add_parser("trace", help="per-iteration support bookkeeping of a CRR solve")
    q.add_argument("--input", required=True)
    q.add_argument("--truth")
    q.add_argument("--k", type=int)
    q.add_argument("--tol", type=float, default=1e-8)
    q.add_argument("--max-iters", type=int, default=500)
    q.set_defaults(func=cmd_diagnose_trace)

    pl = sub.add_parser("plot", help="render median err_l2 curves from an experiment CSV")
    pl.add_argument("csv")
    pl.add_argument("--out", required=True)
    pl.add_argument("--loglog", action="store_true")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (RankDeficient, NonStationary) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InvalidArgs, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
