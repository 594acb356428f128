"""Best achievable error ratio against OLS at n=2000, d=10, k*=100, U(10, 20) corruptions.

The clean-oracle estimator runs least squares on exactly the uncorrupted
points, which no corruption-agnostic method can beat in expectation. Its ratio
to the OLS median bounds what CRR can reach on this setting.
"""
import argparse

import numpy as np

from robust_estim.core import SolverConfig, ols
from robust_estim.crr import solve_crr
from robust_estim.datagen import CorruptionPlan, gen_regression


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=200)
    args = ap.parse_args()

    errs = {"ols": [], "crr_k": [], "crr_2k": [], "clean_oracle": []}
    for s in range(args.trials):
        p = gen_regression(2000, 10, 1.0, CorruptionPlan(100), seed=s)
        w = p.truth.w_star
        keep = p.truth.b_star == 0
        errs["ols"].append(np.linalg.norm(ols(p.X, p.y) - w))
        errs["crr_k"].append(np.linalg.norm(solve_crr(p, SolverConfig(k=100)).w - w))
        errs["crr_2k"].append(np.linalg.norm(solve_crr(p, SolverConfig(k=200)).w - w))
        errs["clean_oracle"].append(np.linalg.norm(ols(p.X[:, keep], p.y[keep]) - w))
    base = np.median(errs["ols"])
    print("estimator,median_err,ratio_to_ols")
    for name, e in errs.items():
        print(f"{name},{np.median(e):.5f},{np.median(e) / base:.3f}")


if __name__ == "__main__":
    main()
