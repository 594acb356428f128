import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gross_fixture(seed=3, n=20, d=2, k_star=1, magnitude=15.0):
    """Noiseless regression with ``k_star`` gross corruptions of equal magnitude."""
    from robust_estim.core import GroundTruthReg, RegressionProblem

    r = np.random.default_rng(seed)
    X = r.standard_normal((d, n))
    w = r.standard_normal(d)
    b = np.zeros(n)
    locs = np.sort(r.choice(n, size=k_star, replace=False))
    b[locs] = magnitude
    truth = GroundTruthReg(w_star=w, b_star=b, eps=np.zeros(n), support=locs, sigma=0.0)
    return RegressionProblem(X=X, y=X.T @ w + b, truth=truth)


ACCEPTANCE = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    line = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for c in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[c])
