import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robust_estim.ar import lagged_design
from robust_estim.core import InvalidArgs, NonStationary
from robust_estim.datagen import draw_ar_coefficients, gen_ar_series
from robust_estim.spectral import (
    companion_matrix,
    spectral_density,
    spectral_extrema,
    spectral_summary,
    stationarity_check,
    var_operator,
    var_spectral_bound,
)


def test_density_examples():
    assert spectral_density([0.0], 1.7, 0.3) == pytest.approx(1.7 ** 2)
    assert spectral_density([0.5], 1.0, 0.0) == pytest.approx(4.0)
    assert spectral_density([0.5], 1.0, np.pi) == pytest.approx(4 / 9)


def test_density_complex_oracle(rng):
    w = draw_ar_coefficients(rng, 4)
    om = np.linspace(0, 2 * np.pi, 37)
    ks = np.arange(1, 5)
    ref = 1.0 / np.abs(1 - np.exp(1j * np.outer(om, ks)) @ w) ** 2
    np.testing.assert_allclose(spectral_density(w, 1.0, om), ref, rtol=1e-12)


def test_density_requires_stationary():
    with pytest.raises(NonStationary):
        spectral_density([1.0], 1.0, 0.0)


@pytest.mark.parametrize("w", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_ar1_extrema_closed_form(w):
    big, small = spectral_extrema([w], 1.0)
    assert big == pytest.approx(1 / (1 - w) ** 2, abs=1e-6)
    assert small == pytest.approx(1 / (1 + w) ** 2, abs=1e-6)
    assert var_spectral_bound([w], 1.0) == pytest.approx(1 / (1 - w) ** 2, abs=1e-6)


def test_white_noise_extrema():
    assert spectral_extrema([0.0, 0.0], 2.0) == pytest.approx((4.0, 4.0))
    # with d >= 2 the companion shift rows keep M_W above sigma^2
    assert var_spectral_bound([0.0], 2.0) == pytest.approx(4.0)
    assert var_spectral_bound([0.0, 0.0], 2.0) > 4.0


def test_companion_examples():
    np.testing.assert_array_equal(companion_matrix([0.5]), [[0.5]])
    np.testing.assert_array_equal(companion_matrix([0.2, 0.3]), [[0.2, 0.3], [1.0, 0.0]])


def test_stationarity_examples():
    assert stationarity_check([0.5])
    assert not stationarity_check([1.0])
    assert not stationarity_check([0.5, 0.5])


def test_grid_size_floor():
    with pytest.raises(InvalidArgs):
        spectral_extrema([0.5], 1.0, grid_size=100)


def test_var_operator_hermitian_and_scalar():
    H = var_operator([0.3, -0.2, 0.1], 0.7)
    np.testing.assert_allclose(H, H.conj().T, atol=1e-14)
    assert var_operator([0.5], 0.0)[0, 0].real == pytest.approx(0.25)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32), d=st.integers(1, 6), om=st.floats(0, 2 * np.pi))
def test_density_symmetry(seed, d, om):
    w = draw_ar_coefficients(np.random.default_rng(seed), d)
    assert spectral_density(w, 1.0, om) == pytest.approx(spectral_density(w, 1.0, 2 * np.pi - om), rel=1e-9)


def test_summary_fields():
    s = spectral_summary([0.5], 1.0)
    assert s.big_m == pytest.approx(4.0) and s.small_m == pytest.approx(4 / 9)
    assert s.m_w_companion == pytest.approx(4.0) and s.grid_size == 4096


def test_covariance_sandwich_ar1():
    rec = gen_ar_series(10**5, 1, 1.0, seed=0, w_star=[0.5])
    X, _ = lagged_design(rec.values, 3)
    ev = np.linalg.eigvalsh(X @ X.T / X.shape[1])
    big, small = spectral_extrema([0.5], 1.0)
    assert ev.min() >= small - 0.05 and ev.max() <= big + 0.05
