"""Model specs, exact spectra, and panel simulation."""

import numpy as np
import pytest

from coherlss import (
    InvalidArgumentError,
    ModelSpec,
    TimeSeriesPanel,
    autocovariance,
    simulate_panel,
    spectral_density,
    spectral_density_derivative,
)


def test_model_validation():
    with pytest.raises(InvalidArgumentError):
        ModelSpec("garch")
    with pytest.raises(InvalidArgumentError):
        ModelSpec("white_noise", theta=0.3)
    with pytest.raises(InvalidArgumentError):
        ModelSpec.ar1(1.0)
    with pytest.raises(InvalidArgumentError):
        ModelSpec.ar1(-1.2)
    with pytest.raises(InvalidArgumentError):
        ModelSpec.ar1(0.3 + 0.1j)
    with pytest.raises(InvalidArgumentError):
        ModelSpec.ar1(0.4, gamma0=2)
    assert ModelSpec.ar1(0.0).is_white
    assert ModelSpec.white_noise().is_white
    assert not ModelSpec.ar1(0.4).is_white


def test_spectral_density_white_is_one():
    model = ModelSpec.white_noise()
    nus = np.linspace(-1.0, 2.0, 17)
    assert spectral_density(model, 0.3) == 1.0
    np.testing.assert_allclose(spectral_density(model, nus), np.ones_like(nus))
    np.testing.assert_allclose(spectral_density_derivative(model, nus), 0.0)


def test_spectral_density_matches_autocovariance_series():
    # s(nu) = sum_u r_u e^{-2 i pi u nu}; the tail beyond |u|=80 is < 1e-30
    model = ModelSpec.ar1(0.4)
    for nu in (0.0, 0.1, 0.25, 0.37, 0.5, 0.93):
        acc = autocovariance(model, 0)
        for u in range(1, 81):
            r = autocovariance(model, u)
            acc += 2.0 * r * np.cos(2.0 * np.pi * u * nu)
        assert abs(spectral_density(model, nu) - acc) < 1e-12


def test_spectral_density_closed_form_values():
    model = ModelSpec.ar1(0.4)
    # at nu = 0: 1/(1-theta)^2; at nu = 1/2: 1/(1+theta)^2
    assert abs(spectral_density(model, 0.0) - 1.0 / 0.36) < 1e-14
    assert abs(spectral_density(model, 0.5) - 1.0 / 1.96) < 1e-14
    assert abs(spectral_density(model, 0.2) - spectral_density(model, 1.2)) < 1e-12


def test_spectral_density_derivative_finite_difference():
    model = ModelSpec.ar1(0.4)
    h = 1e-6
    for nu in (0.07, 0.2, 0.33, 0.48, 0.61):
        fd = (spectral_density(model, nu + h) - spectral_density(model, nu - h)) / (2 * h)
        closed = spectral_density_derivative(model, nu)
        assert abs(closed - fd) <= 1e-5 * max(1.0, abs(closed))
    assert spectral_density_derivative(model, 0.0) == 0.0
    assert abs(spectral_density_derivative(model, 0.5)) < 1e-12


def test_autocovariance_values():
    white = ModelSpec.white_noise()
    assert autocovariance(white, 0) == 1.0
    assert autocovariance(white, 3) == 0.0
    model = ModelSpec.ar1(0.4)
    assert abs(autocovariance(model, 0) - 1.0 / 0.84) < 1e-15
    assert abs(autocovariance(model, 3) - 0.4 ** 3 / 0.84) < 1e-15
    assert autocovariance(model, -3) == autocovariance(model, 3)


def test_simulate_panel_deterministic():
    model = ModelSpec.ar1(0.4)
    a = simulate_panel(model, 4, 64, seed=123)
    b = simulate_panel(model, 4, 64, seed=123)
    c = simulate_panel(model, 4, 64, seed=124)
    np.testing.assert_array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)
    assert a.M == 4 and a.N == 64


def test_simulate_panel_rows_keyed_independently():
    # row m depends only on (seed, m): growing M must not change earlier rows
    model = ModelSpec.white_noise()
    small = simulate_panel(model, 2, 32, seed=9)
    large = simulate_panel(model, 5, 32, seed=9)
    np.testing.assert_array_equal(small.data, large.data[:2])


def test_ar1_theta_zero_equals_white_noise():
    a = simulate_panel(ModelSpec.ar1(0.0), 3, 50, seed=5)
    b = simulate_panel(ModelSpec.white_noise(), 3, 50, seed=5)
    np.testing.assert_array_equal(a.data, b.data)


def test_white_noise_moments():
    panel = simulate_panel(ModelSpec.white_noise(), 8, 4096, seed=2)
    y = panel.data
    # unit complex variance, split evenly between parts, mean zero
    assert abs(np.mean(np.abs(y) ** 2) - 1.0) < 0.02
    assert abs(np.var(y.real) - 0.5) < 0.02
    assert abs(np.var(y.imag) - 0.5) < 0.02
    assert abs(np.mean(y)) < 0.02
    # circularity: E[y^2] = 0 (not just E|y|^2 = 1)
    assert abs(np.mean(y ** 2)) < 0.02


def test_ar1_panel_matches_model_autocovariance():
    theta = 0.4
    model = ModelSpec.ar1(theta)
    panel = simulate_panel(model, 16, 8192, seed=31)
    y = panel.data
    r0 = np.mean(np.abs(y) ** 2)
    r1 = np.mean(y[:, 1:] * np.conj(y[:, :-1]))
    r2 = np.mean(y[:, 2:] * np.conj(y[:, :-2]))
    assert abs(r0 - autocovariance(model, 0)) < 0.03
    assert abs(r1 - autocovariance(model, 1)) < 0.03
    assert abs(r2 - autocovariance(model, 2)) < 0.03
    # stationary start: the first sample already has the stationary variance
    first = np.abs(simulate_panel(model, 4096, 1, seed=8).data[:, 0]) ** 2
    assert abs(np.mean(first) - 1.0 / (1.0 - theta ** 2)) < 0.05


def test_seed_validation():
    model = ModelSpec.white_noise()
    with pytest.raises(InvalidArgumentError):
        simulate_panel(model, 2, 8, seed=-1)
    with pytest.raises(InvalidArgumentError):
        simulate_panel(model, 2, 8, seed=2 ** 64)
    with pytest.raises(InvalidArgumentError):
        simulate_panel(model, 2, 8, seed=1.5)
    simulate_panel(model, 2, 8, seed=2 ** 64 - 1)


def test_panel_validation():
    with pytest.raises(InvalidArgumentError):
        TimeSeriesPanel(np.zeros((0, 4)), ModelSpec.white_noise(), 0)
    with pytest.raises(InvalidArgumentError):
        TimeSeriesPanel(np.zeros(4), ModelSpec.white_noise(), 0)
    with pytest.raises(InvalidArgumentError):
        simulate_panel(ModelSpec.white_noise(), 0, 4, seed=0)
