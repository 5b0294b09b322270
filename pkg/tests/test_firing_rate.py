"""Rate families, their closed-form pieces, and the regime estimates."""

import math

import numpy as np
import pytest
from scipy import integrate, optimize

from agenet import (ConstantRate, SmoothSaturatingRate, StepRate, estimate_xi,
                    half_rate_age, moment_tail_constant, weight_threshold_age)


def test_constant_rate_values():
    model = ConstantRate(k0=2.0)
    assert model.k1 == 2.0
    assert model.rate(0.7, 0.3) == 2.0
    assert np.array_equal(model.rate(np.array([0.0, 1.0]), 0.0), [2.0, 2.0])
    assert model.cumulative(3.0, 0.0) == 6.0


def test_constructor_invariants():
    with pytest.raises(ValueError):
        ConstantRate(k0=0.0)
    with pytest.raises(ValueError):
        ConstantRate(k0=1.0, lam=-0.1)
    with pytest.raises(ValueError):
        SmoothSaturatingRate(k0=1.0, k1=0.5)
    with pytest.raises(ValueError):
        SmoothSaturatingRate(k0=1.0, k1=2.0, mu_scale=0.0)
    with pytest.raises(ValueError):
        StepRate(sigma_plus=0.3, sigma_minus=0.4)
    with pytest.raises(ValueError):
        StepRate(sigma_plus=1.2, sigma_minus=0.4)
    with pytest.raises(ValueError):
        StepRate(sigma_plus=0.5, sigma_minus=0.25, decay=0.0)


def test_domain_checks():
    model = ConstantRate(k0=1.0)
    with pytest.raises(ValueError):
        model.rate(-0.5, 0.0)
    with pytest.raises(ValueError):
        model.rate(0.5, -0.1)
    with pytest.raises(ValueError):
        model.rate(0.5, np.array([0.1, 0.2]))


def test_smooth_rate_shape_and_bounds():
    model = SmoothSaturatingRate(k0=0.5, k1=2.0, lam=1.0)
    assert model.rate(0.0, 0.3) == 0.0
    assert model.gain(0.0) == 0.5
    x = np.linspace(0.0, 20.0, 200)
    r = model.rate(x, 0.7)
    assert np.all(r >= 0.0) and np.all(r <= 2.0)
    assert np.all(np.diff(r) >= 0.0)
    # nondecreasing in the activity as well
    assert np.all(model.rate(x, 1.4) >= r - 1e-15)


def test_smooth_cumulative_matches_quadrature():
    rng = np.random.default_rng(7)
    for _ in range(5):
        model = SmoothSaturatingRate(
            k0=float(rng.uniform(0.2, 1.0)),
            k1=float(rng.uniform(1.0, 3.0)),
            lam=float(rng.uniform(0.0, 1.5)),
            mu_scale=float(rng.uniform(0.5, 2.0)),
            x_scale=float(rng.uniform(0.5, 2.0)))
        mu = float(rng.uniform(0.0, 1.0))
        x = float(rng.uniform(0.5, 8.0))
        ref, _ = integrate.quad(lambda z: model.rate(z, mu), 0.0, x,
                                epsabs=1e-13, epsrel=1e-13)
        assert abs(model.cumulative(x, mu) - ref) < 1e-10


def test_smooth_cumulative_handles_arrays_and_order():
    model = SmoothSaturatingRate(k0=0.5, k1=2.0)
    xs = np.array([3.0, 0.5, 1.2, 0.0])
    out = model.cumulative(xs, 0.0)
    assert out.shape == xs.shape
    for xi, oi in zip(xs, out):
        assert oi == pytest.approx(model.cumulative(float(xi), 0.0), abs=1e-12)


def test_step_rate_threshold_and_indicator():
    model = StepRate(sigma_plus=0.5, sigma_minus=0.25, lam=1.0, decay=2.0)
    assert model.threshold(0.0) == 0.5
    assert model.threshold(100.0) == pytest.approx(0.25, abs=1e-12)
    mus = np.linspace(0.0, 5.0, 50)
    ths = [model.threshold(m) for m in mus]
    assert all(a >= b for a, b in zip(ths, ths[1:]))
    assert model.rate(0.49, 0.0) == 0.0
    assert model.rate(0.51, 0.0) == 1.0
    assert model.cumulative(0.3, 0.0) == 0.0
    assert model.cumulative(1.5, 0.0) == 1.0
    assert model.k0 == 1.0 and model.k1 == 1.0


def test_step_rate_custom_threshold_map():
    model = StepRate(sigma_plus=0.5, sigma_minus=0.25, lam=2.0,
                     sigma=lambda u: 0.6 / (1.0 + u), sigma_modulus=0.6)
    # lam scales the activity before sigma sees it
    assert model.threshold(1.0) == pytest.approx(0.2)
    assert model.rate(0.25, 1.0) == 1.0


def test_estimate_xi_constant_rate():
    est = estimate_xi(ConstantRate(k0=2.0, lam=1.0))
    assert est.xi == 0.0
    assert math.isinf(est.lambda_weak)
    assert est.lambda_strong == 0.0


def test_estimate_xi_frozen_step_values():
    model = StepRate(sigma_plus=0.5, sigma_minus=0.25, lam=0.05)
    est = estimate_xi(model)
    assert est.xi == pytest.approx(0.012490239459282293, abs=1e-9)
    assert est.lambda_weak == pytest.approx(1.0159583460664454, abs=1e-9)
    assert 0.0 < est.lambda_weak < est.lambda_strong


def test_estimate_xi_custom_sigma_without_modulus():
    model = StepRate(sigma_plus=0.5, sigma_minus=0.25, lam=1.0,
                     sigma=lambda u: 0.4)
    est = estimate_xi(model)
    assert math.isinf(est.xi)
    assert est.lambda_weak == 0.0
    assert math.isinf(est.lambda_strong)


def test_estimate_xi_validation():
    model = ConstantRate(k0=1.0)
    with pytest.raises(ValueError):
        estimate_xi(model, mu_range=(0.5, 0.5))
    with pytest.raises(ValueError):
        estimate_xi(model, mu_range=(-0.1, 1.0))
    with pytest.raises(ValueError):
        estimate_xi(model, samples=1)


def test_half_rate_age():
    assert half_rate_age(ConstantRate(k0=3.0)) == 0.0
    step = StepRate(sigma_plus=0.5, sigma_minus=0.25)
    assert half_rate_age(step) == pytest.approx(0.5, abs=1e-9)
    smooth = SmoothSaturatingRate(k0=0.5, k1=2.0)
    # rate(x, 0) = k0 (1 - e^{-x}) reaches k0/2 at ln 2
    assert half_rate_age(smooth) == pytest.approx(math.log(2.0), abs=1e-9)


def test_weight_threshold_age_against_direct_root():
    model = SmoothSaturatingRate(k0=0.5, k1=2.0)
    x0 = weight_threshold_age(model, 1.0)
    ref = optimize.brentq(
        lambda x: 0.5 * (1.0 - math.exp(-x)) - 1.0 / x - 0.25, 1.0, 50.0,
        xtol=1e-13)
    assert x0 == pytest.approx(ref, abs=1e-9)
    assert weight_threshold_age(ConstantRate(k0=1.0), 0.0) == 1.0
    with pytest.raises(ValueError):
        weight_threshold_age(model, -1.0)


def test_moment_tail_constant_formula():
    model = SmoothSaturatingRate(k0=0.5, k1=2.0)
    q = 1.0
    x0 = weight_threshold_age(model, q)
    expected = 2.0 * x0 ** q * (1.0 + model.k1 / model.k0)
    assert moment_tail_constant(model, q) == pytest.approx(expected, rel=1e-12)
