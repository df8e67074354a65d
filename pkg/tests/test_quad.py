"""Log-domain panel quadrature against analytic integrals."""

import math

import numpy as np
import pytest

from extreme_gibbs.errors import NumericError
from extreme_gibbs.quad import find_peak, log_integral


def test_gaussian_full_line():
    res = log_integral(lambda x: -0.5 * x**2, center=0.0, scale=1.0)
    assert res.log_value == pytest.approx(0.5 * math.log(2 * math.pi), abs=1e-13)


def test_gaussian_half_line():
    res = log_integral(lambda x: -0.5 * x**2, center=0.0, scale=1.0, lo=0.0)
    assert res.log_value == pytest.approx(0.5 * math.log(2 * math.pi) - math.log(2), abs=1e-13)


def test_shifted_narrow_gaussian():
    # the integrand's own (x - mu) cancellation at mu = 500 caps the accuracy
    mu, sig = 500.0, 1e-3
    res = log_integral(lambda x: -0.5 * ((x - mu) / sig) ** 2, center=mu, scale=sig, lo=0.0)
    assert res.log_value == pytest.approx(0.5 * math.log(2 * math.pi) + math.log(sig), abs=1e-9)


def test_exponential_tail():
    # int_0^inf e^(-3x) dx = 1/3; peak sits at the boundary
    res = log_integral(lambda x: -3.0 * x, center=0.0, scale=1.0 / 3.0, lo=0.0)
    assert res.log_value == pytest.approx(-math.log(3.0), abs=1e-12)


def test_moments_from_nodes():
    mu, sig = 2.5, 0.7
    res = log_integral(lambda x: -0.5 * ((x - mu) / sig) ** 2, center=mu, scale=sig)
    p = np.exp(res.log_terms - res.log_value)
    u = res.offsets
    u_mean = np.sum(p * u)
    mean = res.center + res.scale * u_mean
    var = res.scale**2 * np.sum(p * (u - u_mean) ** 2)
    mu3 = res.scale**3 * np.sum(p * (u - u_mean) ** 3)
    assert mean == pytest.approx(mu, abs=1e-12)
    assert var == pytest.approx(sig**2, rel=1e-12)
    assert abs(mu3) < 1e-14


def test_divergent_integrand_raises():
    with pytest.raises(NumericError):
        log_integral(lambda x: 0.1 * x, center=0.0, scale=1.0, lo=0.0)


def test_find_peak_interior():
    xhat, sigma = find_peak(lambda x: -0.5 * ((x - 7.0) / 0.3) ** 2, lo=0.0)
    assert xhat == pytest.approx(7.0, abs=1e-6)
    assert sigma == pytest.approx(0.3, rel=1e-3)


def test_find_peak_at_boundary():
    xhat, sigma = find_peak(lambda x: -2.0 * x, lo=0.0)
    assert xhat < 1e-6
    assert 0.1 < sigma < 1.0
