"""Rate function, saddlepoint tail formulas, and the exceedance mixture."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad as sp_quad
from scipy.special import erf
from scipy.stats import norm

from extreme_gibbs.errors import DomainError
from extreme_gibbs.exceedance import (
    ExceedanceMixture,
    eta_window,
    exceedance_approx,
    rate_function,
    sum_density,
    tail_probability,
    window_tail_masses,
)
from extreme_gibbs.oracle import ConditionalOracle, get_oracle, tv_distance
from extreme_gibbs.tilt import solve_tilt, tilt_moments, tilted_density


class TestRateFunction:
    def test_zero_at_the_mean(self, weibull2):
        m0 = tilt_moments(weibull2, 0.0).a
        assert abs(rate_function(weibull2, m0).I) < 1e-9

    def test_half_gaussian_closed_form(self, half_gauss):
        rp = rate_function(half_gauss, 5.0)
        closed = 5.0 * rp.t - half_gauss.closed_forms.log_mgf(rp.t)
        assert rp.I == pytest.approx(closed, abs=1e-8)

    def test_legendre_duality(self, weibull2):
        # dI/dx equals the solved tilt parameter
        for x in (2.0, 3.0, 5.0):
            dx = 1e-4 * x
            slope = (rate_function(weibull2, x + dx).I - rate_function(weibull2, x - dx).I) / (
                2 * dx
            )
            assert slope == pytest.approx(rate_function(weibull2, x).t, rel=1e-5)

    def test_increasing_beyond_the_mean(self, weibull2):
        vals = [rate_function(weibull2, x).I for x in (1.2, 2.0, 3.0, 5.0, 8.0)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    @given(
        st.floats(min_value=1.0, max_value=8.0),
        st.floats(min_value=1.0, max_value=8.0),
    )
    def test_midpoint_convexity(self, weibull2, x1, x2):
        mid = rate_function(weibull2, 0.5 * (x1 + x2)).I
        avg = 0.5 * (rate_function(weibull2, x1).I + rate_function(weibull2, x2).I)
        assert mid <= avg + 1e-10


class TestTailProbability:
    def test_two_fold_half_gaussian(self, half_gauss):
        # oracle: integral of the closed-form two-fold convolution density
        closed, _ = sp_quad(
            lambda s: (2.0 / math.sqrt(math.pi)) * erf(s / 2.0) * math.exp(-(s**2) / 4.0),
            6.0,
            40.0,
            epsabs=1e-16,
        )
        ratio = math.exp(tail_probability(half_gauss, 2, 3.0)) / closed
        assert 0.5 <= ratio <= 2.0

    def test_ratio_tightens_with_n(self, weibull2):
        gaps = []
        for n in (16, 32, 64):
            orc = get_oracle(weibull2, n, 2.0)
            gaps.append(abs(math.exp(tail_probability(weibull2, n, 2.0) - orc.log_tail()) - 1.0))
        assert gaps[0] > gaps[1] > gaps[2]
        assert 0.7 <= math.exp(tail_probability(weibull2, 64, 2.0) - get_oracle(weibull2, 64, 2.0).log_tail()) <= 1.4

    def test_log_concavity_in_level(self, weibull2):
        levels = np.linspace(1.5, 5.0, 15)
        logs = np.array([tail_probability(weibull2, 16, a) for a in levels])
        assert np.all(np.diff(logs, 2) <= 1e-9)

    def test_below_mean_rejected(self, weibull2):
        with pytest.raises(DomainError):
            tail_probability(weibull2, 16, 0.3)


class TestSumDensity:
    def test_oracle_factor(self, weibull2):
        # grid-convolution density of the mean at tau = 2, n = 32
        orc = get_oracle(weibull2, 32, 2.0)
        ratio = math.exp(sum_density(weibull2, 32, 2.0) - orc.log_mean_density(2.0))
        assert 0.8 <= ratio <= 1.25

    def test_clt_value_at_the_mean(self, weibull2):
        m0 = tilt_moments(weibull2, 0.0).a
        s0 = math.sqrt(tilt_moments(weibull2, 0.0).s2)
        n = 10_000
        clt = math.log(math.sqrt(n) * norm.pdf(0.0) / s0)
        assert sum_density(weibull2, n, m0) == pytest.approx(clt, abs=0.05)

    def test_mean_density_normalizes(self, weibull2):
        n = 64
        tp0 = tilt_moments(weibull2, 0.0)
        m0, s0 = tp0.a, math.sqrt(tp0.s2)
        taus = np.linspace(m0 - 8 * s0 / math.sqrt(n), m0 + 8 * s0 / math.sqrt(n), 161)
        vals = np.array([math.exp(sum_density(weibull2, n, t)) for t in taus])
        assert np.trapezoid(vals, taus) == pytest.approx(1.0, abs=0.05)


class TestEtaWindow:
    def test_formula_value(self, weibull2):
        tp = solve_tilt(weibull2, 2.0)
        assert eta_window(weibull2, 10_000, 2.0) == pytest.approx(
            math.log(10_000) / (100.0 * tp.t), rel=1e-12
        )

    def test_product_grows_without_bound(self, weibull2):
        tp = solve_tilt(weibull2, 2.0)
        prods = [n * tp.t * eta_window(weibull2, n, 2.0) for n in (16, 64, 256, 1024)]
        assert all(b > a for a, b in zip(prods, prods[1:]))

    def test_decreasing_in_n(self, weibull2):
        etas = [eta_window(weibull2, n, 2.0) for n in (8, 16, 32, 64, 128)]
        assert all(b < a for a, b in zip(etas, etas[1:]))


class TestMixture:
    def test_weights_decrease_in_level(self, weibull2):
        mix = ExceedanceMixture(weibull2, 16, 2.0)
        wv = mix.weight_values()
        assert np.all(np.diff(wv) < 0)

    def test_unit_mass(self, weibull2):
        mix = ExceedanceMixture(weibull2, 16, 2.0)
        ys = np.arange(0.0, 2.0 + 12 * mix.tp.s, 1e-3)
        assert np.trapezoid(mix.density(ys), ys) == pytest.approx(1.0, abs=1e-6)

    def test_degenerate_window_recovers_tilted(self, weibull2):
        tp = solve_tilt(weibull2, 2.0)
        mix = ExceedanceMixture(weibull2, 16, 2.0, eta=1e-9)
        for y in (1.3, 2.0, 2.7):
            assert mix.density(y) == pytest.approx(
                float(tilted_density(weibull2, tp, y)), rel=1e-6
            )

    def test_raw_prefactor_reported(self, weibull2):
        # the literal asymptotic prefactor carries mass near 1/n, not 1
        mix = ExceedanceMixture(weibull2, 32, 2.0)
        assert 0.0 < mix.raw_prefactor < 0.2
        assert mix.raw_prefactor == pytest.approx(1.0 / 32.0, rel=0.25)

    def test_matches_oracle_and_improves_with_n(self, weibull2):
        tvs = []
        for n in (8, 16):
            orc = get_oracle(weibull2, n, 2.0)
            mix = ExceedanceMixture(weibull2, n, 2.0)
            ys = orc.default_ygrid()
            tvs.append(
                tv_distance(lambda y: orc.exceedance_curve(y), lambda y: mix.density(y), grid=ys).tv
            )
        assert tvs[1] < tvs[0]
        assert tvs[0] < 0.1

    def test_modulated_variant_close_in_moderate_regime(self, weibull2):
        lit = ExceedanceMixture(weibull2, 32, 2.0, variant="tilted")
        mod = ExceedanceMixture(weibull2, 32, 2.0, variant="gaussian_modulated")
        grid = (0.0, 6.0, 2e-3)
        assert tv_distance(lambda y: lit.density(y), lambda y: mod.density(y), grid=grid).tv < 0.05

    def test_cached_entrypoint(self, weibull2):
        val = exceedance_approx(weibull2, 16, 2.0, 2.0)
        assert val == pytest.approx(ExceedanceMixture(weibull2, 16, 2.0).density(2.0), rel=1e-12)


class TestWindowMasses:
    def test_beyond_window_mass_is_negligible(self, weibull2):
        lp1, lp2 = window_tail_masses(weibull2, 64, 2.0)
        assert math.exp(lp2 - lp1) < 0.01

    def test_mass_ratio_shrinks_with_n(self, weibull2):
        ratios = [math.exp(np.diff(window_tail_masses(weibull2, n, 2.0))[0]) for n in (8, 32)]
        assert ratios[1] < ratios[0]
