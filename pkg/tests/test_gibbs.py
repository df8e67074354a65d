"""Conditional-law approximations: regimes, modulation, joints, f-means."""

import math

import numpy as np
import pytest
from dataclasses import replace
from hypothesis import given
from hypothesis import strategies as st

from extreme_gibbs.errors import DomainError, RegimeWarning
from extreme_gibbs.gibbs import (
    classify_regime,
    concentration_summary,
    f_tilted_approx,
    fast_growth_approx,
    fast_growth_params,
    identity,
    joint_fast_approx,
    joint_moderate_approx,
    solve_f_tilt,
    tilted_approx,
    variance_power_fit,
    z_statistics,
)
from extreme_gibbs.oracle import get_oracle, tv_distance
from extreme_gibbs.quad import log_integral
from extreme_gibbs.tilt import solve_tilt, tilt_moments, tilted_density


class TestRegime:
    def test_moderate_example(self, weibull2):
        reg = classify_regime(weibull2, 10_000, 2.0)
        assert reg.kind == "moderate"
        assert reg.ratio == pytest.approx(0.03, abs=0.01)

    def test_power_law_levels_land_fast(self, weibull2):
        # variance roughly constant, so a_n ~ c n^(1/(1+rho)) with rho ~ 0
        rho = variance_power_fit(weibull2)
        assert abs(rho) < 0.05
        a_n = 0.5 * 32 ** (1.0 / (1.0 + rho))
        assert classify_regime(weibull2, 32, a_n).kind == "fast"

    def test_out_of_scope(self, weibull2):
        assert classify_regime(weibull2, 4, 60.0).kind == "out_of_scope"

    @given(st.floats(min_value=1.0, max_value=30.0), st.floats(min_value=0.1, max_value=5.0))
    def test_ratio_monotone_in_level(self, half_gauss, a, bump):
        n = 16
        assert (
            classify_regime(half_gauss, n, a + bump).ratio
            >= classify_regime(half_gauss, n, a).ratio
        )


class TestTiltedApprox:
    def test_outside_support_is_zero(self, weibull2):
        assert tilted_approx(weibull2, 64, 2.0, -1.0) == 0.0

    def test_peak_near_level(self, half_gauss):
        ys = np.linspace(0.0, 10.0, 2001)
        vals = tilted_approx(half_gauss, 64, 5.0, ys)
        assert abs(ys[np.argmax(vals)] - 5.0) < 0.5

    def test_warns_outside_moderate_regime(self, weibull2):
        with pytest.warns(RegimeWarning):
            tilted_approx(weibull2, 4, 8.0, 8.0)


class TestFastGrowth:
    def test_alpha_formula_and_zero_skew_case(self, weibull2):
        tp = solve_tilt(weibull2, 3.0)
        params = fast_growth_params(weibull2, 16, 3.0, tp=tp)
        assert params.alpha == tp.t + tp.mu3 / (2.0 * 15.0 * tp.s2)
        sym = replace(tp, mu3=0.0)
        params0 = fast_growth_params(weibull2, 16, 3.0, tp=sym)
        assert params0.alpha == sym.t

    def test_beta_is_rows_times_variance(self, weibull2):
        tp = tilt_moments(weibull2, 2.0)
        params = fast_growth_params(weibull2, 16, tp.a, tp=tp)
        assert params.beta == 15.0 * tp.s2

    def test_unit_mass(self, weibull2):
        params = fast_growth_params(weibull2, 16, 3.0)
        res = log_integral(
            lambda y: np.log(np.maximum(fast_growth_approx(params, weibull2, y), 1e-300)),
            center=3.0,
            scale=params.tp.s,
            lo=0.0,
        )
        assert math.exp(res.log_value) == pytest.approx(1.0, abs=1e-8)

    def test_moderate_consistency_with_tilted(self, weibull2):
        # at n = 64, a = 2 the modulated and plain tilted densities are close
        params = fast_growth_params(weibull2, 64, 2.0)
        grid = (0.0, 6.0, 1e-3)
        res = tv_distance(
            lambda y: fast_growth_approx(params, weibull2, y),
            lambda y: tilted_approx(weibull2, 64, 2.0, y),
            grid=grid,
        )
        assert res.tv < 0.05

    def test_modulation_fades_as_n_grows(self, weibull2):
        # at fixed level the two approximations merge as the rows lengthen
        tp = solve_tilt(weibull2, 2.0)
        grid = (0.0, 6.0, 1e-3)
        tvs = []
        for n in (8, 16, 32, 64):
            params = fast_growth_params(weibull2, n, 2.0, tp=tp)
            tvs.append(
                tv_distance(
                    lambda y: fast_growth_approx(params, weibull2, y),
                    lambda y: tilted_approx(weibull2, n, 2.0, y, tp=tp),
                    grid=grid,
                ).tv
            )
        assert all(b < a for a, b in zip(tvs, tvs[1:]))

    def test_fast_regime_beats_tilted(self, weibull2):
        rho = variance_power_fit(weibull2)
        a_n = 0.5 * 32 ** (1.0 / (1.0 + rho))
        orc = get_oracle(weibull2, 32, a_n)
        ys = orc.default_ygrid()
        params = fast_growth_params(weibull2, 32, a_n, tp=orc.tp)
        tv_mod = tv_distance(
            lambda y: orc.conditional_curve(y),
            lambda y: fast_growth_approx(params, weibull2, y),
            grid=ys,
        ).tv
        tv_til = tv_distance(
            lambda y: orc.conditional_curve(y),
            lambda y: tilted_approx(weibull2, 32, a_n, y, tp=orc.tp),
            grid=ys,
        ).tv
        assert tv_mod <= tv_til + 0.01


class TestJointBlocks:
    def test_block_length_guard(self, weibull2):
        with pytest.raises(DomainError):
            joint_moderate_approx(weibull2, 8, 3.0, [3.0, 3.0, 3.0])

    def test_common_tilt_k1_equals_marginal(self, weibull2):
        tp = solve_tilt(weibull2, 3.0)
        val = joint_moderate_approx(weibull2, 16, 3.0, [2.7], mode="common_tilt")
        assert val == pytest.approx(float(tilted_density(weibull2, tp, 2.7)), rel=1e-12)

    def test_equal_coordinates_collapse_the_modes(self, weibull2):
        # when every y equals a_n each running level stays at a_n
        ys = [3.0, 3.0, 3.0]
        common = joint_moderate_approx(weibull2, 16, 3.0, ys, mode="common_tilt")
        per_index = joint_moderate_approx(weibull2, 16, 3.0, ys, mode="per_index_tilt")
        assert per_index == pytest.approx(common, rel=1e-9)

    def test_per_index_levels(self, weibull2):
        # n = 8, a = 3, ys = (2, 3): levels are 22/7 then 19/6
        val = joint_moderate_approx(weibull2, 8, 3.0, [2.0, 3.0], mode="per_index_tilt")
        tp1 = solve_tilt(weibull2, 22.0 / 7.0)
        tp2 = solve_tilt(weibull2, 19.0 / 6.0)
        expect = float(tilted_density(weibull2, tp1, 2.0)) * float(
            tilted_density(weibull2, tp2, 3.0)
        )
        assert val == pytest.approx(expect, rel=1e-10)

    def test_fast_k1_reduces_to_marginal(self, weibull2):
        # the k = 1 factor uses n rows, which is the marginal at row size n+1
        n, a = 16, 3.0
        joint = joint_fast_approx(weibull2, n, a, [2.8])
        params = fast_growth_params(weibull2, n + 1, a)
        marginal = fast_growth_approx(params, weibull2, 2.8)
        assert joint == pytest.approx(marginal, rel=1e-12)

    def test_fast_factors_are_normalized(self, weibull2):
        from extreme_gibbs.gibbs import _fast_factor

        fp = _fast_factor(weibull2, 15, 3.0, 3.0)
        res = log_integral(
            lambda y: np.log(np.maximum(fast_growth_approx(fp, weibull2, y), 1e-300)),
            center=3.0,
            scale=fp.tp.s,
            lo=0.0,
        )
        assert math.exp(res.log_value) == pytest.approx(1.0, abs=1e-8)

    def test_joint_tv_decreases_with_n(self, weibull2):
        tvs = []
        for n in (8, 16):
            orc = get_oracle(weibull2, n, 3.0)
            s = orc.tp.s
            grid = np.arange(max(0.0, 3.0 - 8 * s), 3.0 + 8 * s, 0.02)
            exact = orc.joint2_grid(grid, grid)
            marg = tilted_approx(weibull2, n, 3.0, grid, tp=orc.tp)
            prod = np.outer(marg, marg)
            from extreme_gibbs.oracle import tv_from_values

            tvs.append(tv_from_values(exact.ravel(), prod.ravel(), 0.02**2))
        assert tvs[1] < tvs[0]

    def test_fast_joint_beats_common_tilt_in_fast_regime(self, weibull2):
        # k = 2 at a fast-growth level: the coupled modulated product tracks
        # the exact joint at least as well as the independence product
        from extreme_gibbs.gibbs import _fast_factor
        from extreme_gibbs.oracle import tv_from_values
        from extreme_gibbs.tilt import log_tilted_density

        n, a_n = 32, 16.0
        orc = get_oracle(weibull2, n, a_n)
        s = orc.tp.s
        step = 0.02
        grid = np.arange(a_n - 7 * s, a_n + 7 * s, step)
        exact = orc.joint2_grid(grid, grid)

        fp1 = _fast_factor(weibull2, n, a_n, a_n)
        log_g1 = np.log(np.maximum(fast_growth_approx(fp1, weibull2, grid), 1e-300))
        fast_prod = np.empty((len(grid), len(grid)))
        for i, y1 in enumerate(grid):
            m2 = (n * a_n - y1) / (n - 1)
            fp2 = _fast_factor(weibull2, n - 1, m2, a_n)
            fast_prod[i] = np.exp(log_g1[i] + np.log(np.maximum(fast_growth_approx(fp2, weibull2, grid), 1e-300)))

        tp = solve_tilt(weibull2, a_n)
        marg = np.exp(log_tilted_density(weibull2, tp, grid))
        common = np.outer(marg, marg)

        cell = step**2
        tv_fast = tv_from_values(exact.ravel(), fast_prod.ravel(), cell)
        tv_common = tv_from_values(exact.ravel(), common.ravel(), cell)
        assert tv_fast <= tv_common + 0.01

    def test_moderate_tv_decay_rapidly_varying_model(self, exp_exp):
        tvs = []
        for n in (8, 16, 32, 64):
            orc = get_oracle(exp_exp, n, 3.0)
            ys = orc.default_ygrid()
            tvs.append(
                tv_distance(
                    lambda y: orc.conditional_curve(y),
                    lambda y: tilted_approx(exp_exp, n, 3.0, y, tp=orc.tp),
                    grid=ys,
                ).tv
            )
        assert all(b < a for a, b in zip(tvs, tvs[1:]))


class TestFMean:
    def test_identity_is_bitwise_compatible(self, weibull2):
        ys = np.array([2.4, 3.0, 3.6])
        via_f = f_tilted_approx(weibull2, identity, 16, 3.0, ys)
        direct = tilted_approx(weibull2, 16, 3.0, ys)
        assert np.array_equal(via_f, direct)
        via_none = f_tilted_approx(weibull2, None, 16, 3.0, ys)
        assert np.array_equal(via_none, direct)

    def test_identity_fast_variant_delegates(self, weibull2):
        val = f_tilted_approx(weibull2, identity, 16, 3.0, 2.9, variant="gaussian_modulated")
        params = fast_growth_params(weibull2, 16, 3.0)
        assert val == fast_growth_approx(params, weibull2, 2.9)

    def test_square_statistic_closed_form(self, weibull2):
        # X^2 is standard exponential here, so m_f(lam) = 1/(1 - lam)
        ft = solve_f_tilt(weibull2, lambda x: x * x, 3.0)
        assert ft.lam == pytest.approx(2.0 / 3.0, abs=1e-9)
        assert math.sqrt(ft.s2) == pytest.approx(3.0, rel=1e-8)

    def test_square_statistic_concentrates_at_root(self, weibull2):
        a_n = 3.0
        ft = solve_f_tilt(weibull2, lambda x: x * x, a_n)
        s_f = math.sqrt(ft.s2)
        xs = np.arange(0.0, 12.0, 1e-3)
        vals = f_tilted_approx(weibull2, lambda x: x * x, 32, a_n, xs)
        total = np.trapezoid(vals, xs)
        lo, hi = math.sqrt(a_n) - 3 * s_f, math.sqrt(a_n) + 3 * s_f
        sel = (xs >= lo) & (xs <= hi)
        assert np.trapezoid(vals[sel], xs[sel]) / total >= 0.95

    def test_unattainable_target_rejected(self, weibull2):
        # f >= 0 makes every pushforward mean positive
        with pytest.raises(DomainError):
            solve_f_tilt(weibull2, lambda x: x * x, -1.0)

    def test_modulated_variant_is_normalized(self, weibull2):
        xs = np.arange(0.0, 12.0, 1e-3)
        vals = f_tilted_approx(
            weibull2, lambda x: x * x, 32, 3.0, xs, variant="gaussian_modulated"
        )
        assert np.trapezoid(vals, xs) == pytest.approx(1.0, abs=1e-6)


class TestDiagnostics:
    def test_concentration_summary(self, weibull2):
        center, scale = concentration_summary(weibull2, 64, 1000.0)
        assert center == 1000.0
        assert scale == solve_tilt(weibull2, 1000.0).s

    def test_concentration_summary_half_gaussian(self, half_gauss):
        center, scale = concentration_summary(half_gauss, 64, 10.0)
        assert center == 10.0
        assert scale == pytest.approx(1.0, abs=1e-6)

    def test_z_statistics_vanish_on_flat_block(self, weibull2):
        zs = z_statistics(weibull2, 64, 3.0, np.full(8, 3.0))
        assert float(np.max(zs**2)) < 1.0 / math.sqrt(64)

    def test_z_statistics_detect_imbalance(self, weibull2):
        zs = z_statistics(weibull2, 64, 3.0, np.array([4.0, 2.0]))
        assert np.any(zs != 0.0)
