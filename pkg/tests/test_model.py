"""Equilibrium constants and their defining identities."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stakesim.model import (
    ModelParams,
    growth_factor,
    kappa_constants,
    ratio_constants,
    stable_ratios,
)
from stakesim.schemes import (
    REWARD,
    SERVICE,
    AssumptionViolation,
    power_penalty,
    proportional,
    softcap,
)


def exact_stable(m, n, delta, g=Fraction(1)):
    """Independent high-precision oracle for proportional schemes."""
    delta = Fraction(delta)
    kr = Fraction(n - 1, n)
    ks = g * Fraction(m - 1, m)
    ser2fees = 1 / (delta * ks)
    rew2stake = (1 - delta) / (delta * kr)
    a = rew2stake * n * Fraction(1, n)
    b = rew2stake / ser2fees
    growth = 1 + rew2stake * kr
    return dict(
        kappa_r=kr, kappa_s=ks, ser2fees=ser2fees, rew2stake=rew2stake,
        a=a, b=b, growth=growth,
    )


class TestKappa:
    def test_baseline(self, baseline_params):
        assert kappa_constants(baseline_params) == (0.5, 0.5)

    def test_power_penalty_reward(self):
        params = ModelParams(m=2, n=4, delta=0.9, reward_scheme=power_penalty(2.0, REWARD))
        kappa_r, _ = kappa_constants(params)
        # (3/4) * (1 - 2/4)
        assert kappa_r == pytest.approx(0.375, abs=1e-15)

    def test_decentralization_factor_scales_kappa_s(self):
        params = ModelParams(m=2, n=2, delta=0.9, g_value=2.0)
        _, kappa_s = kappa_constants(params)
        assert kappa_s == pytest.approx(1.0, abs=1e-15)

    def test_flat_scheme_raises(self):
        params = ModelParams(m=2, n=2, delta=0.9, reward_scheme=power_penalty(2.0, REWARD))
        with pytest.raises(AssumptionViolation):
            kappa_constants(params)


class TestStableRatios:
    def test_baseline_against_exact_oracle(self, baseline_params, baseline_consts):
        oracle = exact_stable(2, 2, Fraction(9, 10))
        assert baseline_consts.ser2fees == pytest.approx(float(oracle["ser2fees"]), rel=1e-14)
        assert baseline_consts.rew2stake == pytest.approx(float(oracle["rew2stake"]), rel=1e-14)
        assert baseline_consts.a == pytest.approx(float(oracle["a"]), rel=1e-14)
        assert baseline_consts.b == pytest.approx(0.1, rel=1e-14)
        assert baseline_consts.growth == pytest.approx(float(oracle["growth"]), rel=1e-14)

    def test_delta_08_variant(self):
        params = ModelParams(m=2, n=2, delta=0.8)
        consts = stable_ratios(params)
        assert consts.rew2stake == pytest.approx(0.5, rel=1e-14)
        assert consts.a == pytest.approx(0.5, rel=1e-14)
        assert consts.b == pytest.approx(0.2, rel=1e-14)

    def test_rew2stake_vanishes_as_delta_to_one(self):
        params = ModelParams(m=2, n=2, delta=1.0 - 1e-9)
        assert stable_ratios(params).rew2stake == pytest.approx(0.0, abs=3e-9)

    def test_stable_price_identities(self, baseline_consts):
        c = baseline_consts
        assert abs(c.delta * c.growth - 1.0) <= 1e-12
        assert abs(c.delta * c.ser2fees * c.kappa_s - 1.0) <= 1e-12
        assert c.gamma == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=150, deadline=None)
    @given(
        m=st.integers(2, 12),
        n=st.integers(2, 12),
        delta=st.floats(0.05, 0.99),
        g=st.floats(0.2, 5.0),
    )
    def test_identities_hold_for_random_economies(self, m, n, delta, g):
        params = ModelParams(m=m, n=n, delta=delta, g_value=g)
        c = stable_ratios(params)
        assert abs(c.delta * c.growth - 1.0) <= 1e-12
        assert abs(c.delta * c.ser2fees * c.kappa_s - 1.0) <= 1e-12

    def test_price0_scales_b_only(self, baseline_params):
        c1 = stable_ratios(baseline_params, price0=1.0)
        c2 = stable_ratios(baseline_params, price0=2.0)
        assert c2.b == pytest.approx(c1.b / 2.0, rel=1e-14)
        assert c2.ser2fees == c1.ser2fees


class TestGrowthFactor:
    def test_no_rewards_no_growth(self, baseline_params):
        assert growth_factor(baseline_params, 0.0) == 1.0

    def test_baseline_stable(self, baseline_params, baseline_consts):
        got = growth_factor(baseline_params, baseline_consts.rew2stake)
        assert got == pytest.approx(1.0 / 0.9, rel=1e-12)

    def test_delta_08(self):
        params = ModelParams(m=2, n=2, delta=0.8)
        consts = stable_ratios(params)
        assert growth_factor(params, consts.rew2stake) == pytest.approx(1.25, rel=1e-12)

    @settings(max_examples=80, deadline=None)
    @given(n=st.integers(2, 10), rew2stake=st.floats(0.0, 4.0))
    def test_proportional_reduces_to_simple_inflation_form(self, n, rew2stake):
        # with a proportional scheme the factor is 1 + rew2stake * (n-1)/n
        params = ModelParams(m=3, n=n, delta=0.9)
        got = growth_factor(params, rew2stake)
        assert got == pytest.approx(1.0 + rew2stake * (n - 1) / n, rel=1e-12)


class TestRatioConstants:
    def test_gamma_below_delta_rejected(self, baseline_params):
        with pytest.raises(AssumptionViolation):
            ratio_constants(baseline_params, gamma=0.5)

    def test_target_gamma_is_met(self):
        params = ModelParams(m=2, n=2, delta=0.8)
        consts = ratio_constants(params, gamma=0.9)
        assert consts.gamma == pytest.approx(0.9, abs=1e-12)
        assert consts.rew2stake == pytest.approx(0.25, rel=1e-12)

    def test_softcap_economy(self):
        params = ModelParams(
            m=3,
            n=4,
            delta=0.9,
            reward_scheme=softcap(2.0, REWARD),
            service_scheme=proportional(SERVICE),
        )
        consts = stable_ratios(params)
        # kappa_R = (3/4) * (1 - 2/8)
        assert consts.kappa_r == pytest.approx(0.5625, rel=1e-12)
        assert abs(consts.delta * consts.growth - 1.0) <= 1e-12
