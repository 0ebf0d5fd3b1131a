"""Two-token mechanism: reward cap, A-price path, strategies, deviation bound."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stakesim.model import ModelParams
from stakesim.schemes import REWARD, AssumptionViolation, power_penalty
from stakesim.two_token import (
    deviation_value_bound,
    initial_price_a,
    mechanism_rewards,
    price_a_path,
    price_a_step,
    reward_cap_b,
    stationary_price_a_series,
    two_token_constants,
    two_token_round_strategies,
    user_holding_b,
)


@pytest.fixture
def params2(baseline_params):
    return baseline_params


BASELINE_L = 0.45  # delta * kappa_S / (n * r(1/n)) = 0.9 * 0.5 / 1


class TestRewardCap:
    def test_baseline(self, params2):
        cap = reward_cap_b(params2, 10.0, 1.0)
        assert cap == pytest.approx(4.5, rel=1e-12)
        # oracle: demand m*b_B equals supply n*s_B at the cap
        consts = two_token_constants(params2, 1.0)
        demand = 2 * user_holding_b(params2, consts, 10.0)
        supply = 2 * cap * params2.reward_share()
        assert demand == pytest.approx(supply, rel=1e-12)

    def test_monetary_cap_fixed_token_count_halves(self, params2):
        assert reward_cap_b(params2, 10.0, 2.0) == pytest.approx(2.25, rel=1e-12)

    def test_proportional_cap_independent_of_n(self):
        params = ModelParams(m=2, n=4, delta=0.9)
        assert reward_cap_b(params, 10.0, 1.0) == pytest.approx(4.5, rel=1e-12)

    def test_non_proportional_rejected(self):
        params = ModelParams(m=2, n=4, delta=0.9, reward_scheme=power_penalty(2.0, REWARD))
        with pytest.raises(AssumptionViolation):
            reward_cap_b(params, 10.0, 1.0)


class TestMechanismRewards:
    def test_baseline(self, params2):
        assert mechanism_rewards(params2, 10.0, 1.0) == (
            0.0,
            pytest.approx(4.5, rel=1e-12),
        )

    def test_linear_in_service(self, params2):
        _, r_small = mechanism_rewards(params2, 1e-9, 1.0)
        assert r_small == pytest.approx(4.5e-10, rel=1e-12)
        _, r_big = mechanism_rewards(params2, 20.0, 1.0)
        assert r_big == pytest.approx(9.0, rel=1e-12)


class TestPriceAStep:
    def test_stationary_point(self, params2):
        # p = c/(1-delta) with c = delta * S * L * (n-1)/n^2 / a_V0
        c = 0.9 * 10.0 * BASELINE_L * 0.25 / 10.0
        p_star = c / 0.1
        assert p_star == pytest.approx(1.0125, rel=1e-12)
        stepped = price_a_step(params2, p_star, 10.0, BASELINE_L, 10.0)
        assert stepped == pytest.approx(p_star, rel=1e-12)

    def test_forward_step_formula(self, params2):
        assert price_a_step(params2, 2.0, 10.0, BASELINE_L, 10.0) == pytest.approx(
            2.0 / 0.9 - 0.1125, rel=1e-12
        )

    def test_low_price_goes_negative(self, params2):
        got = price_a_step(params2, 0.05, 10.0, BASELINE_L, 10.0)
        assert got == pytest.approx(0.05 / 0.9 - 0.1125, rel=1e-12)
        assert got < 0.0


class TestInitialPriceA:
    def test_infinite_horizon_constant_service(self, params2):
        got = initial_price_a(params2, [10.0] * 50, BASELINE_L, 10.0, horizon=None)
        assert got == pytest.approx(1.0125, rel=1e-12)

    def test_single_round(self, params2):
        got = initial_price_a(params2, [10.0, 10.0], BASELINE_L, 10.0, horizon=1)
        assert got == pytest.approx(0.10125, rel=1e-12)

    def test_zero_service_needs_no_value(self, params2):
        got = initial_price_a(params2, [1e-300, 1e-300], BASELINE_L, 10.0, horizon=1)
        assert got == pytest.approx(0.0, abs=1e-290)

    def test_finite_horizon_approaches_limit(self, params2):
        series = [10.0] * 1001
        finite = initial_price_a(params2, series, BASELINE_L, 10.0, horizon=1000)
        assert finite == pytest.approx(1.0125, rel=1e-10)
        assert finite < 1.0125


class TestPriceAPath:
    def test_stationary_for_500_rounds(self, params2):
        series = [10.0] * 501
        prices, bad = price_a_path(params2, series, BASELINE_L, 10.0, None)
        assert bad is None
        assert max(abs(p - 1.0125) for p in prices) <= 1e-9

    def test_recursion_residual_is_tiny(self, params2):
        series = [10.0 if t < 50 else 6.0 for t in range(201)]
        prices, bad = price_a_path(params2, series, BASELINE_L, 10.0, None)
        assert bad is None
        coeff = (BASELINE_L / 10.0) * 0.25
        worst = max(
            abs(prices[t - 1] - 0.9 * (prices[t] + coeff * series[t + 1]))
            for t in range(1, len(prices))
        )
        assert worst <= 1e-12

    def test_deficit_initial_price_goes_negative_at_round_one(self, params2):
        series = [10.0] * 51
        prices, bad = price_a_path(params2, series, BASELINE_L, 10.0, 0.05)
        assert bad == 1
        assert prices[0] == pytest.approx(0.05, rel=1e-12)
        assert prices[1] < 0.0

    def test_excess_initial_price_grows_but_stays_feasible(self, params2):
        series = [10.0] * 101
        prices, bad = price_a_path(params2, series, BASELINE_L, 10.0, 2.0)
        assert bad is None
        assert prices[1] == pytest.approx(2.0 / 0.9 - 0.1125, rel=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(
        a_v0=st.floats(1.0, 50.0),
        service=st.floats(1.0, 30.0),
        excess=st.floats(0.0, 2.0),
    )
    def test_growth_bound(self, a_v0, service, excess):
        # price_A^t < price_A^0 / delta^t on any feasible path
        params = ModelParams(m=2, n=2, delta=0.9, v=1.0)
        consts = two_token_constants(params, 1.0)
        series = [service] * 101
        p0 = initial_price_a(params, series, consts.tight_l, a_v0, None) + excess
        prices, bad = price_a_path(params, series, consts.tight_l, a_v0, p0)
        assert bad is None
        for t in range(1, len(prices)):
            assert prices[t] < prices[0] / params.delta**t + 1e-12


class TestStrategies:
    def test_steady_state(self, params2):
        consts = two_token_constants(params2, 1.0)
        holding = user_holding_b(params2, consts, 10.0)
        prof = two_token_round_strategies(params2, consts, holding, 10.0, 10.0)
        assert prof.buy_b == pytest.approx(2.25, rel=1e-12)
        assert prof.sell_b == pytest.approx(2.25, rel=1e-12)
        assert prof.buy_a == 0.0 and prof.sell_a == 0.0
        assert 2 * prof.buy_b == pytest.approx(2 * prof.sell_b, abs=1e-9)

    def test_service_jump_scales_both_sides(self, params2):
        consts = two_token_constants(params2, 1.0)
        holding = user_holding_b(params2, consts, 10.0)
        prof = two_token_round_strategies(params2, consts, holding, 10.0, 20.0)
        assert prof.buy_b == pytest.approx(4.5, rel=1e-12)
        assert prof.sell_b == pytest.approx(4.5, rel=1e-12)
        assert 2 * prof.buy_b == pytest.approx(9.0, rel=1e-12)

    def test_wider_economy(self):
        # m=4, n=2: per-user buy = S * delta * kappa_S / m with kappa_S = 3/4
        params = ModelParams(m=4, n=2, delta=0.9)
        consts = two_token_constants(params, 1.0)
        holding = user_holding_b(params, consts, 10.0)
        prof = two_token_round_strategies(params, consts, holding, 10.0, 10.0)
        assert prof.buy_b == pytest.approx(10.0 * 0.9 * 0.75 / 4.0, rel=1e-12)
        # market clears: m * b_B = n * s_B
        assert 4 * prof.buy_b == pytest.approx(2 * prof.sell_b, rel=1e-12)

    def test_inconsistent_holding_rejected(self, params2):
        consts = two_token_constants(params2, 1.0)
        with pytest.raises(AssumptionViolation):
            two_token_round_strategies(params2, consts, 3.0, 10.0, 10.0)

    @settings(max_examples=50, deadline=None)
    @given(
        m=st.integers(2, 8),
        n=st.integers(2, 8),
        delta=st.floats(0.5, 0.95),
        service=st.floats(0.5, 40.0),
        next_service=st.floats(0.5, 40.0),
        price_b=st.floats(0.25, 4.0),
    )
    def test_b_market_always_clears(self, m, n, delta, service, next_service, price_b):
        params = ModelParams(m=m, n=n, delta=delta)
        consts = two_token_constants(params, price_b)
        holding = user_holding_b(params, consts, service)
        prof = two_token_round_strategies(params, consts, holding, service, next_service)
        assert m * prof.buy_b - n * prof.sell_b == pytest.approx(0.0, abs=1e-9)


class TestDeviationValueBound:
    def test_sell_all_at_zero(self, params2):
        series = [10.0] * 401
        prices = stationary_price_a_series(params2, series, BASELINE_L, 10.0)
        dev, _, ok = deviation_value_bound(params2, 10.0, prices, 0, series, BASELINE_L)
        assert dev == pytest.approx(10.0 * 1.0125, rel=1e-9)
        assert not ok  # at tau = 0 the strict bound holds with equality

    def test_equilibrium_value_geometric_sum(self, params2):
        series = [10.0] * 401
        prices = stationary_price_a_series(params2, series, BASELINE_L, 10.0)
        _, value, _ = deviation_value_bound(params2, 10.0, prices, 0, series, BASELINE_L)
        # per-round monetary reward 2.25 minus cost 1, discounted
        assert value == pytest.approx(1.25 / 0.1, rel=1e-9)

    def test_late_deviation_worthless(self, params2):
        series = [10.0] * 401
        prices = stationary_price_a_series(params2, series, BASELINE_L, 10.0)
        dev, _, ok = deviation_value_bound(params2, 10.0, prices, 350, series, BASELINE_L)
        assert dev < 1e-12
        assert ok
