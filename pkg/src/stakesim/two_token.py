"""Two-token stable-price mechanism.

Token B pays for the service; token A is staked by validators.  The
mechanism pays rewards only in B, pinned to the next round's service level
so that the B market clears exactly with a constant B price, while
validators never trade their A stake.  The A price then follows a linear
recursion driven by the B-denominated reward flow; it is feasible whenever
the initial A price is at least the discounted value of that flow.

The forward A-price recursion amplifies perturbations by 1/delta per round,
so paths are evaluated from the discounted-tail form (backward, contractive)
plus an exactly-propagated homogeneous part for any excess initial price.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .model import EquilibriumConstants, ModelParams, kappa_constants
from .schemes import PROPORTIONAL, AssumptionViolation


@dataclass(frozen=True)
class TwoTokenConstants:
    """Derived constants of the mechanism at a given B price.

    ``tight_l`` is the coefficient L with R_B * PRICE_B = S_next * L making
    the B-token no-buy-back condition hold with equality.
    """

    tight_l: float
    ser2fees_b: float
    kappa_r: float
    kappa_s: float
    delta: float
    price_b: float


def require_proportional(params: ModelParams) -> None:
    """The two-token analysis is derived for proportional sharing only."""
    if (
        params.reward_scheme.kind != PROPORTIONAL
        or params.service_scheme.kind != PROPORTIONAL
    ):
        raise AssumptionViolation(
            "two-token mechanism supports proportional reward and service schemes only"
        )


def two_token_constants(params: ModelParams, price_b: float = 1.0) -> TwoTokenConstants:
    if not price_b > 0.0:
        raise ValueError(f"price_b = {price_b} must be > 0")
    require_proportional(params)
    kappa_r, kappa_s = kappa_constants(params)
    tight_l = params.delta * kappa_s / (params.n * params.reward_share())
    return TwoTokenConstants(
        tight_l=tight_l,
        ser2fees_b=1.0 / (params.delta * kappa_s),
        kappa_r=kappa_r,
        kappa_s=kappa_s,
        delta=params.delta,
        price_b=price_b,
    )


def reward_cap_b(params: ModelParams, next_service: float, price_b: float) -> float:
    """Largest B reward (in tokens) that avoids buy backs of either token.

    R_B <= delta * S_next * kappa_S / (n * r(1/n)) / price_B: validators sell
    all rewarded B, so supply is n * R_B * r(1/n) and must not exceed the
    users' demand for next round's B holdings.
    """
    if next_service <= 0.0:
        raise ValueError(f"next_service = {next_service} must be > 0")
    consts = two_token_constants(params, price_b)
    return next_service * consts.tight_l / price_b


def mechanism_rewards(
    params: ModelParams, next_service: float, price_b: float
) -> tuple[float, float]:
    """Round rewards (R_A, R_B) under the stable-B-price mechanism.

    R_A = 0 and R_B saturates the cap, so the B market clears tightly.
    """
    return 0.0, reward_cap_b(params, next_service, price_b)


def price_a_step(
    params: ModelParams,
    prev_price_a: float,
    next_service: float,
    tight_l: float,
    a_v0: float,
) -> float:
    """One forward step of the A-price recursion.

    price_A^t = price_A^{t-1} / delta - S^{t+1} * (L / A_V0) * (n-1)/n^2.
    A negative result signals an infeasible initial price; no exception is
    raised here.
    """
    if prev_price_a < 0.0:
        raise ValueError(f"prev_price_a = {prev_price_a} must be >= 0")
    if not a_v0 > 0.0:
        raise ValueError(f"a_v0 = {a_v0} must be > 0")
    n = params.n
    drain = next_service * (tight_l / a_v0) * (n - 1) / (n * n)
    return prev_price_a / params.delta - drain


def _drain_coefficient(params: ModelParams, tight_l: float, a_v0: float) -> float:
    n = params.n
    return (tight_l / a_v0) * (n - 1) / (n * n)


def initial_price_a(
    params: ModelParams,
    service_series: Sequence[float],
    tight_l: float,
    a_v0: float,
    horizon: int | None = None,
) -> float:
    """Initial A price that keeps the price path non-negative.

    Finite horizon: sum_{t=0..horizon-1} delta^{t+1} * S^{t+1} * (L/A_V0)
    * (n-1)/n^2 (the path then decays toward zero past the horizon).
    ``horizon=None`` returns the infinite-horizon value with the service
    series extended beyond its last entry at that final level; for constant
    service this is the stationary price c / (1 - delta).
    """
    if not a_v0 > 0.0:
        raise ValueError(f"a_v0 = {a_v0} must be > 0")
    coeff = _drain_coefficient(params, tight_l, a_v0)
    delta = params.delta
    if horizon is None:
        prices = stationary_price_a_series(params, service_series, tight_l, a_v0)
        return prices[0]
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    total = 0.0
    dpow = 1.0
    for t in range(horizon):
        s_next = service_series[t + 1] if t + 1 < len(service_series) else service_series[-1]
        dpow *= delta
        total += dpow * s_next * coeff
    return total


def stationary_price_a_series(
    params: ModelParams,
    service_series: Sequence[float],
    tight_l: float,
    a_v0: float,
) -> list[float]:
    """Discounted-tail A prices for rounds 0..len(series)-2.

    price_A^t = sum_{j>=1} delta^j * S^{t+1+j} * coeff with the service
    series held at its last value beyond the end.  Computed backward, which
    is contractive and keeps the recursion residual at rounding level.
    """
    if len(service_series) < 2:
        raise ValueError("service series must cover at least rounds 0..1")
    coeff = _drain_coefficient(params, tight_l, a_v0)
    delta = params.delta
    count = len(service_series) - 1
    prices = [0.0] * count
    tail_level = service_series[-1]
    prices[count - 1] = coeff * tail_level * delta / (1.0 - delta)
    for t in range(count - 1, 0, -1):
        prices[t - 1] = delta * (prices[t] + coeff * service_series[t + 1])
    return prices


def price_a_path(
    params: ModelParams,
    service_series: Sequence[float],
    tight_l: float,
    a_v0: float,
    price_a0: float | None = None,
) -> tuple[list[float], int | None]:
    """A-price path and the first round with a negative price, if any.

    With the default initial price the path is the stationary tail solution.
    An explicit ``price_a0`` adds a homogeneous component (excess / deficit)
    that compounds by 1/delta per round; a deficit eventually drives the
    price negative and the returned index marks the first such round.
    """
    base = stationary_price_a_series(params, service_series, tight_l, a_v0)
    if price_a0 is None:
        return base, None
    excess = price_a0 - base[0]
    if excess == 0.0:
        return base, None
    prices = list(base)
    growth = 1.0 / params.delta
    term = excess
    first_negative = None
    for t in range(len(prices)):
        prices[t] = base[t] + term
        if prices[t] < 0.0 and first_negative is None:
            first_negative = t
        term *= growth
    return prices, first_negative


@dataclass(frozen=True)
class TwoTokenStrategies:
    """Per-capita strategies for one mechanism round.

    Users spend their whole B holding and re-buy; validators sell their full
    B reward share and never touch their A stake.
    """

    spend_b: float
    buy_b: float
    sell_b: float
    buy_a: float = 0.0
    sell_a: float = 0.0

    @property
    def b_market_volume(self) -> float:
        return self.sell_b


def user_holding_b(params: ModelParams, consts: TwoTokenConstants, service: float) -> float:
    """Per-user B holding consistent with constant ser2fees at price_b."""
    return service * consts.delta * consts.kappa_s / (params.m * consts.price_b)


def two_token_round_strategies(
    params: ModelParams,
    consts: TwoTokenConstants,
    holding_b: float,
    service: float,
    next_service: float,
) -> TwoTokenStrategies:
    """Strategies for one round given the user's current B holding.

    Raises if the holding is inconsistent with the constant-ser2fees path at
    this B price (the mechanism cannot clear the round at an unchanged
    price in that case).
    """
    expected = user_holding_b(params, consts, service)
    if abs(holding_b - expected) > 1e-9 * max(1.0, abs(expected)):
        raise AssumptionViolation(
            f"B holding {holding_b} inconsistent with stable price_b (expected {expected});"
            " only stable B prices are supported"
        )
    _, reward_b = mechanism_rewards(params, next_service, consts.price_b)
    buy_b = user_holding_b(params, consts, next_service)
    sell_b = reward_b * params.reward_share()
    return TwoTokenStrategies(spend_b=holding_b, buy_b=buy_b, sell_b=sell_b)


def deviation_value_bound(
    params: ModelParams,
    a_v0: float,
    price_a_series: Sequence[float],
    tau: int,
    service_series: Sequence[float],
    tight_l: float,
) -> tuple[float, float, bool]:
    """Value of dumping the whole A stake at round tau vs staying on path.

    Returns (deviation_value, equilibrium_value, ok) where deviation_value =
    delta^tau * A_V0 * price_A^tau, equilibrium_value is the truncated
    discounted per-validator reward stream minus costs, and ok reports the
    strict bound deviation_value < A_V0 * price_A^0.
    """
    if tau < 0 or tau >= len(price_a_series):
        raise ValueError(f"tau = {tau} outside the price series")
    delta = params.delta
    deviation_value = delta**tau * a_v0 * price_a_series[tau]
    share = params.reward_share()
    horizon = len(service_series) - 1
    value = 0.0
    dpow = 1.0
    for t in range(horizon):
        value += dpow * (service_series[t + 1] * tight_l * share - params.v)
        dpow *= delta
    ok = deviation_value < a_v0 * price_a_series[0]
    return deviation_value, value, ok
