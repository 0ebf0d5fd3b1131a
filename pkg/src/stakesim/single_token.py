"""Single-token equilibrium machinery.

Covers the price path for a constant per-round price factor, the holdings a
stable-price equilibrium forces on users and validators, the minimal reward
recursion that keeps the system from ever buying tokens back, its closed
form, the critical initial reward separating decaying from exploding reward
paths, and the per-round strategy profile that implements the stable-price
equilibrium.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .model import EquilibriumConstants, ModelParams
from .schemes import AssumptionViolation

PROOF_CONVENTION = "proof"
FIGURE_CONVENTION = "figure"
PRICE_CONVENTIONS = (PROOF_CONVENTION, FIGURE_CONVENTION)


class NoBuyBackViolation(ValueError):
    """Raised when a chosen next reward forces the system to buy tokens back."""


class _Explosion:
    """Marker for a reward value that left the float range."""

    __slots__ = ()

    def __repr__(self):  # pragma: no cover - cosmetic
        return "EXPLOSION"


EXPLOSION = _Explosion()

# intermediate magnitudes beyond this return EXPLOSION instead of inf
_OVERFLOW_GUARD = 1e300


def price_path(
    consts: EquilibriumConstants,
    price0: float,
    horizon: int,
    convention: str = PROOF_CONVENTION,
) -> list[float]:
    """Token price for rounds 0..horizon-1 under constant factor gamma.

    ``proof``: price_t = price0 / gamma^t, the reading under which the
    no-buy-back recursion is exact.  ``figure``: price_t = price0 * gamma^t.
    The two coincide for stable prices (gamma = 1).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if convention not in PRICE_CONVENTIONS:
        raise ValueError(f"unknown price convention {convention!r}")
    gamma = consts.gamma
    if not gamma > 0.0:
        raise ValueError(f"gamma = {gamma} must be > 0")
    if convention == PROOF_CONVENTION:
        return [price0 / gamma**t for t in range(horizon)]
    return [price0 * gamma**t for t in range(horizon)]


class Holdings(NamedTuple):
    tk_user: float
    tk_validator: float
    degenerate: bool


def equilibrium_holdings(
    params: ModelParams,
    consts: EquilibriumConstants,
    service: float,
    reward: float,
) -> Holdings:
    """Per-capita holdings forced by the stable-price equilibrium.

    tk_U = (S/m) * delta * kappa_S / price0 and
    tk_V = (R/n) * delta/(1-delta) * kappa_R.  A zero reward gives zero
    stake, which violates the strict-positivity requirement; the result is
    flagged ``degenerate`` rather than rejected.
    """
    if service <= 0.0:
        raise ValueError(f"service = {service} must be > 0")
    if reward < 0.0:
        raise ValueError(f"reward = {reward} must be >= 0")
    delta = consts.delta
    tk_user = (service / params.m) * delta * consts.kappa_s / consts.price0
    tk_validator = (reward / params.n) * (delta / (1.0 - delta)) * consts.kappa_r
    return Holdings(tk_user, tk_validator, degenerate=(tk_validator <= 0.0 or tk_user <= 0.0))


def no_buy_back_min_next_reward(
    consts: EquilibriumConstants,
    reward: float,
    next_service: float,
    t: int = 0,
    floor: float = 0.0,
) -> float:
    """Smallest next-round reward that avoids a system buy back.

    Returns max(floor, R_t * (1 + a) - b * S_{t+1} * gamma^{t+1}).  Above the
    floor, the returned value makes demand and supply match exactly.
    """
    if next_service <= 0.0:
        raise ValueError(f"next_service = {next_service} must be > 0")
    tight = reward * (1.0 + consts.a) - consts.b * next_service * consts.gamma ** (t + 1)
    return max(floor, tight)


def minimal_reward_closed_form(
    consts: EquilibriumConstants,
    r0: float,
    service_series: Sequence[float],
    t: int,
):
    """Closed form of the t-fold minimal-reward recursion (no floor).

    R_t = (1+a)^t * (R0 - b * sum_{tau=1..t} S_tau * (gamma/(1+a))^tau).
    ``service_series`` is indexed by round; entries 1..t are used.  Returns
    the EXPLOSION marker instead of an out-of-range float.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if len(service_series) <= t:
        raise ValueError(f"service series defines rounds 0..{len(service_series) - 1}, need {t}")
    one_plus_a = 1.0 + consts.a
    if t * math.log(one_plus_a) > math.log(_OVERFLOW_GUARD):
        return EXPLOSION
    ratio = consts.gamma / one_plus_a
    acc = 0.0
    for tau in range(1, t + 1):
        acc += service_series[tau] * ratio**tau
    bracket = r0 - consts.b * acc
    result = one_plus_a**t * bracket
    if abs(result) > _OVERFLOW_GUARD or not math.isfinite(result):
        return EXPLOSION
    return result


def critical_initial_reward(consts: EquilibriumConstants, service: float) -> float:
    """Fixed point R* = b * S / a of the minimal-reward recursion.

    Initial rewards above R* grow exponentially, below R* they decay to the
    floor.  Only defined for stable prices and a > 0.
    """
    if service <= 0.0:
        raise ValueError(f"service = {service} must be > 0")
    if abs(consts.gamma - 1.0) > 1e-12:
        raise AssumptionViolation("critical reward requires stable prices (gamma = 1)")
    if consts.a <= 0.0:
        raise AssumptionViolation("a = 0: zero rewards-to-stake ratio has no reward threshold")
    return consts.b * service / consts.a


@dataclass(frozen=True)
class ConstantRewards:
    reward: float


@dataclass(frozen=True)
class ExplicitRewards:
    values: tuple[float, ...]


@dataclass(frozen=True)
class MinimalRewards:
    """Tight no-buy-back rewards, clamped from below at ``floor``.

    When the recursion dips under the floor the system pays the floor and the
    recursion continues from it.
    """

    r0: float
    floor: float = 0.0


RewardPolicy = ConstantRewards | ExplicitRewards | MinimalRewards


def reward_series(
    policy: RewardPolicy,
    consts: EquilibriumConstants,
    service_series: Sequence[float],
    length: int,
) -> list[float]:
    """Total rewards for rounds 0..length-1 under ``policy``.

    Values are not bounds-checked here; the simulation engine owns explosion
    detection.
    """
    if isinstance(policy, ConstantRewards):
        if policy.reward < 0.0:
            raise ValueError("constant reward must be >= 0")
        return [policy.reward] * length
    if isinstance(policy, ExplicitRewards):
        if len(policy.values) < length:
            raise ValueError(f"explicit reward series has {len(policy.values)} values, need {length}")
        if any(r < 0.0 for r in policy.values):
            raise ValueError("explicit rewards must be >= 0")
        return list(policy.values[:length])
    if len(service_series) < length:
        raise ValueError("service series shorter than requested reward series")
    out = [policy.r0]
    for t in range(length - 1):
        nxt = no_buy_back_min_next_reward(
            consts, out[-1], service_series[t + 1], t=t, floor=policy.floor
        )
        if not math.isfinite(nxt):
            nxt = _OVERFLOW_GUARD
        out.append(nxt)
    return out


@dataclass(frozen=True)
class StrategyProfile:
    """Per-capita round strategies at the suggested equilibrium.

    ``spend`` and ``buy`` are per user, ``sell`` per validator (negative =
    buy), ``system_sell`` = m*buy - n*sell is what the system must sell to
    clear the market; it is non-negative exactly when the no-buy-back
    condition holds for the chosen next reward.
    """

    spend: float
    buy: float
    sell: float
    system_sell: float


def round_strategies_stable(
    params: ModelParams,
    consts: EquilibriumConstants,
    service: float,
    next_service: float,
    reward: float,
    next_reward: float,
) -> StrategyProfile:
    """Strategies implementing one stable-price round.

    Users spend their whole holding and re-buy next round's; each validator
    sells its holding surplus plus its reward share,
    sell = (R_t - R_{t+1}) / (n * rew2stake) + R_t * r(1/n),
    which lands it exactly on the next round's required stake.  Raises
    NoBuyBackViolation when the caller's next_reward would force the system
    to absorb tokens (system_sell < 0).
    """
    if abs(consts.gamma - 1.0) > 1e-12:
        raise AssumptionViolation("round strategies are defined for stable prices only")
    tk_user_now = equilibrium_holdings(params, consts, service, reward).tk_user
    tk_user_next = equilibrium_holdings(params, consts, next_service, reward).tk_user
    sell = (reward - next_reward) / (params.n * consts.rew2stake) + reward * params.reward_share()
    system_sell = params.m * tk_user_next - params.n * sell
    if system_sell < -1e-9:
        minimal = no_buy_back_min_next_reward(consts, reward, next_service)
        raise NoBuyBackViolation(
            f"next reward {next_reward} forces a buy back of {-system_sell} tokens"
            f" (minimal feasible next reward is {minimal})"
        )
    return StrategyProfile(
        spend=tk_user_now, buy=tk_user_next, sell=sell, system_sell=system_sell
    )
