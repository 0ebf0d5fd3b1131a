"""Economy parameters and the constants of price-stable equilibria.

An economy is m users and n validators trading one (or two) tokens round by
round at discount factor delta.  On any equilibrium path whose price moves by
a constant factor gamma per round, two ratios are pinned down:

* ser2fees   = S / (m * TK_U * PRICE)   service level over fee value
* rew2stake  = R / (n * TK_V)           total rewards over staked tokens

together with the derived coefficients used by the no-buy-back reward
recursion (a, b) and the per-round price growth factor.  ``stable_ratios``
is the gamma = 1 case.
"""

from __future__ import annotations

from dataclasses import dataclass

from .schemes import (
    REWARD,
    SERVICE,
    AssumptionViolation,
    SchemeSpec,
    proportional,
    validate_assumptions,
)


@dataclass(frozen=True)
class ModelParams:
    """Primitive economy parameters.

    ``g_value`` is the decentralization factor applied to users' service
    value, supplied as a scalar (it only ever enters formulas as a number).
    """

    m: int
    n: int
    delta: float
    v: float = 0.0
    g_value: float = 1.0
    reward_scheme: SchemeSpec = proportional(REWARD)
    service_scheme: SchemeSpec = proportional(SERVICE)

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"m = {self.m} must be >= 2")
        if self.n < 2:
            raise ValueError(f"n = {self.n} must be >= 2")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta = {self.delta} must be in (0, 1)")
        if self.v < 0.0:
            raise ValueError(f"v = {self.v} must be >= 0")
        if not self.g_value > 0.0:
            raise ValueError(f"g = {self.g_value} must be > 0")
        if self.reward_scheme.role != REWARD:
            raise ValueError("reward_scheme must have role 'reward'")
        if self.service_scheme.role != SERVICE:
            raise ValueError("service_scheme must have role 'service'")

    def reward_share(self) -> float:
        """Per-validator share r(1/n) at the symmetric point."""
        return self.reward_scheme.value(1.0 / self.n, self.n)

    def service_share(self) -> float:
        """Per-user share s(1/m) at the symmetric point."""
        return self.service_scheme.value(1.0 / self.m, self.m)


def validate_params(params: ModelParams) -> list[str]:
    """Collect scheme admissibility failures for both schemes (empty = ok)."""
    errors = []
    for scheme, k, label in (
        (params.reward_scheme, params.n, "reward_scheme"),
        (params.service_scheme, params.m, "service_scheme"),
    ):
        report = validate_assumptions(scheme, k)
        for check in report.failures():
            errors.append(f"{label}: {check.name} failed ({check.detail})")
    return errors


def kappa_constants(params: ModelParams) -> tuple[float, float]:
    """Return (kappa_R, kappa_S).

    kappa_R = (n-1)/n * r'(1/n) and kappa_S = g * (m-1)/m * s'(1/m); the
    service derivative is taken at the users' symmetric point 1/m.  Raises
    if either derivative makes its constant non-positive.
    """
    n, m = params.n, params.m
    kappa_r = (n - 1) / n * params.reward_scheme.derivative(1.0 / n, n)
    kappa_s = params.g_value * (m - 1) / m * params.service_scheme.derivative(1.0 / m, m)
    if kappa_r <= 0.0:
        raise AssumptionViolation(f"kappa_R = {kappa_r} <= 0: reward scheme slope too small")
    if kappa_s <= 0.0:
        raise AssumptionViolation(f"kappa_S = {kappa_s} <= 0: service scheme slope too small")
    return kappa_r, kappa_s


@dataclass(frozen=True)
class EquilibriumConstants:
    """Constants of a generic symmetric equilibrium with price factor gamma.

    ``growth`` is the per-round demand growth factor 1 + rew2stake * kappa_r
    and ``gamma`` = delta * growth is the price factor (1 for stable prices).
    ``delta`` and ``price0`` are carried along because every downstream
    holding and reward formula needs them.
    """

    kappa_r: float
    kappa_s: float
    ser2fees: float
    rew2stake: float
    a: float
    b: float
    growth: float
    gamma: float
    delta: float
    price0: float


def ratio_constants(
    params: ModelParams, gamma: float = 1.0, price0: float = 1.0
) -> EquilibriumConstants:
    """Equilibrium constants for a target per-round price factor gamma.

    gamma = 1 keeps prices constant; gamma > 1 has prices falling by 1/gamma
    per round and vice versa.  Requires gamma >= delta (otherwise the implied
    rewards-to-stake ratio is negative).
    """
    if not price0 > 0.0:
        raise ValueError(f"price0 = {price0} must be > 0")
    if gamma < params.delta:
        raise AssumptionViolation(
            f"gamma = {gamma} below delta = {params.delta}: rewards-to-stake would be negative"
        )
    kappa_r, kappa_s = kappa_constants(params)
    ser2fees = gamma / (params.delta * kappa_s)
    rew2stake = (gamma - params.delta) / (params.delta * kappa_r)
    a = rew2stake * params.n * params.reward_share()
    b = rew2stake / (ser2fees * price0)
    growth = 1.0 + rew2stake * kappa_r
    return EquilibriumConstants(
        kappa_r=kappa_r,
        kappa_s=kappa_s,
        ser2fees=ser2fees,
        rew2stake=rew2stake,
        a=a,
        b=b,
        growth=growth,
        gamma=params.delta * growth,
        delta=params.delta,
        price0=price0,
    )


def stable_ratios(params: ModelParams, price0: float = 1.0) -> EquilibriumConstants:
    """Constants of the stable-price equilibrium: ser2fees = 1/(delta*kappa_S),
    rew2stake = (1-delta)/(delta*kappa_R), with delta * growth = 1."""
    return ratio_constants(params, gamma=1.0, price0=price0)


def growth_factor(params: ModelParams, rew2stake: float) -> float:
    """Per-round demand growth 1 + rew2stake * kappa_R."""
    if rew2stake < 0.0:
        raise ValueError(f"rew2stake = {rew2stake} must be >= 0")
    kappa_r, _ = kappa_constants(params)
    return 1.0 + rew2stake * kappa_r
