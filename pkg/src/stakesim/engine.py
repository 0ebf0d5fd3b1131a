"""Round-by-round simulation engine with ledger-exact accounting and audits.

Each round has two subrounds: pay & stake (validators earn their reward
share, users pay fees and receive their service share), then buy or sell
(players trade with the market at the round's price, the system selling the
net difference).  The engine records every flow so that independent audits
can re-check the books:

* ``audit_no_buy_back``        the system never absorbs tokens
* ``audit_price_identity``     recorded prices satisfy the equilibrium
                               recursions and the price/service identity
* ``conservation_audit``       holdings evolve exactly as minted + traded -
                               fees, per token type
* ``one_shot_deviation_gain``  a single-round unilateral deviation never
                               gains, holding prices at their path values

Scenario runs are deterministic: the same config yields a bit-identical
trace.  They terminate early with status ``exploded`` when any token
quantity passes 1e12, or ``infeasible`` on a negative price or violated
trading constraint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .config import ScenarioConfig
from .model import EquilibriumConstants, ModelParams, ratio_constants
from .single_token import StrategyProfile, price_path, reward_series
from .two_token import (
    TwoTokenConstants,
    mechanism_rewards,
    price_a_path,
    stationary_price_a_series,
    two_token_constants,
    user_holding_b,
)

EXPLOSION_THRESHOLD = 1e12

COMPLETED = "completed"
EXPLODED = "exploded"
INFEASIBLE = "infeasible"

USER = "user"
VALIDATOR = "validator"

SINGLE_TOKEN = "single_token"
TWO_TOKEN = "two_token"


class ConstraintViolation(ValueError):
    """A strategy broke a trading constraint; the message names it."""


@dataclass(frozen=True)
class SingleTokenState:
    t: int
    tk_user: float
    tk_validator: float
    price: float
    service: float
    reward: float


@dataclass(frozen=True)
class SingleTokenRound:
    """Ledger snapshot of one single-token round.

    Holdings are per capita at the start of the round; flows are per capita
    within it.  ``minted`` is the aggregate actually distributed,
    n * R * r(1/n), and ``fees_paid`` the aggregate m * spent returned to
    the system.
    """

    t: int
    service: float
    reward: float
    price: float
    tk_user: float
    tk_validator: float
    spent: float
    bought: float
    sold: float
    system_net_sold: float
    minted: float
    fees_paid: float
    user_utility: float
    validator_utility: float


@dataclass(frozen=True)
class TwoTokenRound:
    """Ledger snapshot of one two-token round.

    Users hold only token B between rounds, validators only token A; the
    round's B rewards are sold in full within the round.
    """

    t: int
    service: float
    reward_a: float
    reward_b: float
    price_a: float
    price_b: float
    holding_b_user: float
    holding_a_validator: float
    spent: float
    bought_b: float
    bought_a: float
    sold_b: float
    sold_a: float
    net_sold_a: float
    net_sold_b: float
    minted_a: float
    minted_b: float
    fees_paid_b: float
    user_utility: float
    validator_utility: float


@dataclass(frozen=True)
class Trace:
    """An ordered run of round records plus the terminal status."""

    mode: str
    m: int
    n: int
    rounds: tuple
    status: str
    status_round: int | None = None
    reason: str | None = None

    def __len__(self):
        return len(self.rounds)


def run_round(
    params: ModelParams,
    state: SingleTokenState,
    strategies: StrategyProfile,
    next_service: float,
    next_reward: float,
    next_price: float,
) -> tuple[SingleTokenState, SingleTokenRound]:
    """Apply one single-token round at the symmetric point.

    Each validator receives R * r(1/n), each user S * s(1/m); holdings then
    update by the trades.  Raises ConstraintViolation when a strategy breaks
    a selling constraint (tolerance 1e-9 on the holding scale).
    """
    reward_each = state.reward * params.reward_share()
    service_each = state.service * params.service_share()
    tol = 1e-9 * max(1.0, state.tk_validator, state.tk_user)
    if strategies.sell > state.tk_validator + reward_each + tol:
        raise ConstraintViolation(
            f"round {state.t}: validator sells {strategies.sell} with only "
            f"{state.tk_validator + reward_each} available"
        )
    if strategies.spend < 0.0 or strategies.spend > state.tk_user + tol:
        raise ConstraintViolation(
            f"round {state.t}: user spends {strategies.spend} with holding {state.tk_user}"
        )
    if -strategies.buy > state.tk_user - strategies.spend + tol:
        raise ConstraintViolation(
            f"round {state.t}: user sells {-strategies.buy} beyond its unspent holding"
        )
    record = SingleTokenRound(
        t=state.t,
        service=state.service,
        reward=state.reward,
        price=state.price,
        tk_user=state.tk_user,
        tk_validator=state.tk_validator,
        spent=strategies.spend,
        bought=strategies.buy,
        sold=strategies.sell,
        system_net_sold=params.m * strategies.buy - params.n * strategies.sell,
        minted=params.n * reward_each,
        fees_paid=params.m * strategies.spend,
        user_utility=service_each * params.g_value - strategies.buy * state.price,
        validator_utility=strategies.sell * state.price - params.v,
    )
    next_state = SingleTokenState(
        t=state.t + 1,
        tk_user=state.tk_user - strategies.spend + strategies.buy,
        tk_validator=state.tk_validator + reward_each - strategies.sell,
        price=next_price,
        service=next_service,
        reward=next_reward,
    )
    return next_state, record


def run_scenario(config: ScenarioConfig) -> Trace:
    """Drive the configured strategy generator over the full horizon."""
    params = config.model_params()
    if config.mode == SINGLE_TOKEN:
        return _run_single_token(config, params)
    return _run_two_token(config, params)


def _run_single_token(config: ScenarioConfig, params: ModelParams) -> Trace:
    horizon = config.horizon
    consts = ratio_constants(params, gamma=config.gamma, price0=config.price0)
    service = config.service_values(horizon + 1)
    rewards = reward_series(config.reward_policy(), consts, service, horizon + 1)
    prices = price_path(consts, config.price0, horizon + 1, config.price_convention)

    if consts.rew2stake > 0.0:
        stake_unit = 1.0 / (params.n * consts.rew2stake)
    elif any(r != 0.0 for r in rewards):
        return Trace(
            SINGLE_TOKEN, params.m, params.n, (), INFEASIBLE, 0,
            "positive rewards with a zero rewards-to-stake ratio",
        )
    else:
        stake_unit = 0.0

    hold_user = [
        service[t] * consts.delta * consts.kappa_s / (params.m * consts.gamma * prices[t])
        for t in range(horizon + 1)
    ]
    hold_validator = [rewards[t] * stake_unit for t in range(horizon + 1)]

    rounds = []
    for t in range(horizon):
        entering = (rewards[t], hold_user[t], hold_validator[t])
        if any(not math.isfinite(q) or abs(q) > EXPLOSION_THRESHOLD for q in entering):
            return Trace(
                SINGLE_TOKEN, params.m, params.n, tuple(rounds), EXPLODED, t,
                "token quantity exceeded 1e12",
            )
        state = SingleTokenState(
            t=t,
            tk_user=hold_user[t],
            tk_validator=hold_validator[t],
            price=prices[t],
            service=service[t],
            reward=rewards[t],
        )
        sell = hold_validator[t] + rewards[t] * params.reward_share() - hold_validator[t + 1]
        strategies = StrategyProfile(
            spend=hold_user[t],
            buy=hold_user[t + 1],
            sell=sell,
            system_sell=params.m * hold_user[t + 1] - params.n * sell,
        )
        try:
            _, record = run_round(
                params, state, strategies, service[t + 1], rewards[t + 1], prices[t + 1]
            )
        except ConstraintViolation as exc:
            return Trace(
                SINGLE_TOKEN, params.m, params.n, tuple(rounds), INFEASIBLE, t, str(exc)
            )
        rounds.append(record)
    return Trace(SINGLE_TOKEN, params.m, params.n, tuple(rounds), COMPLETED)


def _run_two_token(config: ScenarioConfig, params: ModelParams) -> Trace:
    horizon = config.horizon
    price_b = config.price_b0
    consts = two_token_constants(params, price_b)
    service = config.service_values(horizon + 1)
    a_v0 = config.a_v0
    prices_a, first_negative = price_a_path(
        params, service, consts.tight_l, a_v0, config.price_a0
    )

    rounds = []
    for t in range(horizon):
        if first_negative is not None and t >= first_negative:
            base = stationary_price_a_series(params, service, consts.tight_l, a_v0)
            slack = min(b * params.delta**i for i, b in enumerate(base))
            return Trace(
                TWO_TOKEN, params.m, params.n, tuple(rounds), INFEASIBLE, first_negative,
                f"price_A turns negative at round {first_negative}; the minimum"
                f" feasible initial price_A for this horizon is {base[0] - slack!r}"
                f" (stationary value {base[0]!r})",
            )
        reward_a, reward_b = mechanism_rewards(params, service[t + 1], price_b)
        holding_b = user_holding_b(params, consts, service[t])
        buy_b = user_holding_b(params, consts, service[t + 1])
        sell_b = reward_b * params.reward_share()
        quantities = (holding_b, buy_b, sell_b, reward_b, a_v0)
        if any(not math.isfinite(q) or abs(q) > EXPLOSION_THRESHOLD for q in quantities):
            return Trace(
                TWO_TOKEN, params.m, params.n, tuple(rounds), EXPLODED, t,
                "token quantity exceeded 1e12",
            )
        service_each = service[t] * params.service_share()
        record = TwoTokenRound(
            t=t,
            service=service[t],
            reward_a=reward_a,
            reward_b=reward_b,
            price_a=prices_a[t],
            price_b=price_b,
            holding_b_user=holding_b,
            holding_a_validator=a_v0,
            spent=holding_b,
            bought_b=buy_b,
            bought_a=0.0,
            sold_b=sell_b,
            sold_a=0.0,
            net_sold_a=0.0,
            net_sold_b=params.m * buy_b - params.n * sell_b,
            minted_a=params.n * reward_a * params.reward_share(),
            minted_b=params.n * sell_b,
            fees_paid_b=params.m * holding_b,
            user_utility=service_each * params.g_value - buy_b * price_b,
            validator_utility=sell_b * price_b - params.v,
        )
        rounds.append(record)
    return Trace(TWO_TOKEN, params.m, params.n, tuple(rounds), COMPLETED)


@dataclass(frozen=True)
class AuditCheck:
    name: str
    max_residual: float
    tolerance: float
    first_failing_round: int | None
    passed: bool


@dataclass(frozen=True)
class AuditReport:
    checks: tuple[AuditCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _collect(name, tolerance, residuals) -> AuditCheck:
    worst = 0.0
    first_bad = None
    for t, r in residuals:
        r = abs(r)
        if r > worst:
            worst = r
        if r > tolerance and first_bad is None:
            first_bad = t
    return AuditCheck(name, worst, tolerance, first_bad, first_bad is None)


def audit_no_buy_back(trace: Trace, tolerance: float = 1e-9) -> AuditReport:
    """The system never buys tokens back: every net sold amount >= -tol.

    Residuals are taken relative to the round's market volume (floored at
    one token), so a tight policy whose volumes grow large is not failed on
    rounding noise; at unit volumes the tolerance is 1e-9 tokens.
    """
    m, n = trace.m, trace.n
    if trace.mode == SINGLE_TOKEN:
        fields = (("system_net_sold", "bought", "sold", "tk_validator", "no_buy_back"),)
    else:
        fields = (
            ("net_sold_a", "bought_a", "sold_a", "holding_a_validator", "no_buy_back_token_a"),
            ("net_sold_b", "bought_b", "sold_b", "holding_a_validator", "no_buy_back_token_b"),
        )
    checks = []
    for attr, buy_attr, sell_attr, book_attr, name in fields:
        residuals = []
        for rec in trace.rounds:
            scale = max(
                1.0,
                abs(m * getattr(rec, buy_attr)),
                abs(n * getattr(rec, sell_attr)),
                abs(n * getattr(rec, book_attr)),
            )
            residuals.append((rec.t, min(0.0, getattr(rec, attr)) / scale))
        checks.append(_collect(name, tolerance, residuals))
    return AuditReport(tuple(checks))


def audit_price_identity(
    trace: Trace,
    params: ModelParams,
    consts: EquilibriumConstants | TwoTokenConstants,
    tolerance: float = 1e-9,
) -> AuditReport:
    """Recorded prices must satisfy the equilibrium price recursions.

    Single token: price^{t-1} = delta * growth^t * price^t with the growth
    factor recomputed from the recorded rewards and stakes, plus the
    identity price^t * growth^t = marginal service value (both relative,
    tolerance 1e-9).  Two tokens: the A-price recursion (absolute, 1e-12 on
    unit-scale prices), the B-price/service condition (relative, 1e-9) and
    constancy of the B price.
    """
    if len(trace.rounds) < 2:
        raise ValueError("price identity audit needs at least two rounds")
    delta = params.delta
    if trace.mode == SINGLE_TOKEN:
        rec_resid = []
        id_resid = []
        for i, rec in enumerate(trace.rounds):
            growth_t = 1.0 + rec.reward / (params.n * rec.tk_validator) * consts.kappa_r
            svalue = rec.service * consts.kappa_s / (params.m * rec.tk_user)
            id_resid.append(
                (rec.t, (rec.price * growth_t - svalue) / max(abs(svalue), 1e-300))
            )
            if i >= 1:
                prev = trace.rounds[i - 1]
                rec_resid.append(
                    (
                        rec.t,
                        (prev.price - delta * growth_t * rec.price)
                        / max(abs(prev.price), 1e-300),
                    )
                )
        return AuditReport(
            (
                _collect("price_recursion", tolerance, rec_resid),
                _collect("price_service_identity", tolerance, id_resid),
            )
        )

    a_resid = []
    b_resid = []
    const_resid = []
    price_b0 = trace.rounds[0].price_b
    for i, rec in enumerate(trace.rounds):
        svalue = rec.service * consts.kappa_s / (params.m * rec.holding_b_user)
        b_resid.append(
            (rec.t, (delta * svalue - rec.price_b) / max(abs(rec.price_b), 1e-300))
        )
        const_resid.append((rec.t, rec.price_b - price_b0))
        if i >= 1:
            prev = trace.rounds[i - 1]
            stake = params.n * rec.holding_a_validator
            inflation_a = rec.reward_a / stake * (params.n - 1) / params.n
            inflation_b = rec.reward_b / stake * (params.n - 1) / params.n
            a_resid.append(
                (
                    rec.t,
                    prev.price_a
                    - delta * rec.price_a * (1.0 + inflation_a)
                    - delta * rec.price_b * inflation_b,
                )
            )
    return AuditReport(
        (
            _collect("price_a_recursion", 1e-12, a_resid),
            _collect("price_b_service_identity", tolerance, b_resid),
            _collect("price_b_constant", 1e-12, const_resid),
        )
    )


def conservation_audit(trace: Trace, tolerance: float = 1e-9) -> AuditReport:
    """Cross-round bookkeeping closure, per token type.

    Between consecutive rounds, aggregate player holdings must change by
    exactly minted + system net sold - fees returned to the system.
    Residuals are relative to the aggregate holdings scale.  A failure at
    round t means round t's opening books do not follow from round t-1's
    flows.
    """
    m, n = trace.m, trace.n
    checks = []
    if trace.mode == SINGLE_TOKEN:
        residuals = []
        for prev, cur in zip(trace.rounds, trace.rounds[1:]):
            start = m * prev.tk_user + n * prev.tk_validator
            end = m * cur.tk_user + n * cur.tk_validator
            flow = prev.minted + prev.system_net_sold - prev.fees_paid
            residuals.append((cur.t, (end - start - flow) / max(1.0, abs(start))))
        checks.append(_collect("conservation", tolerance, residuals))
    else:
        resid_a = []
        resid_b = []
        for prev, cur in zip(trace.rounds, trace.rounds[1:]):
            flow_a = prev.minted_a + prev.net_sold_a
            resid_a.append(
                (cur.t, n * (cur.holding_a_validator - prev.holding_a_validator) - flow_a)
            )
            start_b = m * prev.holding_b_user
            flow_b = prev.minted_b + prev.net_sold_b - prev.fees_paid_b
            resid_b.append(
                (
                    cur.t,
                    (m * cur.holding_b_user - start_b - flow_b) / max(1.0, abs(start_b)),
                )
            )
        checks.append(_collect("conservation_token_a", tolerance, resid_a))
        checks.append(_collect("conservation_token_b", tolerance, resid_b))
    return AuditReport(tuple(checks))


def one_shot_deviation_gain(
    trace: Trace,
    params: ModelParams,
    consts: EquilibriumConstants | TwoTokenConstants,
    role: str,
    t: int,
    eps: float,
    horizon: int | None = None,
) -> float:
    """Discounted gain from a single-round deviation against the path.

    A validator sells ``eps`` extra at round t, enters t+1 with that much
    less stake, collects the correspondingly reduced reward share, and
    trades back onto the path at t+2.  A user spends ``eps`` less at round
    t, receives the reduced service share, and buys ``eps`` less the same
    round, rejoining at t+1.  Prices stay at their path values (players are
    price takers).  The gain is the difference of the deviator's and the
    path's truncated discounted utilities; rounds outside {t, t+1} cancel
    term by term, so the difference is computed over the affected rounds
    only, making gain(eps=0) exactly zero.
    """
    if role not in (USER, VALIDATOR):
        raise ValueError(f"unknown role {role!r}")
    length = len(trace.rounds) if horizon is None else min(horizon, len(trace.rounds))
    if t < 0 or t >= length:
        raise ValueError(f"round {t} outside the usable trace (length {length})")
    if role == VALIDATOR and t + 1 >= length:
        raise ValueError("validator deviation needs round t+1 in the trace")
    delta = params.delta
    if trace.mode == SINGLE_TOKEN:
        if role == USER:
            rec = trace.rounds[t]
            return delta**t * (
                _service_delta(params, rec.service, rec.tk_user, eps) + eps * rec.price
            )
        rec_t, rec_n = trace.rounds[t], trace.rounds[t + 1]
        if eps >= rec_n.tk_validator:
            raise ConstraintViolation(
                f"deviation eps = {eps} wipes out the validator stake {rec_n.tk_validator}"
            )

        def reward_at(e):
            holding = rec_n.tk_validator - e
            share = holding / (holding + (params.n - 1) * rec_n.tk_validator)
            return rec_n.reward * params.reward_scheme.value(share, params.n)

        gain_t = eps * rec_t.price
        gain_next = (-eps + reward_at(eps) - reward_at(0.0)) * rec_n.price
        return delta**t * gain_t + delta ** (t + 1) * gain_next

    if role == USER:
        rec = trace.rounds[t]
        return delta**t * (
            _service_delta(params, rec.service, rec.holding_b_user, eps)
            + eps * rec.price_b
        )
    rec_t, rec_n = trace.rounds[t], trace.rounds[t + 1]
    stake = rec_n.holding_a_validator
    if eps >= stake:
        raise ConstraintViolation(
            f"deviation eps = {eps} wipes out the validator stake {stake}"
        )

    def reward_b_at(e):
        holding = stake - e
        share = holding / (holding + (params.n - 1) * stake)
        return rec_n.reward_b * params.reward_scheme.value(share, params.n)

    gain_t = eps * rec_t.price_a
    gain_next = -eps * rec_n.price_a + (reward_b_at(eps) - reward_b_at(0.0)) * rec_n.price_b
    return delta**t * gain_t + delta ** (t + 1) * gain_next


def _service_delta(params: ModelParams, service, holding, eps) -> float:
    # spending eps less: own share drops, others stay on path
    if eps < 0.0:
        raise ConstraintViolation("a user cannot spend more than its whole holding")
    if eps > holding:
        raise ConstraintViolation(
            f"deviation eps = {eps} exceeds the user holding {holding}"
        )

    def value_at(e):
        spend = holding - e
        share = spend / (spend + (params.m - 1) * holding)
        return service * params.service_scheme.value(share, params.m) * params.g_value

    return value_at(eps) - value_at(0.0)


@dataclass(frozen=True)
class DeviationResult:
    role: str
    t: int
    eps: float
    gain: float
    bound: float
    passed: bool


DEVIATION_EPSILONS = (1e-2, -1e-2, 1e-3, -1e-3, 1e-4, -1e-4)
DEVIATION_ROUNDS = (0, 1, 10, 100)


def utility_scale(trace: Trace) -> float:
    """Scale of per-round utilities along the path, floored at 1."""
    worst = 1.0
    for rec in trace.rounds:
        worst = max(worst, abs(rec.user_utility), abs(rec.validator_utility))
    return worst


def deviation_suite(
    trace: Trace,
    params: ModelParams,
    consts: EquilibriumConstants | TwoTokenConstants,
    eps_values: Sequence[float] = DEVIATION_EPSILONS,
    rounds: Sequence[int] = DEVIATION_ROUNDS,
    tol: float = 1e-6,
) -> list[DeviationResult]:
    """One-shot deviation grid; combinations barred by constraints are skipped."""
    bound = tol * utility_scale(trace)
    results = []
    for role in (USER, VALIDATOR):
        last_ok = len(trace.rounds) - 1 if role == USER else len(trace.rounds) - 2
        for t in rounds:
            if t > last_ok:
                continue
            for eps in eps_values:
                try:
                    gain = one_shot_deviation_gain(trace, params, consts, role, t, eps)
                except ConstraintViolation:
                    continue
                results.append(
                    DeviationResult(role, t, eps, gain, bound, gain <= bound)
                )
    return results


def scenario_constants(config: ScenarioConfig):
    """The constants object matching a config's mode, for audits."""
    params = config.model_params()
    if config.mode == SINGLE_TOKEN:
        return ratio_constants(params, gamma=config.gamma, price0=config.price0)
    return two_token_constants(params, config.price_b0)


def run_all_audits(
    trace: Trace, params: ModelParams, consts
) -> list[AuditReport]:
    """No-buy-back, price identity and conservation reports for a trace."""
    reports = [audit_no_buy_back(trace)]
    if len(trace.rounds) >= 2:
        reports.append(audit_price_identity(trace, params, consts))
    reports.append(conservation_audit(trace))
    return reports
