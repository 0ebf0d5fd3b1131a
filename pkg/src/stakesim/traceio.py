"""CSV emission for traces: one row per round, 12 significant digits."""

from __future__ import annotations

import os

from .engine import SINGLE_TOKEN, COMPLETED, Trace

SINGLE_COLUMNS = (
    "t", "S", "R", "price", "tk_U", "tk_V", "u_U", "b_U", "s_V",
    "system_net_sold", "staked_total", "staked_market_cap",
    "reward_market_cap", "user_utility", "validator_utility",
)

TWO_COLUMNS = (
    "t", "S", "R_A", "R_B", "price_A", "price_B", "tk_U_B", "tk_V_A",
    "u_U", "b_U_B", "b_U_A", "s_V_B", "s_V_A",
    "system_net_sold_A", "system_net_sold_B", "staked_total",
    "staked_market_cap", "reward_market_cap", "user_utility",
    "validator_utility",
)


def _num(x: float) -> str:
    return f"{x:.12g}"


def _single_row(rec, n: int) -> list[str]:
    staked = n * rec.tk_validator
    return [str(rec.t)] + [
        _num(x)
        for x in (
            rec.service, rec.reward, rec.price, rec.tk_user, rec.tk_validator,
            rec.spent, rec.bought, rec.sold, rec.system_net_sold,
            staked, staked * rec.price, rec.reward * rec.price,
            rec.user_utility, rec.validator_utility,
        )
    ]


def _two_row(rec, n: int) -> list[str]:
    staked = n * rec.holding_a_validator
    return [str(rec.t)] + [
        _num(x)
        for x in (
            rec.service, rec.reward_a, rec.reward_b, rec.price_a, rec.price_b,
            rec.holding_b_user, rec.holding_a_validator, rec.spent,
            rec.bought_b, rec.bought_a, rec.sold_b, rec.sold_a,
            rec.net_sold_a, rec.net_sold_b,
            staked, staked * rec.price_a,
            rec.reward_a * rec.price_a + rec.reward_b * rec.price_b,
            rec.user_utility, rec.validator_utility,
        )
    ]


def trace_csv_text(trace: Trace) -> str:
    """Header, one row per round, and a trailing status comment when the
    run terminated early."""
    if not trace.rounds:
        raise ValueError("cannot write an empty trace")
    if trace.mode == SINGLE_TOKEN:
        lines = [",".join(SINGLE_COLUMNS)]
        lines += [",".join(_single_row(rec, trace.n)) for rec in trace.rounds]
    else:
        lines = [",".join(TWO_COLUMNS)]
        lines += [",".join(_two_row(rec, trace.n)) for rec in trace.rounds]
    if trace.status != COMPLETED:
        lines.append(f"# status={trace.status}@t={trace.status_round}")
    return "\n".join(lines) + "\n"


def write_trace_csv(trace: Trace, destination: str) -> None:
    parent = os.path.dirname(destination)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(destination, "w", newline="\n") as fh:
        fh.write(trace_csv_text(trace))
