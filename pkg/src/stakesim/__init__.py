"""Proof-of-stake tokenomics equilibria: constants, simulation, audits."""

from .schemes import (
    AssumptionViolation,
    DomainError,
    SchemeSpec,
    ValidationReport,
    power_penalty,
    proportional,
    softcap,
    validate_assumptions,
)
from .model import (
    EquilibriumConstants,
    ModelParams,
    growth_factor,
    kappa_constants,
    ratio_constants,
    stable_ratios,
    validate_params,
)
from .single_token import (
    EXPLOSION,
    ConstantRewards,
    ExplicitRewards,
    MinimalRewards,
    NoBuyBackViolation,
    StrategyProfile,
    critical_initial_reward,
    equilibrium_holdings,
    minimal_reward_closed_form,
    no_buy_back_min_next_reward,
    price_path,
    reward_series,
    round_strategies_stable,
)
from .two_token import (
    TwoTokenConstants,
    deviation_value_bound,
    initial_price_a,
    mechanism_rewards,
    price_a_path,
    price_a_step,
    reward_cap_b,
    two_token_constants,
    two_token_round_strategies,
    user_holding_b,
)
from .engine import (
    COMPLETED,
    EXPLODED,
    EXPLOSION_THRESHOLD,
    INFEASIBLE,
    AuditCheck,
    AuditReport,
    ConstraintViolation,
    DeviationResult,
    SingleTokenRound,
    SingleTokenState,
    Trace,
    TwoTokenRound,
    audit_no_buy_back,
    audit_price_identity,
    conservation_audit,
    deviation_suite,
    one_shot_deviation_gain,
    run_all_audits,
    run_round,
    run_scenario,
    scenario_constants,
)
from .config import ConfigError, ScenarioConfig, parse_scenario, serialize_scenario
from .traceio import trace_csv_text, write_trace_csv
from .sweeps import SweepResult, figures_preset, sweep_bisect, sweep_grid

__version__ = "0.1.0"
