import pytest

from stakesim.config import ScenarioConfig
from stakesim.model import ModelParams, stable_ratios
from stakesim.schemes import REWARD, SERVICE, proportional


@pytest.fixture
def baseline_params():
    """Reference economy: m=2, n=2, delta=0.9, proportional schemes, g=1, v=1."""
    return ModelParams(
        m=2,
        n=2,
        delta=0.9,
        v=1.0,
        reward_scheme=proportional(REWARD),
        service_scheme=proportional(SERVICE),
    )


@pytest.fixture
def baseline_consts(baseline_params):
    return stable_ratios(baseline_params)


def single_config(**overrides) -> ScenarioConfig:
    base = dict(
        mode="single_token",
        horizon=500,
        m=2,
        n=2,
        delta=0.9,
        v=1.0,
        service_kind="constant",
        service_s=10.0,
        policy_kind="minimal",
        policy_r0=4.5,
        policy_floor=0.1,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


def two_token_config(**overrides) -> ScenarioConfig:
    base = dict(
        mode="two_token",
        horizon=500,
        m=2,
        n=2,
        delta=0.9,
        v=1.0,
        service_kind="constant",
        service_s=10.0,
        a_v0=10.0,
        price_b0=1.0,
    )
    base.update(overrides)
    return ScenarioConfig(**base)
