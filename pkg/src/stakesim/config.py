"""Scenario configuration: flat ``key = value`` files, validation, round-trip.

The format is line oriented: one ``key = value`` pair per line, ``#`` starts
a comment, keys use dotted sections (``model.delta``, ``service.S``).  The
full key set is documented in the README.  ``parse_scenario`` validates the
whole file and reports every problem it finds, not just the first;
``serialize_scenario`` writes a canonical form whose re-parse yields an
equal config (floats are emitted with repr and round-trip exactly).
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .model import ModelParams, validate_params
from .schemes import (
    POWER_PENALTY,
    PROPORTIONAL,
    REWARD,
    SCHEME_KINDS,
    SERVICE,
    SOFTCAP,
    DomainError,
    SchemeSpec,
)
from .single_token import (
    ConstantRewards,
    ExplicitRewards,
    MinimalRewards,
    PRICE_CONVENTIONS,
    PROOF_CONVENTION,
    RewardPolicy,
)

SINGLE_TOKEN = "single_token"
TWO_TOKEN = "two_token"
MODES = (SINGLE_TOKEN, TWO_TOKEN)

SERVICE_KINDS = ("constant", "step", "ramp", "explicit")
POLICY_KINDS = ("constant", "explicit", "minimal")


class ConfigError(ValueError):
    """Carries every validation problem found in a scenario file."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str
    horizon: int
    m: int = 2
    n: int = 2
    delta: float = 0.9
    v: float = 0.0
    g: float = 1.0
    gamma: float = 1.0
    reward_scheme: str = PROPORTIONAL
    reward_ell: float | None = None
    reward_t: float | None = None
    service_scheme: str = PROPORTIONAL
    service_ell: float | None = None
    service_t: float | None = None
    service_kind: str = "constant"
    service_s: float | None = None
    service_s_before: float | None = None
    service_s_after: float | None = None
    service_t_switch: int | None = None
    service_s0: float | None = None
    service_slope: float | None = None
    service_list: tuple[float, ...] | None = None
    service_s_max: float | None = None
    policy_kind: str | None = None
    policy_r0: float | None = None
    policy_floor: float = 0.0
    policy_values: tuple[float, ...] | None = None
    price0: float = 1.0
    price_a0: float | None = None
    price_b0: float = 1.0
    a_v0: float = 10.0
    price_convention: str = PROOF_CONVENTION
    output: str | None = None

    def model_params(self) -> ModelParams:
        return ModelParams(
            m=self.m,
            n=self.n,
            delta=self.delta,
            v=self.v,
            g_value=self.g,
            reward_scheme=_scheme(self.reward_scheme, REWARD, self.reward_ell, self.reward_t),
            service_scheme=_scheme(
                self.service_scheme, SERVICE, self.service_ell, self.service_t
            ),
        )

    def service_values(self, length: int) -> list[float]:
        """Service levels for rounds 0..length-1."""
        kind = self.service_kind
        if kind == "constant":
            return [self.service_s] * length
        if kind == "step":
            return [
                self.service_s_before if t < self.service_t_switch else self.service_s_after
                for t in range(length)
            ]
        if kind == "ramp":
            cap = self.service_s_max
            return [min(self.service_s0 + self.service_slope * t, cap) for t in range(length)]
        return list(self.service_list[:length])

    def reward_policy(self) -> RewardPolicy:
        if self.policy_kind == "constant":
            return ConstantRewards(self.policy_r0)
        if self.policy_kind == "explicit":
            return ExplicitRewards(self.policy_values)
        return MinimalRewards(self.policy_r0, self.policy_floor)

    def with_updates(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)


def _scheme(kind, role, ell, t_steep) -> SchemeSpec:
    return SchemeSpec(kind=kind, role=role, ell=ell, T=t_steep)


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


# key -> (attribute, converter)
_KEYS = {
    "mode": ("mode", str),
    "horizon": ("horizon", int),
    "model.m": ("m", int),
    "model.n": ("n", int),
    "model.delta": ("delta", float),
    "model.v": ("v", float),
    "model.g": ("g", float),
    "model.gamma": ("gamma", float),
    "model.reward_scheme": ("reward_scheme", str),
    "model.reward_scheme.ell": ("reward_ell", float),
    "model.reward_scheme.T": ("reward_t", float),
    "model.service_scheme": ("service_scheme", str),
    "model.service_scheme.ell": ("service_ell", float),
    "model.service_scheme.T": ("service_t", float),
    "service.kind": ("service_kind", str),
    "service.S": ("service_s", float),
    "service.S_before": ("service_s_before", float),
    "service.S_after": ("service_s_after", float),
    "service.t_switch": ("service_t_switch", int),
    "service.S0": ("service_s0", float),
    "service.slope": ("service_slope", float),
    "service.values": ("service_list", _parse_float_list),
    "service.S_max": ("service_s_max", float),
    "policy.kind": ("policy_kind", str),
    "policy.R0": ("policy_r0", float),
    "policy.floor": ("policy_floor", float),
    "policy.values": ("policy_values", _parse_float_list),
    "initial.price0": ("price0", float),
    "initial.price_A0": ("price_a0", float),
    "initial.price_B0": ("price_b0", float),
    "initial.a_V0": ("a_v0", float),
    "price_convention": ("price_convention", str),
    "output": ("output", str),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _) in _KEYS.items()}


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse and fully validate a scenario; raises ConfigError with all problems."""
    errors = []
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEYS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        attr, convert = _KEYS[key]
        try:
            values[attr] = convert(value)
        except ValueError:
            errors.append(f"line {lineno}: bad value {value!r} for {key}")
    if "mode" not in values:
        errors.append("mode is required")
    if "horizon" not in values:
        errors.append("horizon is required")
    if errors and ("mode" not in values or "horizon" not in values):
        raise ConfigError(errors)
    config = ScenarioConfig(**values)
    errors.extend(validate_config(config))
    if errors:
        raise ConfigError(errors)
    return config


def validate_config(config: ScenarioConfig) -> list[str]:
    """Every validation problem with the config; empty list means usable."""
    errors = []
    if config.mode not in MODES:
        errors.append(f"mode must be one of {MODES}, got {config.mode!r}")
        return errors
    if config.horizon < 1:
        errors.append("horizon must be >= 1")
    if config.m < 2:
        errors.append("model.m must be >= 2")
    if config.n < 2:
        errors.append("model.n must be >= 2")
    if not 0.0 < config.delta < 1.0:
        errors.append("model.delta must be in (0,1)")
    if config.v < 0.0:
        errors.append("model.v must be >= 0")
    if not config.g > 0.0:
        errors.append("model.g must be > 0")
    if errors:
        return errors
    if config.gamma < config.delta:
        errors.append("model.gamma must be >= model.delta (rewards-to-stake would be negative)")
    if config.price_convention not in PRICE_CONVENTIONS:
        errors.append(f"price_convention must be one of {PRICE_CONVENTIONS}")

    for kind, label in (
        (config.reward_scheme, "model.reward_scheme"),
        (config.service_scheme, "model.service_scheme"),
    ):
        if kind not in SCHEME_KINDS:
            errors.append(f"{label} must be one of {SCHEME_KINDS}, got {kind!r}")
    if config.reward_scheme == POWER_PENALTY and (config.reward_ell is None or config.reward_ell <= 1):
        errors.append("model.reward_scheme.ell must be > 1")
    if config.reward_scheme == SOFTCAP and (config.reward_t is None or config.reward_t <= 0):
        errors.append("model.reward_scheme.T must be > 0")
    if config.service_scheme == POWER_PENALTY and (config.service_ell is None or config.service_ell <= 1):
        errors.append("model.service_scheme.ell must be > 1")
    if config.service_scheme == SOFTCAP and (config.service_t is None or config.service_t <= 0):
        errors.append("model.service_scheme.T must be > 0")
    if errors:
        return errors

    try:
        params = config.model_params()
    except (ValueError, DomainError) as exc:
        errors.append(str(exc))
        return errors
    errors.extend(validate_params(params))

    errors.extend(_validate_service(config))
    if config.mode == SINGLE_TOKEN:
        errors.extend(_validate_single(config))
    else:
        errors.extend(_validate_two(config))
    return errors


def _validate_service(config: ScenarioConfig) -> list[str]:
    errors = []
    kind = config.service_kind
    if kind not in SERVICE_KINDS:
        return [f"service.kind must be one of {SERVICE_KINDS}, got {kind!r}"]
    required = {
        "constant": ("service_s",),
        "step": ("service_s_before", "service_s_after", "service_t_switch"),
        "ramp": ("service_s0", "service_slope", "service_s_max"),
        "explicit": ("service_list",),
    }[kind]
    for attr in required:
        if getattr(config, attr) is None:
            errors.append(f"{_ATTR_TO_KEY[attr]} is required for service.kind = {kind}")
    if errors:
        return errors
    if kind == "explicit" and len(config.service_list) < config.horizon + 1:
        errors.append(
            f"service.values needs {config.horizon + 1} entries"
            f" (horizon + 1), got {len(config.service_list)}"
        )
        return errors
    if kind == "step" and config.service_t_switch < 0:
        errors.append("service.t_switch must be >= 0")
        return errors
    series = config.service_values(config.horizon + 1)
    s_max = config.service_s_max if config.service_s_max is not None else max(series)
    if min(series) <= 0.0:
        errors.append("every service level must be > 0")
    if max(series) > s_max:
        errors.append(f"service levels exceed service.S_max = {s_max}")
    return errors


def _validate_single(config: ScenarioConfig) -> list[str]:
    errors = []
    if not config.price0 > 0.0:
        errors.append("initial.price0 must be > 0")
    if config.policy_kind is None:
        return errors + ["policy.kind is required in single_token mode"]
    if config.policy_kind not in POLICY_KINDS:
        return errors + [f"policy.kind must be one of {POLICY_KINDS}"]
    if config.policy_kind in ("constant", "minimal"):
        if config.policy_r0 is None or config.policy_r0 < 0.0:
            errors.append("policy.R0 must be set and >= 0")
    if config.policy_kind == "minimal" and config.policy_floor < 0.0:
        errors.append("policy.floor must be >= 0")
    if config.policy_kind == "explicit":
        if config.policy_values is None:
            errors.append("policy.values is required for policy.kind = explicit")
        elif len(config.policy_values) < config.horizon + 1:
            errors.append(
                f"policy.values needs {config.horizon + 1} entries (horizon + 1)"
            )
        elif any(r < 0.0 for r in config.policy_values):
            errors.append("policy.values must all be >= 0")
    return errors


def _validate_two(config: ScenarioConfig) -> list[str]:
    errors = []
    if config.policy_kind is not None or config.policy_r0 is not None:
        errors.append("policy.* does not apply in two_token mode (rewards follow the mechanism)")
    if config.reward_scheme != PROPORTIONAL or config.service_scheme != PROPORTIONAL:
        errors.append("two_token mode supports proportional schemes only")
    if not config.price_b0 > 0.0:
        errors.append("initial.price_B0 must be > 0")
    if not config.a_v0 > 0.0:
        errors.append("initial.a_V0 must be > 0")
    if config.price_a0 is not None and config.price_a0 < 0.0:
        errors.append("initial.price_A0 must be >= 0")
    if abs(config.gamma - 1.0) > 1e-12:
        errors.append("two_token mode keeps price_B stable; model.gamma must be 1")
    return errors


def _format_value(value) -> str:
    if isinstance(value, bool):
        raise TypeError("no boolean config values")
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    return str(value)


_DEFAULTS = {f.name: f.default for f in fields(ScenarioConfig)}


def serialize_scenario(config: ScenarioConfig, header: str | None = None) -> str:
    """Canonical text form; parse(serialize(c)) == c.

    Only keys differing from their defaults are written (plus mode and
    horizon), so emitted files stay minimal and mode-appropriate.
    """
    lines = []
    if header:
        lines.extend(f"# {line}" for line in header.splitlines())
    for key, (attr, _) in _KEYS.items():
        value = getattr(config, attr)
        if value is None:
            continue
        if attr not in ("mode", "horizon") and value == _DEFAULTS[attr]:
            continue
        lines.append(f"{key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"
