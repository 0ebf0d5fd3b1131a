"""Reward- and service-sharing schemes with analytic derivatives.

A scheme maps a participant's fractional contribution x (stake fraction for
validators, fee fraction for users) to the fraction of the total pool that
participant receives.  Three variants are supported:

* ``proportional``   r(x) = x
* ``power_penalty``  r(x) = x - x**ell           (ell > 1)
* ``softcap``        r(x) = 2x / (exp(T*(x - 1/k)) + 1)   (T > 0)

The softcap discourages any participant from holding more than 1/k of the
pool, where k is the participant count the scheme is evaluated against.
Every scheme used in an economy must be concave, must not allocate more than
an equal share at the symmetric point (value(1/k) <= 1/k), and must have a
strictly positive derivative at 1/k.  ``validate_assumptions`` checks all
three conditions numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

PROPORTIONAL = "proportional"
POWER_PENALTY = "power_penalty"
SOFTCAP = "softcap"
SCHEME_KINDS = (PROPORTIONAL, POWER_PENALTY, SOFTCAP)

REWARD = "reward"
SERVICE = "service"


class DomainError(ValueError):
    """Raised when a scheme is evaluated outside its domain."""


class AssumptionViolation(ValueError):
    """Raised when an operation requires scheme assumptions that do not hold."""


@dataclass(frozen=True)
class SchemeSpec:
    """A named sharing scheme plus its parameters.

    ``role`` records whether the scheme splits validator rewards or user
    service; it determines which participant count (n or m) applies when the
    scheme is validated inside a model.
    """

    kind: str
    role: str = REWARD
    ell: float | None = None
    T: float | None = None

    def __post_init__(self):
        if self.kind not in SCHEME_KINDS:
            raise DomainError(f"unknown scheme kind {self.kind!r}")
        if self.role not in (REWARD, SERVICE):
            raise DomainError(f"unknown scheme role {self.role!r}")
        if self.kind == POWER_PENALTY:
            if self.ell is None or not self.ell > 1.0:
                raise DomainError("power_penalty requires ell > 1")
        if self.kind == SOFTCAP:
            if self.T is None or not self.T > 0.0:
                raise DomainError("softcap requires T > 0")

    def value(self, x: float, k: int) -> float:
        """Share of the pool awarded at contribution fraction ``x``."""
        _check_domain(x, k)
        if self.kind == PROPORTIONAL:
            return x
        if self.kind == POWER_PENALTY:
            return x - x**self.ell
        return _softcap_value(x, self.T, k)

    def derivative(self, x: float, k: int) -> float:
        """Analytic first derivative of ``value`` with respect to ``x``."""
        _check_domain(x, k)
        if self.kind == PROPORTIONAL:
            return 1.0
        if self.kind == POWER_PENALTY:
            return 1.0 - self.ell * x ** (self.ell - 1.0)
        return _softcap_derivative(x, self.T, k)


def _check_domain(x: float, k: int) -> None:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"contribution fraction {x} outside [0, 1]")
    if k < 2:
        raise DomainError(f"participant count {k} < 2")


def _softcap_value(x: float, t_steep: float, k: int) -> float:
    # 2x / (e^z + 1) with z = T*(x - 1/k); evaluate via exp(-|z|) to stay
    # finite for steep T.
    z = t_steep * (x - 1.0 / k)
    if z >= 0.0:
        ez = math.exp(-z)
        return 2.0 * x * ez / (1.0 + ez)
    return 2.0 * x / (math.exp(z) + 1.0)


def _softcap_derivative(x: float, t_steep: float, k: int) -> float:
    # -2*((T*x - 1)*e^z - 1) / (e^z + 1)^2, rewritten with exp(-z) for z >= 0.
    z = t_steep * (x - 1.0 / k)
    w = t_steep * x - 1.0
    if z >= 0.0:
        ez = math.exp(-z)
        return -2.0 * (w * ez - ez * ez) / (1.0 + ez) ** 2
    ez = math.exp(z)
    return -2.0 * (w * ez - 1.0) / (ez + 1.0) ** 2


@dataclass(frozen=True)
class SchemeCheck:
    name: str
    passed: bool
    detail: str = ""
    sample_point: float | None = None


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the three scheme admissibility checks for a given k."""

    scheme: SchemeSpec
    k: int
    checks: tuple[SchemeCheck, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[SchemeCheck]:
        return [c for c in self.checks if not c.passed]


CONCAVITY_TOL = 1e-9
CONCAVITY_GRID = 1000


def validate_assumptions(scheme: SchemeSpec, k: int) -> ValidationReport:
    """Check concavity, value(1/k) <= 1/k and derivative(1/k) > 0.

    Concavity is tested by sampled second differences on a 1000-point uniform
    grid in (0, 1); a second difference above +1e-9 fails.  A failing report
    is returned rather than raising, so callers can aggregate errors.
    """
    if k < 2:
        raise DomainError(f"participant count {k} < 2")
    checks = []

    npts = CONCAVITY_GRID
    h = 1.0 / (npts + 1)
    values = [scheme.value(i * h, k) for i in range(1, npts + 1)]
    worst = -math.inf
    worst_x = None
    for i in range(1, npts - 1):
        d2 = values[i - 1] - 2.0 * values[i] + values[i + 1]
        if d2 > worst:
            worst = d2
            worst_x = (i + 1) * h
    concave = worst <= CONCAVITY_TOL
    checks.append(
        SchemeCheck(
            "concavity",
            concave,
            detail=f"max second difference {worst:.3e}",
            sample_point=None if concave else worst_x,
        )
    )

    share = scheme.value(1.0 / k, k)
    cap_ok = share <= 1.0 / k + 1e-15
    checks.append(
        SchemeCheck(
            "symmetric_share_cap",
            cap_ok,
            detail=f"value(1/{k}) = {share!r}, bound {1.0 / k!r}",
            sample_point=1.0 / k,
        )
    )

    slope = scheme.derivative(1.0 / k, k)
    slope_ok = slope > 0.0
    checks.append(
        SchemeCheck(
            "positive_derivative",
            slope_ok,
            detail=f"derivative(1/{k}) = {slope!r}",
            sample_point=1.0 / k,
        )
    )

    return ValidationReport(scheme=scheme, k=k, checks=tuple(checks))


def proportional(role: str = REWARD) -> SchemeSpec:
    return SchemeSpec(kind=PROPORTIONAL, role=role)


def power_penalty(ell: float, role: str = REWARD) -> SchemeSpec:
    return SchemeSpec(kind=POWER_PENALTY, role=role, ell=ell)


def softcap(t_steep: float, role: str = REWARD) -> SchemeSpec:
    return SchemeSpec(kind=SOFTCAP, role=role, T=t_steep)
