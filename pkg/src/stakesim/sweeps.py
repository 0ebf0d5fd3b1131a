"""Parameter sweeps, explosion-threshold bisection, and figure presets.

A sweep re-runs a base scenario with one variable replaced.  Grid mode
reports the terminal status per point; bisection mode locates the boundary
between two differing endpoint statuses (typically completed vs exploded)
to a relative tolerance of 1e-6.  Sweep points are independent, so results
do not depend on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import SINGLE_TOKEN, ScenarioConfig
from .engine import run_scenario

SWEEP_VARIABLES = ("R0", "S_const", "delta", "price_A0", "a_V0")

BISECT_REL_TOL = 1e-6


class SweepError(ValueError):
    """Bad sweep request (unknown variable, unusable bracket)."""


def _apply(base: ScenarioConfig, variable: str, value: float) -> ScenarioConfig:
    if variable == "R0":
        return base.with_updates(policy_r0=value)
    if variable == "S_const":
        if base.service_kind != "constant":
            raise SweepError("S_const sweeps need service.kind = constant")
        return base.with_updates(service_s=value)
    if variable == "delta":
        return base.with_updates(delta=value)
    if variable == "price_A0":
        return base.with_updates(price_a0=value)
    if variable == "a_V0":
        return base.with_updates(a_v0=value)
    raise SweepError(f"unknown sweep variable {variable!r}; choose from {SWEEP_VARIABLES}")


def _status_at(base: ScenarioConfig, variable: str, value: float) -> str:
    return run_scenario(_apply(base, variable, value)).status


@dataclass(frozen=True)
class SweepResult:
    variable: str
    points: tuple[float, ...]
    statuses: tuple[str, ...]
    threshold: float | None = None
    iterations: int = 0


def sweep_grid(base: ScenarioConfig, variable: str, values) -> SweepResult:
    values = tuple(values)
    statuses = tuple(_status_at(base, variable, v) for v in values)
    return SweepResult(variable=variable, points=values, statuses=statuses)


def sweep_bisect(
    base: ScenarioConfig,
    variable: str,
    lo: float,
    hi: float,
    rel_tol: float = BISECT_REL_TOL,
) -> SweepResult:
    """Bisect the status boundary between lo and hi.

    The endpoints must have different terminal statuses; the returned
    threshold is bracketed to ``rel_tol`` relative width.
    """
    if not lo < hi:
        raise SweepError(f"bracket [{lo}, {hi}] is empty")
    status_lo = _status_at(base, variable, lo)
    status_hi = _status_at(base, variable, hi)
    if status_lo == status_hi:
        raise SweepError(
            f"bracket endpoints share status {status_lo!r}; bisection needs one"
            " exploding and one non-exploding endpoint"
        )
    iterations = 0
    while hi - lo > rel_tol * max(abs(lo), abs(hi), 1e-12):
        mid = 0.5 * (lo + hi)
        if _status_at(base, variable, mid) == status_lo:
            lo = mid
        else:
            hi = mid
        iterations += 1
        if iterations > 200:  # bracket cannot shrink further in float64
            break
    threshold = 0.5 * (lo + hi)
    return SweepResult(
        variable=variable,
        points=(lo, hi),
        statuses=(status_lo, status_hi),
        threshold=threshold,
        iterations=iterations,
    )


# Figure presets.  The source plots omit their economy parameters, so every
# preset uses the reference economy m=2, n=2, delta=0.9, proportional
# schemes, g=1, v=1 with the minimal no-buy-back reward policy floored at
# 0.1; each emitted config header states that substitution.
_BASE_HEADER = (
    "reference economy substituted for unspecified plot parameters:\n"
    "m=2 n=2 delta=0.9 proportional schemes g=1 v=1, minimal rewards, floor 0.1"
)


def _baseline(**overrides) -> ScenarioConfig:
    base = dict(
        mode=SINGLE_TOKEN,
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


def figures_preset(which: str, outdir: str = "out") -> list[ScenarioConfig]:
    """Paired scenario configs reproducing each figure's qualitative contrast.

    fig2: low vs high service level at R0 = 4.2 (threshold S* = 9.33...).
    fig3: high vs low initial reward at S = 10 (threshold R* = 4.5).
    fig4: delta = 0.9 vs 0.8 at R0 = 4.2 (smaller delta explodes).
    fig5: price factor delta*growth = 0.9 (delta = 0.8, gamma = 0.9) under
    both price conventions; token rewards explode while their money value
    grows at a different rate.
    """
    if which == "fig2":
        return [
            _baseline(policy_r0=4.2, service_s=9.0, output=f"{outdir}/fig2_low_service.csv"),
            _baseline(policy_r0=4.2, service_s=11.0, output=f"{outdir}/fig2_high_service.csv"),
        ]
    if which == "fig3":
        return [
            _baseline(policy_r0=5.0, output=f"{outdir}/fig3_high_initial_reward.csv"),
            _baseline(policy_r0=4.0, output=f"{outdir}/fig3_low_initial_reward.csv"),
        ]
    if which == "fig4":
        return [
            _baseline(policy_r0=4.2, delta=0.9, output=f"{outdir}/fig4_delta_0.9.csv"),
            _baseline(policy_r0=4.2, delta=0.8, output=f"{outdir}/fig4_delta_0.8.csv"),
        ]
    if which == "fig5":
        # gamma = 0.9 needs delta < 0.9 for a positive rewards-to-stake ratio
        return [
            _baseline(
                delta=0.8,
                gamma=0.9,
                horizon=100,
                price_convention="proof",
                output=f"{outdir}/fig5_proof_convention.csv",
            ),
            _baseline(
                delta=0.8,
                gamma=0.9,
                horizon=100,
                price_convention="figure",
                output=f"{outdir}/fig5_figure_convention.csv",
            ),
        ]
    raise SweepError(f"unknown figure preset {which!r}; choose fig2, fig3, fig4 or fig5")


def preset_header(which: str) -> str:
    return f"{which} preset\n{_BASE_HEADER}"
