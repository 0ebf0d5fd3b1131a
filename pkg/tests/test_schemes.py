"""Scheme values, analytic derivatives, and admissibility checks."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stakesim.schemes import (
    DomainError,
    SchemeSpec,
    power_penalty,
    proportional,
    softcap,
    validate_assumptions,
)


def central_difference(scheme, x, k, h=1e-6):
    return (scheme.value(x + h, k) - scheme.value(x - h, k)) / (2.0 * h)


class TestValues:
    def test_proportional_identity(self):
        assert proportional().value(0.5, 2) == 0.5
        assert proportional().value(0.0, 3) == 0.0
        assert proportional().value(1.0, 3) == 1.0

    def test_power_penalty_value(self):
        # x - x^2 at 0.25, evaluated independently
        expected = 0.25 - 0.25**2
        assert expected == 0.1875
        assert power_penalty(2.0).value(0.25, 4) == pytest.approx(expected, abs=1e-15)

    def test_softcap_value_at_equal_share(self):
        # the logistic term equals 1/2 at x = 1/k, so value = 2 * (1/4) * (1/2)
        assert softcap(2.0).value(0.25, 4) == pytest.approx(0.25, abs=1e-15)

    def test_softcap_equal_share_is_exact_for_any_k(self):
        for t_steep in (0.5, 2.0, 7.0):
            for k in (2, 3, 4, 7, 33):
                x = 1.0 / k
                assert softcap(t_steep).value(x, k) == x

    def test_values_stay_in_unit_interval(self):
        for scheme in (proportional(), power_penalty(2.5), softcap(3.0)):
            for i in range(101):
                v = scheme.value(i / 100.0, 4)
                assert 0.0 <= v <= 1.0

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            proportional().value(-0.1, 2)
        with pytest.raises(DomainError):
            proportional().value(1.1, 2)
        with pytest.raises(DomainError):
            proportional().value(0.5, 1)

    def test_bad_parameters_rejected(self):
        with pytest.raises(DomainError):
            SchemeSpec(kind="power_penalty", ell=1.0)
        with pytest.raises(DomainError):
            SchemeSpec(kind="softcap", T=0.0)
        with pytest.raises(DomainError):
            SchemeSpec(kind="linear")


class TestDerivatives:
    def test_proportional_derivative(self):
        assert proportional().derivative(0.37, 5) == 1.0

    def test_power_penalty_derivative(self):
        # 1 - ell * x^(ell-1) at ell=2, x=0.25
        scheme = power_penalty(2.0)
        assert scheme.derivative(0.25, 4) == pytest.approx(0.5, abs=1e-12)
        assert scheme.derivative(0.25, 4) == pytest.approx(
            central_difference(scheme, 0.25, 4), abs=1e-6
        )

    def test_softcap_derivative_at_equal_share(self):
        # closed form 1 - T/(2k): T=2, k=4 gives 0.75
        scheme = softcap(2.0)
        assert scheme.derivative(0.25, 4) == pytest.approx(0.75, abs=1e-12)
        assert scheme.derivative(0.25, 4) == pytest.approx(
            central_difference(scheme, 0.25, 4), abs=1e-6
        )

    def test_softcap_equal_share_formula(self):
        for t_steep in (0.5, 1.0, 3.0):
            for k in (2, 3, 5, 8):
                got = softcap(t_steep).derivative(1.0 / k, k)
                assert got == pytest.approx(1.0 - t_steep / (2.0 * k), abs=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(
        x=st.floats(min_value=0.01, max_value=0.99),
        kind=st.sampled_from(["proportional", "power_penalty", "softcap"]),
        ell=st.floats(min_value=1.2, max_value=4.0),
        t_steep=st.floats(min_value=0.2, max_value=6.0),
        k=st.integers(min_value=2, max_value=12),
    )
    def test_analytic_matches_central_difference(self, x, kind, ell, t_steep, k):
        scheme = SchemeSpec(kind=kind, ell=ell, T=t_steep)
        assert scheme.derivative(x, k) == pytest.approx(
            central_difference(scheme, x, k), abs=1e-6
        )

    def test_softcap_steep_tail_is_finite(self):
        scheme = softcap(5000.0)
        assert scheme.value(0.9, 2) == pytest.approx(0.0, abs=1e-12)
        assert math.isfinite(scheme.derivative(0.9, 2))


class TestValidation:
    def test_proportional_passes(self):
        report = validate_assumptions(proportional(), 2)
        assert report.passed
        assert [c.name for c in report.checks] == [
            "concavity",
            "symmetric_share_cap",
            "positive_derivative",
        ]

    def test_steep_softcap_fails_derivative(self):
        # 1 - T/(2k) = 1 - 10/8 < 0
        report = validate_assumptions(softcap(10.0), 4)
        assert not report.passed
        names = [c.name for c in report.failures()]
        assert "positive_derivative" in names

    def test_mild_softcap_passes(self):
        assert validate_assumptions(softcap(2.0), 4).passed

    def test_power_penalty_passes_for_k4(self):
        # value(1/4) = 0.1875 <= 0.25 and derivative(1/4) = 0.5 > 0
        report = validate_assumptions(power_penalty(2.0), 4)
        assert report.passed

    def test_power_penalty_flat_at_k2_fails(self):
        # derivative(1/2) = 1 - 2*(1/2) = 0, not strictly positive
        report = validate_assumptions(power_penalty(2.0), 2)
        assert not report.passed

    def test_failing_report_names_sample_point(self):
        report = validate_assumptions(softcap(10.0), 4)
        bad = [c for c in report.failures() if c.name == "positive_derivative"][0]
        assert bad.sample_point == pytest.approx(0.25)
