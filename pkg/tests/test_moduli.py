"""Tests for the ω and ψ families."""

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from pydantic import ValidationError
from scipy import integrate

from src.errors import ModulusDomainError, ModulusRangeError
from src.scalar.moduli import (
    ConstantRate,
    HoelderModulus,
    HoelderTerm,
    LipschitzModulus,
    PiecewiseLinearConcaveModulus,
    PiecewiseLinearRate,
    SumOfHoelderModulus,
    ZeroRate,
    omega_derivative,
    omega_eval,
    omega_integral,
    omega_inverse,
    parse_modulus,
    parse_psi,
    psi_eval,
    psi_integral,
    validate_modulus,
)

CONCAVE_KINK = PiecewiseLinearConcaveModulus(breakpoints=((0, 0), (1, 2), (3, 3)))


def test_lipschitz_values():
    m = LipschitzModulus(K=2.0)
    assert omega_eval(m, 0.5) == pytest.approx(1.0)
    assert omega_inverse(m, 1.0) == pytest.approx(0.5)
    assert omega_integral(LipschitzModulus(K=1.0), 1.0) == pytest.approx(0.5)
    assert omega_derivative(m, 3.0) == 2.0


def test_hoelder_values():
    m = HoelderModulus(L=1.0, alpha=0.5)
    assert omega_eval(m, 0.25) == pytest.approx(0.5)
    assert omega_inverse(m, 0.5) == pytest.approx(0.25)
    assert omega_integral(m, 1.0) == pytest.approx(2.0 / 3.0)
    assert math.isinf(omega_derivative(m, 0.0))


def test_hoelder_exponent_must_stay_below_one():
    with pytest.raises(ValidationError):
        HoelderModulus(L=1.0, alpha=1.0)


def test_sum_of_hoelder_inverse_matches_value():
    m = SumOfHoelderModulus(terms=(HoelderTerm(L=1.0, alpha=1.0), HoelderTerm(L=0.5, alpha=0.5)))
    t = omega_inverse(m, 2.0)
    assert omega_eval(m, t) == pytest.approx(2.0, abs=1e-12)
    assert omega_integral(m, 1.0) == pytest.approx(0.5 + 0.5 / 1.5)


def test_piecewise_modulus_interpolates_and_integrates():
    assert omega_eval(CONCAVE_KINK, 0.5) == pytest.approx(1.0)
    assert omega_eval(CONCAVE_KINK, 2.0) == pytest.approx(2.5)
    assert omega_integral(CONCAVE_KINK, 1.0) == pytest.approx(1.0)
    assert omega_integral(CONCAVE_KINK, 3.0) == pytest.approx(1.0 + 5.0)
    assert omega_inverse(CONCAVE_KINK, 2.5) == pytest.approx(2.0, abs=1e-12)


def test_piecewise_modulus_is_undefined_past_last_breakpoint():
    with pytest.raises(ModulusRangeError):
        omega_eval(CONCAVE_KINK, 3.5)
    with pytest.raises(ModulusRangeError):
        omega_inverse(CONCAVE_KINK, 3.5)


def test_piecewise_modulus_must_start_at_origin():
    with pytest.raises(ValidationError):
        PiecewiseLinearConcaveModulus(breakpoints=((0, 1), (1, 2)))


def test_negative_arguments_are_rejected():
    with pytest.raises(ModulusDomainError):
        omega_eval(LipschitzModulus(K=1.0), -1e-3)
    with pytest.raises(ModulusDomainError):
        omega_inverse(HoelderModulus(L=1.0, alpha=0.5), -1.0)
    with pytest.raises(ModulusDomainError):
        psi_integral(ZeroRate(), -0.1)


def test_psi_families():
    assert psi_eval(ConstantRate(c=0.05), 2.0) == pytest.approx(0.05)
    assert psi_integral(ConstantRate(c=0.05), 2.0) == pytest.approx(0.1)
    ramp = PiecewiseLinearRate(breakpoints=((0, 0), (1, 1)))
    assert psi_eval(ramp, 1.0) == pytest.approx(1.0)
    assert psi_integral(ramp, 1.0) == pytest.approx(0.5)
    # constant extension past the last breakpoint
    assert psi_eval(ramp, 3.0) == pytest.approx(1.0)
    assert psi_integral(ramp, 3.0) == pytest.approx(2.5)


def test_decreasing_psi_is_rejected():
    with pytest.raises(ValidationError):
        PiecewiseLinearRate(breakpoints=((0, 1), (1, 0.5)))


def test_parse_from_json_mappings():
    assert parse_modulus({"kind": "lipschitz", "K": 1}) == LipschitzModulus(K=1.0)
    assert parse_psi({"kind": "constant", "c": 0.1}) == ConstantRate(c=0.1)
    with pytest.raises(ValidationError):
        parse_modulus({"kind": "cubic", "K": 1})


def test_validate_accepts_builtin_families():
    for m in (LipschitzModulus(K=3.0), HoelderModulus(L=2.0, alpha=0.3), CONCAVE_KINK):
        report = validate_modulus(m)
        assert report.valid, report.failures


def test_validate_reports_convex_piecewise():
    convex = PiecewiseLinearConcaveModulus(breakpoints=((0, 0), (1, 1), (2, 3)))
    report = validate_modulus(convex)
    assert not report.valid
    assert report.first_violation.startswith("concavity violated")


def test_validate_reports_flat_segment():
    flat = PiecewiseLinearConcaveModulus(breakpoints=((0, 0), (1, 1), (2, 1)))
    report = validate_modulus(flat)
    assert not report.valid
    assert any(f.startswith("monotonicity violated") for f in report.failures)


@seed(1)
@settings(max_examples=200, deadline=None)
@given(
    L=st.floats(min_value=0.01, max_value=100.0),
    alpha=st.floats(min_value=0.05, max_value=0.95),
    s=st.floats(min_value=0.0, max_value=50.0),
)
def test_hoelder_inverse_is_inverse(L, alpha, s):
    m = HoelderModulus(L=L, alpha=alpha)
    assert omega_eval(m, omega_inverse(m, s)) == pytest.approx(s, rel=1e-9, abs=1e-12)


@seed(2)
@settings(max_examples=100, deadline=None)
@given(
    t=st.floats(min_value=0.0, max_value=10.0),
    u=st.floats(min_value=0.0, max_value=10.0),
)
def test_integral_is_monotone_and_convex_for_sum_of_hoelder(t, u):
    m = SumOfHoelderModulus(terms=(HoelderTerm(L=1.0, alpha=0.5), HoelderTerm(L=0.2, alpha=1.0)))
    lo, hi = min(t, u), max(t, u)
    assert omega_integral(m, lo) <= omega_integral(m, hi)
    mid = 0.5 * (lo + hi)
    assert omega_integral(m, mid) <= 0.5 * (omega_integral(m, lo) + omega_integral(m, hi)) + 1e-12


@pytest.mark.parametrize(
    "m",
    [
        LipschitzModulus(K=1.7),
        HoelderModulus(L=0.8, alpha=0.4),
        SumOfHoelderModulus(terms=(HoelderTerm(L=1.0, alpha=0.3), HoelderTerm(L=2.0, alpha=1.0))),
        CONCAVE_KINK,
    ],
)
def test_integral_matches_quadrature(m):
    for t in (0.1, 0.7, 2.5):
        expected, _ = integrate.quad(
            lambda s: omega_eval(m, s), 0.0, t, points=[1.0] if t > 1.0 else None, epsabs=1e-13, epsrel=1e-11
        )
        assert omega_integral(m, t) == pytest.approx(expected, rel=1e-8, abs=1e-12)


def test_psi_integral_matches_quadrature():
    rate = PiecewiseLinearRate(breakpoints=((0, 0.1), (0.5, 0.3), (2, 0.4)))
    for t in (0.25, 1.0, 3.0):
        kinks = [p for p in (0.5, 2.0) if p < t] or None
        expected, _ = integrate.quad(lambda s: psi_eval(rate, s), 0.0, t, points=kinks, epsabs=1e-13)
        assert psi_integral(rate, t) == pytest.approx(expected, rel=1e-9)


ALL_KINDS = [
    LipschitzModulus(K=1.7),
    HoelderModulus(L=0.8, alpha=0.4),
    SumOfHoelderModulus(terms=(HoelderTerm(L=1.0, alpha=0.3), HoelderTerm(L=2.0, alpha=1.0))),
    CONCAVE_KINK,
]


@pytest.mark.parametrize("m", ALL_KINDS)
def test_inverse_undoes_value_on_grid(m):
    limit = min(10.0, m.evaluation_limit)
    for t in np.linspace(0.0, limit, 101):
        t = float(t)
        assert abs(omega_inverse(m, omega_eval(m, t)) - t) <= 1e-12 * max(1.0, t)


@pytest.mark.parametrize("m", ALL_KINDS)
@seed(3)
@settings(max_examples=100, deadline=None)
@given(
    t=st.floats(min_value=0.0, max_value=1.0),
    u=st.floats(min_value=0.0, max_value=1.0),
    tau=st.floats(min_value=0.0, max_value=1.0),
)
def test_increments_shrink_along_the_axis(m, t, u, tau):
    t1, t2 = min(t, u), max(t, u)
    near = omega_eval(m, t1 + tau) - omega_eval(m, t1)
    far = omega_eval(m, t2 + tau) - omega_eval(m, t2)
    assert near >= far - 1e-12 * max(1.0, omega_eval(m, t2 + tau))


@pytest.mark.parametrize(
    "rate",
    [
        ZeroRate(),
        ConstantRate(c=0.05),
        PiecewiseLinearRate(breakpoints=((0, 0.1), (0.5, 0.3), (2, 0.4))),
    ],
)
def test_psi_integral_is_nondecreasing_and_convex(rate):
    values = np.array([psi_integral(rate, float(t)) for t in np.linspace(0.0, 4.0, 81)])
    assert np.all(np.diff(values) >= -1e-15)
    assert np.all(np.diff(values, n=2) >= -1e-12)
