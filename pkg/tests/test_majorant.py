"""Tests for the scalar majorant engine."""

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from scipy import optimize

from src.errors import MajorantConfigError, MajorantDomainError, PreconditionError
from src.scalar.majorant import (
    MajorantConfig,
    check_conditions,
    check_step_map_monotone,
    d_prime,
    find_t_star,
    kantorovich_t_star,
    next_rho,
    next_t,
    next_t_newton_form,
    phi_h,
    residual_identity_check,
    run_majorant,
    run_rho_majorant,
    w_eval,
)
from src.scalar.moduli import (
    ConstantRate,
    HoelderModulus,
    LipschitzModulus,
    PiecewiseLinearConcaveModulus,
)

EXPECTED_T_STAR = 1.0 - math.sqrt(0.4)


def test_chi_is_derived(lipschitz_config):
    assert lipschitz_config.chi == pytest.approx(1.0)
    cfg = MajorantConfig(a=0.1, h=0.2, modulus=HoelderModulus(L=1.0, alpha=0.5))
    assert cfg.chi == pytest.approx(0.64)


def test_phi_and_w_values(lipschitz_config):
    assert phi_h(lipschitz_config, 0.3) == pytest.approx(0.045)
    assert w_eval(lipschitz_config, 0.0) == pytest.approx(0.3)
    with pytest.raises(MajorantDomainError):
        phi_h(lipschitz_config, 1.5)


def test_recurrence_values(lipschitz_config):
    assert next_t(lipschitz_config, 0.0) == pytest.approx(0.3)
    assert next_t(lipschitz_config, 0.3) == pytest.approx(0.364286, abs=1e-6)
    assert next_t_newton_form(lipschitz_config, 0.3) == pytest.approx(next_t(lipschitz_config, 0.3))
    assert next_rho(lipschitz_config, 0.3) == pytest.approx(0.345)
    with pytest.raises(MajorantDomainError):
        next_t(lipschitz_config, 1.0)


def test_certificate_for_lipschitz_example(lipschitz_config):
    certificate = check_conditions(lipschitz_config)
    assert certificate.passed
    assert certificate.failure_reason is None
    assert certificate.t_star == pytest.approx(EXPECTED_T_STAR, rel=1e-12)
    assert certificate.t_star == pytest.approx(kantorovich_t_star(1.0, 0.3), rel=1e-12)
    assert certificate.majorant_condition_slack == pytest.approx(0.2)


def test_condition_is_strict():
    cfg = MajorantConfig(a=0.5, h=0.0, modulus=LipschitzModulus(K=1.0))
    certificate = check_conditions(cfg)
    assert not certificate.majorant_condition_holds
    assert not certificate.passed
    assert certificate.failure_reason.startswith("majorant condition violated")
    with pytest.raises(PreconditionError):
        find_t_star(cfg)


def test_ball_radius_check(lipschitz_config):
    certificate = check_conditions(lipschitz_config, domain_radius=0.2)
    assert certificate.majorant_condition_holds
    assert not certificate.ball_radius_ok
    assert "exceeds domain radius" in certificate.failure_reason


def test_psi_shrinks_the_admissible_residual():
    cfg = MajorantConfig(a=0.1, h=0.0, modulus=LipschitzModulus(K=1.0), psi=ConstantRate(c=0.2))
    assert cfg.condition_rhs == pytest.approx(0.3)
    certificate = check_conditions(cfg)
    assert certificate.t_star == pytest.approx(0.8 - math.sqrt(0.44), rel=1e-10)


def test_invalid_configs():
    with pytest.raises(MajorantConfigError):
        MajorantConfig(a=0.0, h=0.0, modulus=LipschitzModulus(K=1.0))
    with pytest.raises(MajorantConfigError):
        MajorantConfig(a=0.1, h=1.0, modulus=LipschitzModulus(K=1.0))
    # ω never reaches 1 − h
    short = PiecewiseLinearConcaveModulus(breakpoints=((0, 0), (1, 0.5)))
    with pytest.raises(MajorantConfigError):
        MajorantConfig(a=0.1, h=0.0, modulus=short)


def test_trace_converges_to_t_star(lipschitz_config):
    trace = run_majorant(lipschitz_config)
    assert trace.converged
    assert trace.t[:3] == pytest.approx([0.0, 0.3, 0.364286], abs=1e-6)
    assert trace.limit == pytest.approx(trace.t_star, abs=1e-11)
    assert all(b > a for a, b in zip(trace.t, trace.t[1:]))


def test_rho_trace_converges_to_same_limit(lipschitz_config):
    trace = run_rho_majorant(lipschitz_config)
    assert trace.converged
    assert trace.kind == "picard"
    assert trace.t[:3] == pytest.approx([0.0, 0.3, 0.345])
    assert trace.limit == pytest.approx(EXPECTED_T_STAR, abs=1e-10)
    assert all(a <= b for a, b in zip(trace.t, trace.t[1:]))
    assert max(trace.t) <= EXPECTED_T_STAR + 1e-12


def test_identity_holds_along_trace():
    cfg = MajorantConfig(
        a=0.1, h=0.2, modulus=HoelderModulus(L=1.0, alpha=0.5), psi=ConstantRate(c=0.05)
    )
    trace = run_majorant(cfg)
    report = residual_identity_check(cfg, trace)
    assert report.ok, report.worst_deviation
    assert len(report.deviations) == trace.iterations


def test_identity_detects_foreign_trace(lipschitz_config):
    other = MajorantConfig(a=0.2, h=0.0, modulus=LipschitzModulus(K=1.0))
    report = residual_identity_check(lipschitz_config, run_majorant(other))
    assert not report.ok
    assert report.worst_deviation == pytest.approx(0.1)


def test_step_map_is_monotone(lipschitz_config):
    certificate = check_conditions(lipschitz_config)
    assert check_step_map_monotone(lipschitz_config, certificate.t_star)


def test_kantorovich_closed_form_limits():
    assert math.isnan(kantorovich_t_star(1.0, 0.5))
    assert kantorovich_t_star(2.0, 0.1) == pytest.approx((1.0 - math.sqrt(0.6)) / 2.0)


@seed(3)
@settings(max_examples=60, deadline=None)
@given(
    K=st.floats(min_value=0.1, max_value=10.0),
    fraction=st.floats(min_value=0.05, max_value=0.95),
)
def test_lipschitz_trace_matches_closed_form(K, fraction):
    a = fraction / (2.0 * K)
    cfg = MajorantConfig(a=a, h=0.0, modulus=LipschitzModulus(K=K))
    certificate = check_conditions(cfg)
    assert certificate.passed
    expected = kantorovich_t_star(K, a)
    assert certificate.t_star == pytest.approx(expected, rel=1e-9)
    trace = run_majorant(cfg)
    assert trace.limit <= certificate.t_star + 1e-12 * max(1.0, certificate.t_star)
    assert trace.limit == pytest.approx(expected, rel=1e-8)


@pytest.mark.parametrize("K", [0.5, 1.0, 2.0, 4.0])
@pytest.mark.parametrize("a_of_K", [lambda K: 0.05, lambda K: 0.1, lambda K: 0.2, lambda K: 0.4 / K * 0.999])
def test_classical_reduction_grid(K, a_of_K):
    a = a_of_K(K)
    if 2.0 * K * a >= 1.0:
        pytest.skip("outside the classical convergence region")
    cfg = MajorantConfig(a=a, h=0.0, modulus=LipschitzModulus(K=K))
    t_star = find_t_star(cfg)
    assert t_star == pytest.approx((1.0 - math.sqrt(1.0 - 2.0 * K * a)) / K, rel=1e-12)
    assert run_majorant(cfg).limit == pytest.approx(t_star, abs=1e-10)


SUITE_MODULI = [
    LipschitzModulus(K=1.0),
    LipschitzModulus(K=2.0),
    HoelderModulus(L=1.0, alpha=0.5),
    HoelderModulus(L=2.0, alpha=0.7),
]
SUITE_H = [0.0, 0.1, 0.3]
SUITE_PSI = [None, ConstantRate(c=0.05)]
SUITE = [
    (m, h, p)
    for m in SUITE_MODULI
    for h in SUITE_H
    for p in SUITE_PSI
][:20]


@pytest.mark.parametrize("modulus,h,psi", SUITE)
def test_majorant_suite(modulus, h, psi):
    extra = {} if psi is None else {"psi": psi}
    probe = MajorantConfig(a=1e-3, h=h, modulus=modulus, **extra)
    assert probe.condition_rhs > 0.0
    cfg = MajorantConfig(a=0.5 * probe.condition_rhs, h=h, modulus=modulus, **extra)

    certificate = check_conditions(cfg)
    assert certificate.passed
    trace = run_majorant(cfg, tol=1e-12, max_iter=500)
    assert trace.converged
    assert trace.iterations < 500
    assert all(b > a for a, b in zip(trace.t, trace.t[1:]))
    assert max(trace.t) <= certificate.t_star + 1e-12
    assert trace.limit == pytest.approx(certificate.t_star, abs=1e-9)
    assert residual_identity_check(cfg, trace, tol=1e-10).ok

    t_star = certificate.t_star
    assert abs(next_t(cfg, t_star) - t_star) <= 1e-10
    assert abs(next_rho(cfg, t_star) - t_star) <= 1e-10
    rho = run_rho_majorant(cfg)
    assert max(rho.t) <= t_star + 1e-12

    grid = [float(t) for t in np.linspace(0.0, cfg.chi, 41)]
    assert all(d_prime(cfg, t) >= 0.0 for t in grid)
    for s, u in zip(grid, grid[2:]):
        assert w_eval(cfg, 0.5 * (s + u)) <= 0.5 * (w_eval(cfg, s) + w_eval(cfg, u)) + 1e-12


def test_t_star_matches_brentq():
    cfg = MajorantConfig(
        a=0.05, h=0.1, modulus=HoelderModulus(L=1.5, alpha=0.6), psi=ConstantRate(c=0.02)
    )
    expected = optimize.brentq(lambda t: w_eval(cfg, t), 0.0, cfg.chi, xtol=1e-15)
    assert find_t_star(cfg) == pytest.approx(expected, abs=1e-13)


def test_concave_piecewise_modulus_certifies():
    kink = PiecewiseLinearConcaveModulus(breakpoints=((0, 0), (1, 2), (3, 3)))
    certificate = check_conditions(MajorantConfig(a=0.1, h=0.0, modulus=kink))
    assert certificate.modulus_valid
    assert certificate.modulus_failure is None
    assert certificate.passed


@pytest.mark.parametrize(
    "breakpoints,h,failure",
    [
        (((0, 0), (1, 0.5), (2, 2)), 0.0, "concavity violated"),
        (((0, 0), (1, 1), (2, 0.95)), 0.1, "monotonicity violated"),
    ],
)
def test_rejected_modulus_fails_certificate(breakpoints, h, failure):
    cfg = MajorantConfig(a=0.1, h=h, modulus=PiecewiseLinearConcaveModulus(breakpoints=breakpoints))
    certificate = check_conditions(cfg)
    # the scalar condition alone would pass
    assert certificate.majorant_condition_holds
    assert not certificate.modulus_valid
    assert certificate.modulus_failure.startswith(failure)
    assert not certificate.passed
    assert certificate.failure_reason.startswith(f"modulus rejected: {failure}")
    assert certificate.to_dict()["passed"] is False
