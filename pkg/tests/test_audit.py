"""Tests for the sampling checks and the run-level bound audits."""

import math

import numpy as np
import pytest

from src.audit.bounds import (
    audit_ball_containment,
    audit_error_bound,
    audit_inverse_bound,
    audit_residual_estimate,
    oracle_solution,
    probe_uniqueness,
)
from src.audit.sampling import sample_nested_pairs, sample_pairs
from src.audit.smoothness import (
    H_NOTE,
    check_norm_regularity,
    check_psi_condition,
    check_regular_smoothness,
)
from src.corpus.problems import corpus_entry, corpus_get
from src.operators.linalg import NormChoice
from src.operators.problem import precondition
from src.scalar.moduli import HoelderModulus, LipschitzModulus
from src.solver.newton import solve_certified, solve_picard
from src.solver.records import SolveStatus

SAMPLES = 10_000
SEED = 0xC0FFEE


def _declared(pp):
    problem = pp.base
    return problem.declared_modulus, problem.declared_h


def test_sampling_is_seeded_and_stays_in_ball():
    center = np.array([0.6, 0.6])
    first_a, second_a = sample_pairs(center, 0.5, 500, NormChoice.EUCLIDEAN, np.random.default_rng(7))
    first_b, second_b = sample_pairs(center, 0.5, 500, NormChoice.EUCLIDEAN, np.random.default_rng(7))
    np.testing.assert_array_equal(first_a, first_b)
    np.testing.assert_array_equal(second_a, second_b)
    assert np.all(np.linalg.norm(first_a - center, axis=1) <= 0.5)
    assert np.all(np.abs(second_a - center).max(axis=1) <= 0.5)


def test_nested_pairs_stay_in_their_radius():
    center = np.zeros(3)
    radii, first, second = sample_nested_pairs(center, 2.0, 300, NormChoice.MAX_ABS, np.random.default_rng(1))
    assert np.all(radii <= 2.0)
    assert np.all(np.abs(first).max(axis=1) <= radii + 1e-15)
    assert np.all(np.abs(second).max(axis=1) <= radii + 1e-15)


@pytest.mark.parametrize("name", ["scalar_sqrt2_smooth", "scalar_sqrt2_kink", "system_2d_kink", "hoelder_scalar"])
def test_correct_declarations_show_no_violations(name):
    pp = precondition(corpus_get(name))
    m, h = _declared(pp)
    smoothness = check_regular_smoothness(pp, m, h, SAMPLES, SEED)
    assert smoothness.passed, smoothness.to_dict()["listed_violations"]
    assert check_norm_regularity(pp, m, h, SAMPLES, SEED).passed
    psi = check_psi_condition(pp, pp.base.declared_psi, SAMPLES, SEED)
    assert psi.passed, psi.to_dict()["listed_violations"]


def test_halved_constant_is_falsified():
    pp = precondition(corpus_get("scalar_sqrt2_smooth", {"K": 1.0 / 3.0}))
    report = check_regular_smoothness(pp, *_declared(pp), SAMPLES, SEED)
    assert not report.passed
    assert len(report.violations) >= 1
    assert report.max_deficit > 0.0
    listed = report.to_dict()["listed_violations"]
    assert 1 <= len(listed) <= 10
    assert listed[0]["condition"] == "regular_smoothness"


def test_halved_psi_is_falsified():
    entry = corpus_entry("scalar_sqrt2_kink")
    declared = entry.problem.declared_psi.c
    pp = precondition(corpus_get("scalar_sqrt2_kink", {"psi": declared / 2.0}))
    report = check_psi_condition(pp, pp.base.declared_psi, SAMPLES, SEED)
    assert not report.passed
    assert {v.condition for v in report.violations} <= {"psi_rate", "psi_integral"}


def test_lipschitz_declaration_cannot_cover_hoelder_problem():
    problem = corpus_get("hoelder_scalar")
    for K in (0.5, 1.0, 2.0, 3.0):
        pp = precondition(problem.with_declarations(modulus=LipschitzModulus(K=K)))
        report = check_regular_smoothness(pp, pp.base.declared_modulus, pp.base.declared_h, SAMPLES, SEED)
        assert not report.passed, K


def test_large_lipschitz_constant_fails_certificate_on_hoelder_problem():
    problem = corpus_get("hoelder_scalar").with_declarations(modulus=LipschitzModulus(K=4.0))
    result = solve_certified(precondition(problem))
    assert result.status is SolveStatus.CERTIFICATE_FAILED


def test_declared_h_above_infimum_is_reported():
    pp = precondition(corpus_get("scalar_sqrt2_smooth").with_declarations(h=0.9))
    report = check_regular_smoothness(pp, pp.base.declared_modulus, 0.9, 2_000, SEED)
    assert report.h_invalid_pairs > 0
    assert not report.passed
    assert report.to_dict()["h_diagnostic"] == H_NOTE


def test_zero_samples_skip_the_check(sqrt2_smooth):
    report = check_regular_smoothness(sqrt2_smooth, *_declared(sqrt2_smooth), 0, SEED)
    assert report.skipped
    assert report.passed
    assert report.to_dict()["max_deficit"] is None


def test_same_seed_same_report(sqrt2_kink):
    first = check_psi_condition(sqrt2_kink, sqrt2_kink.base.declared_psi, 1_000, 11).to_dict()
    second = check_psi_condition(sqrt2_kink, sqrt2_kink.base.declared_psi, 1_000, 11).to_dict()
    assert first == second


@pytest.mark.parametrize("name", ["scalar_sqrt2_kink", "system_2d_kink"])
def test_certified_runs_respect_every_bound(name):
    entry = corpus_entry(name)
    pp = precondition(entry.problem)
    result = solve_certified(pp)
    assert result.status is SolveStatus.CONVERGED
    assert result.iterations <= 50
    assert result.final_residual <= 1e-10
    assert all(step.bound_ok for step in result.steps)

    oracle = oracle_solution(pp, bracket=entry.bracket)
    assert audit_error_bound(pp, result, oracle).passed
    assert audit_residual_estimate(pp, result).passed
    assert audit_inverse_bound(pp, result).passed

    picard = solve_picard(pp)
    assert picard.status is SolveStatus.CONVERGED
    assert all(step.bound_ok for step in picard.steps)
    assert pp.norm(picard.final_x - result.final_x) <= 2.0 * result.tol

    t_star = result.certificate.t_star
    for run in (result, picard):
        containment = audit_ball_containment(run)
        assert not containment.skipped
        assert containment.passed, containment.to_dict()
        for step in run.steps:
            assert step.distance_from_start <= step.t_n + 1e-10
            assert step.t_n <= t_star + 1e-12

    probe = probe_uniqueness(pp, result.certificate.t_star)
    assert probe.passed, probe.failures
    assert probe.spread <= 1e-8


def test_hoelder_problem_certifies_with_hoelder_modulus():
    entry = corpus_entry("hoelder_scalar")
    pp = precondition(entry.problem)
    assert isinstance(pp.base.declared_modulus, HoelderModulus)
    result = solve_certified(pp)
    assert result.status is SolveStatus.CONVERGED
    assert all(step.bound_ok for step in result.steps)
    oracle = oracle_solution(pp, bracket=entry.bracket)
    assert audit_error_bound(pp, result, oracle).passed
    assert audit_residual_estimate(pp, result).passed


def test_residual_audit_catches_underdeclared_constant():
    pp = precondition(corpus_get("scalar_sqrt2_smooth", {"K": 1.0 / 3.0}))
    result = solve_certified(pp)
    report = audit_residual_estimate(pp, result)
    assert 1 in report.violations
    assert report.to_dict()["passed"] is False


def test_residual_audit_is_newton_only(sqrt2_smooth):
    with pytest.raises(ValueError):
        audit_residual_estimate(sqrt2_smooth, solve_picard(sqrt2_smooth))


def test_error_bound_audit_skips_without_oracle(sqrt2_smooth):
    report = audit_error_bound(sqrt2_smooth, solve_certified(sqrt2_smooth), None)
    assert report.skipped
    assert report.passed
    assert report.to_dict()["skipped_reason"] == "oracle unavailable"


def test_oracle_uses_bisection_bracket(sqrt2_smooth):
    root = oracle_solution(sqrt2_smooth, bracket=(1.0, 2.0))
    assert root[0] == pytest.approx(math.sqrt(2.0), abs=1e-14)
    newton_only = oracle_solution(sqrt2_smooth)
    assert newton_only[0] == pytest.approx(root[0], abs=1e-12)


@pytest.mark.parametrize("name", ["scalar_sqrt2_smooth", "system_2d_kink"])
def test_raising_h_keeps_a_passing_check_passing(name):
    pp = precondition(corpus_get(name))
    previous = None
    for h in (0.0, 0.2, 0.4, 0.6):
        report = check_regular_smoothness(pp, pp.base.declared_modulus, h, 2_000, SEED)
        assert report.h_invalid_pairs == 0, h
        assert report.passed, (h, report.to_dict()["listed_violations"])
        if previous is not None:
            assert len(report.violations) <= previous
        previous = len(report.violations)


def test_ball_containment_skips_uncertified_runs():
    pp = precondition(corpus_get("scalar_sqrt2_smooth", {"x0": 1.0}))
    report = audit_ball_containment(solve_certified(pp, force=True))
    assert report.skipped
    assert report.passed
    assert report.to_dict()["skipped_reason"] == "run is not certified"
