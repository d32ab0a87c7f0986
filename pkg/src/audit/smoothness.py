"""
Sampling checks for the declared smoothness hypotheses.

Each check draws seeded pairs in the domain ball, evaluates both sides of
one inequality and records every pair where the left side exceeds the right
by more than the tolerance. A clean report only says the declarations are
consistent with the samples drawn.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from loguru import logger

from src.audit.sampling import DEFAULT_SEED, sample_nested_pairs, sample_pairs
from src.errors import ModulusRangeError
from src.operators.problem import PreconditionedProblem
from src.scalar.moduli import Modulus, PsiRate, omega_eval, omega_inverse, psi_eval, psi_integral

VIOLATION_TOL = 1e-10
H_ROUNDING = 1e-12
LISTED_VIOLATIONS = 10

SAMPLING_NOTE = (
    "Sampling can falsify but never prove a hypothesis; a clean report means "
    "the declarations are consistent with {pairs} sampled pairs only."
)
H_NOTE = "declared h exceeds sampled h(f)"


@dataclass(frozen=True)
class SampleViolation:
    """One sampled pair where the checked inequality fails."""
    index: int
    x_prime: tuple[float, ...]
    x_second: tuple[float, ...]
    lhs: float
    rhs: float
    deficit: float
    condition: str

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "x_prime": list(self.x_prime),
            "x_second": list(self.x_second),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "deficit": self.deficit,
            "condition": self.condition,
        }


@dataclass
class SampleCheckReport:
    """Outcome of one sampling check."""
    check: str
    pairs_checked: int
    seed: int
    tolerance: float = VIOLATION_TOL
    violations: list[SampleViolation] = field(default_factory=list)
    max_deficit: float = -math.inf
    skipped: bool = False
    h_used: float | None = None
    h_invalid_pairs: int = 0

    @property
    def note(self) -> str:
        if self.skipped:
            return "skipped: no samples requested"
        return SAMPLING_NOTE.format(pairs=self.pairs_checked)

    @property
    def passed(self) -> bool:
        return self.skipped or (not self.violations and self.h_invalid_pairs == 0)

    def _record(self, index: int, x1, x2, lhs: float, rhs: float, condition: str):
        deficit = lhs - rhs if math.isfinite(rhs) else math.inf
        self.max_deficit = max(self.max_deficit, deficit)
        if deficit > self.tolerance:
            self.violations.append(
                SampleViolation(
                    index=index,
                    x_prime=tuple(float(v) for v in x1),
                    x_second=tuple(float(v) for v in x2),
                    lhs=float(lhs),
                    rhs=float(rhs),
                    deficit=float(deficit),
                    condition=condition,
                )
            )

    def to_dict(self) -> dict:
        payload = {
            "check": self.check,
            "passed": self.passed,
            "skipped": self.skipped,
            "pairs_checked": self.pairs_checked,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "violations": len(self.violations),
            "max_deficit": self.max_deficit if self.pairs_checked else None,
            "listed_violations": [v.to_dict() for v in self.violations[:LISTED_VIOLATIONS]],
            "note": self.note,
        }
        if self.h_used is not None:
            payload["h_used"] = self.h_used
            payload["h_invalid_pairs"] = self.h_invalid_pairs
            if self.h_invalid_pairs:
                payload["h_diagnostic"] = H_NOTE
        return payload


@dataclass
class SmoothnessSampleReport(SampleCheckReport):
    """Regular-smoothness report, with the observed ξ values."""
    xi_values: list[float] = field(default_factory=list)
    xi_bound_violations: int = 0

    @property
    def passed(self) -> bool:
        return super().passed and self.xi_bound_violations == 0

    @property
    def xi_summary(self) -> dict:
        if not self.xi_values:
            return {"min": None, "max": None, "mean": None}
        values = np.asarray(self.xi_values)
        return {"min": float(values.min()), "max": float(values.max()), "mean": float(values.mean())}

    def to_dict(self) -> dict:
        payload = super().to_dict()
        payload["xi"] = self.xi_summary
        payload["xi_bound_violations"] = self.xi_bound_violations
        return payload


def _h_offset(n_value: float, h: float) -> float | None:
    """‖F′‖ − h, clipped at 0 for rounding; None when genuinely negative."""
    offset = n_value - h
    if offset < -H_ROUNDING * max(1.0, h):
        return None
    return max(offset, 0.0)


def check_regular_smoothness(
    pp: PreconditionedProblem,
    m: Modulus,
    h: float,
    sample_count: int,
    seed: int = DEFAULT_SEED,
) -> SmoothnessSampleReport:
    """
    Sample the regular-smoothness inequality

        ‖F′(x″) − F′(x′)‖ ≤ ω(ξ + ‖x″ − x′‖) − ω(ξ),  ξ = ω⁻¹(min{‖F′(x′)‖, ‖F′(x″)‖} − h).

    Also asserts ξ ≥ ω⁻¹(‖F′(x′)‖ − h) − ‖x″ − x′‖ at every pair.

    Args:
        pp: Preconditioned problem (its norm is used throughout)
        m: Declared modulus
        h: Declared offset
        sample_count: Number of pairs; 0 skips the check
        seed: Sampler seed

    Returns:
        Report with violations, h-invalid pairs and ξ statistics
    """
    report = SmoothnessSampleReport(
        check="regular_smoothness", pairs_checked=sample_count, seed=seed, h_used=h
    )
    if sample_count == 0:
        report.skipped = True
        return report

    rng = np.random.default_rng(seed)
    first, second = sample_pairs(pp.x0, pp.domain_radius, sample_count, pp.base.norm, rng)
    for i, (x1, x2) in enumerate(zip(first, second)):
        j1, j2 = pp.F_prime(x1), pp.F_prime(x2)
        n1, n2 = pp.operator_norm(j1), pp.operator_norm(j2)
        h_f = _h_offset(min(n1, n2), h)
        if h_f is None:
            report.h_invalid_pairs += 1
            continue
        distance = pp.norm(x2 - x1)
        lhs = pp.operator_norm(j2 - j1)
        try:
            xi = omega_inverse(m, h_f)
            rhs = omega_eval(m, xi + distance) - omega_eval(m, xi)
            xi_floor = omega_inverse(m, _h_offset(n1, h)) - distance
        except ModulusRangeError:
            report._record(i, x1, x2, lhs, math.nan, "regular_smoothness")
            continue
        report.xi_values.append(xi)
        if xi + report.tolerance < xi_floor:
            report.xi_bound_violations += 1
        report._record(i, x1, x2, lhs, rhs, "regular_smoothness")

    if not report.passed:
        logger.warning(
            "{}: regular smoothness falsified ({} violations, {} h-invalid pairs)",
            pp.name, len(report.violations), report.h_invalid_pairs,
        )
    return report


def check_norm_regularity(
    pp: PreconditionedProblem,
    m: Modulus,
    h: float,
    sample_count: int,
    seed: int = DEFAULT_SEED,
) -> SampleCheckReport:
    """
    Sample |ω⁻¹(‖F′(x″)‖ − h) − ω⁻¹(‖F′(x′)‖ − h)| ≤ ‖x″ − x′‖.

    A necessary consequence of regular smoothness and a cheaper screen.
    """
    report = SampleCheckReport(check="norm_regularity", pairs_checked=sample_count, seed=seed, h_used=h)
    if sample_count == 0:
        report.skipped = True
        return report

    rng = np.random.default_rng(seed)
    first, second = sample_pairs(pp.x0, pp.domain_radius, sample_count, pp.base.norm, rng)
    for i, (x1, x2) in enumerate(zip(first, second)):
        s1 = _h_offset(pp.operator_norm(pp.F_prime(x1)), h)
        s2 = _h_offset(pp.operator_norm(pp.F_prime(x2)), h)
        if s1 is None or s2 is None:
            report.h_invalid_pairs += 1
            continue
        distance = pp.norm(x2 - x1)
        try:
            lhs = abs(omega_inverse(m, s2) - omega_inverse(m, s1))
        except ModulusRangeError:
            report._record(i, x1, x2, math.inf, distance, "norm_regularity")
            continue
        report._record(i, x1, x2, lhs, distance, "norm_regularity")
    return report


def check_psi_condition(
    pp: PreconditionedProblem,
    p: PsiRate,
    sample_count: int,
    seed: int = DEFAULT_SEED,
) -> SampleCheckReport:
    """
    Sample both forms of the rate condition on G for pairs in B(x₀, t):

        ‖G(x″) − G(x′)‖ ≤ ψ(t)·‖x″ − x′‖
        ‖G(x″) − G(x′)‖ ≤ Ψ(t + ‖x″ − x′‖) − Ψ(t)

    with t uniform in [0, R].
    """
    report = SampleCheckReport(check="psi_condition", pairs_checked=sample_count, seed=seed)
    if sample_count == 0:
        report.skipped = True
        return report

    rng = np.random.default_rng(seed)
    radii, first, second = sample_nested_pairs(
        pp.x0, pp.domain_radius, sample_count, pp.base.norm, rng
    )
    for i, (t, x1, x2) in enumerate(zip(radii, first, second)):
        lhs = pp.norm(pp.G(x2) - pp.G(x1))
        distance = pp.norm(x2 - x1)
        rate_rhs = psi_eval(p, t) * distance
        integral_rhs = psi_integral(p, t + distance) - psi_integral(p, t)
        if lhs - rate_rhs >= lhs - integral_rhs:
            report._record(i, x1, x2, lhs, rate_rhs, "psi_rate")
        else:
            report._record(i, x1, x2, lhs, integral_rhs, "psi_integral")

    if not report.passed:
        logger.warning("{}: psi condition falsified ({} violations)", pp.name, len(report.violations))
    return report
