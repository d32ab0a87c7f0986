"""
Audits of a finished run against its certified bounds.

All checks here take a SolveResult. Most recompute quantities independently
of the solver: the linearization residual of every Newton step, the distance
of every iterate to an independent reference root, the norm of the inverse
Jacobian along the path, and uniqueness of the root near x₀. Ball
containment reads the distances to x₀ recorded with each step.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from loguru import logger
from scipy import optimize

from src.errors import DomainExitError, OracleUnavailableError, SingularJacobianError
from src.operators.problem import PreconditionedProblem
from src.scalar.majorant import MajorantConfig, audit_slack
from src.scalar.moduli import omega_integral, psi_integral
from src.solver.newton import DEFAULT_MAX_ITER, newton_iterate
from src.solver.records import SolveResult

ORACLE_TOL = 1e-14
ORACLE_MAX_DIM = 16
ORACLE_AGREEMENT = 1e-12
PROBE_POINTS = 8
PROBE_TOL = 1e-12
PROBE_AGREEMENT = 1e-8


@dataclass
class ResidualAuditReport:
    """Linearization residual r(x_{n−1}, x_n) against its majorant bound, per step."""
    steps: list[int] = field(default_factory=list)
    measured: list[float] = field(default_factory=list)
    rhs: list[float] = field(default_factory=list)
    tolerance: float = 0.0

    @property
    def slacks(self) -> list[float]:
        return [b - m for m, b in zip(self.measured, self.rhs)]

    @property
    def worst_slack(self) -> float:
        return min(self.slacks, default=math.inf)

    @property
    def violations(self) -> list[int]:
        return [n for n, s in zip(self.steps, self.slacks) if s < -self.tolerance]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "check": "linearization_residual",
            "passed": self.passed,
            "skipped": False,
            "steps": len(self.steps),
            "violations": len(self.violations),
            "violating_steps": self.violations,
            "worst_slack": self.worst_slack if self.steps else None,
            "max_deficit": -self.worst_slack if self.steps else None,
            "tolerance": self.tolerance,
        }


@dataclass
class BoundAuditReport:
    """Measured quantity against its bound at every iterate."""
    check: str
    measured: list[float] = field(default_factory=list)
    bounds: list[float] = field(default_factory=list)
    tolerance: float = 0.0
    skipped_reason: str | None = None

    @property
    def skipped(self) -> bool:
        return self.skipped_reason is not None

    @property
    def violations(self) -> list[int]:
        return [
            n for n, (m, b) in enumerate(zip(self.measured, self.bounds))
            if not m <= b + self.tolerance
        ]

    @property
    def worst_slack(self) -> float:
        return min((b - m for m, b in zip(self.measured, self.bounds)), default=math.inf)

    @property
    def passed(self) -> bool:
        return self.skipped or not self.violations

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "passed": self.passed,
            "skipped": self.skipped,
            "skipped_reason": self.skipped_reason,
            "iterates": len(self.measured),
            "violations": len(self.violations),
            "violating_steps": self.violations,
            "max_deficit": -self.worst_slack if self.measured else None,
            "tolerance": self.tolerance,
        }


@dataclass
class UniquenessReport:
    """Newton runs started on the sphere ‖x − x₀‖ = t*."""
    radius: float
    starts: list[np.ndarray] = field(default_factory=list)
    roots: list[np.ndarray | None] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    agreement: float = PROBE_AGREEMENT
    failures: list[str] = field(default_factory=list)

    @property
    def spread(self) -> float:
        found = [r for r in self.roots if r is not None]
        if len(found) < 2:
            return 0.0
        stacked = np.vstack(found)
        return float(np.max(np.abs(stacked - stacked[0])))

    @property
    def passed(self) -> bool:
        return not self.failures and self.spread <= self.agreement

    def to_dict(self) -> dict:
        return {
            "check": "uniqueness_probe",
            "passed": self.passed,
            "skipped": False,
            "points": len(self.starts),
            "radius": self.radius,
            "spread": self.spread,
            "violations": len(self.failures) + (0 if self.spread <= self.agreement else 1),
            "failures": self.failures,
        }


def audit_residual_estimate(
    pp: PreconditionedProblem,
    result: SolveResult,
    cfg: MajorantConfig | None = None,
) -> ResidualAuditReport:
    """
    Check ‖F(x_n) − F(x_{n−1}) − F′(x_{n−1})(x_n − x_{n−1})‖
    ≤ a − Ω(χ) + Ω(χ − t_n) − t_n·h + Ψ(t_{n−1}) at every Newton step.

    Raises:
        ValueError: result does not come from the Newton process
    """
    if result.method != "newton":
        raise ValueError("linearization residual audit applies to Newton runs only")
    cfg = cfg or pp.majorant_config()
    report = ResidualAuditReport(tolerance=audit_slack(cfg.a))
    iterates = result.iterates()
    ts = result.majorant.t
    omega_chi = omega_integral(cfg.modulus, cfg.chi)

    for n in range(1, min(len(iterates), len(ts))):
        t_n, t_prev = ts[n], ts[n - 1]
        if not (math.isfinite(t_n) and 0.0 <= t_n <= cfg.chi):
            break
        x_prev, x_n = iterates[n - 1], iterates[n]
        linearization = pp.F(x_n) - pp.F(x_prev) - pp.F_prime(x_prev) @ (x_n - x_prev)
        bound = (
            cfg.a
            - omega_chi
            + omega_integral(cfg.modulus, cfg.chi - t_n)
            - t_n * cfg.h
            + psi_integral(cfg.psi, t_prev)
        )
        report.steps.append(n)
        report.measured.append(pp.norm(linearization))
        report.rhs.append(bound)

    if not report.passed:
        logger.warning("{}: linearization residual bound violated at steps {}", pp.name, report.violations)
    return report


def audit_error_bound(
    pp: PreconditionedProblem,
    result: SolveResult,
    oracle: np.ndarray | None,
) -> BoundAuditReport:
    """‖x_oracle − x_n‖ ≤ t* − t_n + slack at every iterate (Newton or Picard)."""
    t_star = result.certificate.t_star
    report = BoundAuditReport(check="error_bound", tolerance=audit_slack(t_star))
    if oracle is None:
        report.skipped_reason = "oracle unavailable"
        return report
    if not (result.certified and math.isfinite(t_star)):
        report.skipped_reason = "run is not certified"
        return report

    for x_n, t_n in zip(result.iterates(), result.majorant.t):
        report.measured.append(pp.norm(oracle - x_n))
        report.bounds.append(t_star - t_n)
    return report


def audit_ball_containment(result: SolveResult) -> BoundAuditReport:
    """
    ‖x_n − x₀‖ ≤ min(t_n, t*) + slack at every recorded iterate.

    Applies to Newton and Picard runs alike.
    """
    t_star = result.certificate.t_star
    report = BoundAuditReport(check="ball_containment", tolerance=audit_slack(t_star))
    if not (result.certified and math.isfinite(t_star)):
        report.skipped_reason = "run is not certified"
        return report

    for step in result.steps:
        report.measured.append(step.distance_from_start)
        report.bounds.append(min(step.t_n, t_star))
    return report


def audit_inverse_bound(pp: PreconditionedProblem, result: SolveResult) -> BoundAuditReport:
    """Measured ‖F′(x_n)⁻¹‖ against the Neumann bound recorded at each step."""
    report = BoundAuditReport(
        check="inverse_bound", tolerance=audit_slack(result.certificate.t_star)
    )
    if result.method != "newton":
        report.skipped_reason = "inverse bound applies to Newton runs only"
        return report
    if pp.dim > ORACLE_MAX_DIM:
        report.skipped_reason = f"dimension {pp.dim} above {ORACLE_MAX_DIM}"
        return report

    for step in result.steps:
        if not math.isfinite(step.jacobian_inverse_bound):
            continue
        inverse = np.linalg.inv(pp.F_prime(step.x))
        report.measured.append(pp.operator_norm(inverse))
        report.bounds.append(step.jacobian_inverse_bound)
    return report


def _sphere_directions(pp: PreconditionedProblem, count: int) -> list[np.ndarray]:
    if pp.dim == 1:
        return [np.array([1.0 if k % 2 == 0 else -1.0]) for k in range(count)]
    rng = np.random.default_rng(0)
    directions = []
    for _ in range(count):
        v = rng.standard_normal(pp.dim)
        directions.append(v / pp.norm(v))
    return directions


def probe_uniqueness(
    pp: PreconditionedProblem,
    t_star: float,
    count: int = PROBE_POINTS,
    tol: float = PROBE_TOL,
    agreement: float = PROBE_AGREEMENT,
) -> UniquenessReport:
    """
    Start Newton from ``count`` deterministic points with ‖x − x₀‖ = t*.

    All runs must reach residual ``tol`` and land within ``agreement`` of
    each other.
    """
    report = UniquenessReport(radius=t_star, agreement=agreement)
    for k, direction in enumerate(_sphere_directions(pp, count)):
        start = pp.x0 + t_star * direction
        report.starts.append(start)
        try:
            root, residual, _ = newton_iterate(pp, start, tol=tol)
        except (DomainExitError, SingularJacobianError) as exc:
            report.roots.append(None)
            report.residuals.append(math.nan)
            report.failures.append(f"start {k}: {exc}")
            continue
        report.roots.append(root)
        report.residuals.append(residual)
        if residual > tol:
            report.failures.append(f"start {k}: residual {residual:.3e} above {tol:.1e}")
    return report


def oracle_solution(
    pp: PreconditionedProblem,
    tol: float = ORACLE_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    bracket: tuple[float, float] | None = None,
) -> np.ndarray:
    """
    Reference root for the error-bound audit.

    Newton from x₀ to ``tol`` with 4·max_iter iterations; for scalar problems
    with a sign bracket inside the domain, bisection on the residual gives
    the returned root and Newton must agree with it to 1e-12.

    Raises:
        ValueError: dimension above 16
        OracleUnavailableError: neither method reaches the tolerance
    """
    if pp.dim > ORACLE_MAX_DIM:
        raise ValueError(f"oracle limited to dimension {ORACLE_MAX_DIM}, got {pp.dim}")

    newton_root = None
    try:
        x, residual, _ = newton_iterate(pp, pp.x0, tol=tol, max_iter=4 * max_iter)
        if residual <= tol:
            newton_root = x
    except (DomainExitError, SingularJacobianError) as exc:
        logger.warning("{}: oracle Newton failed: {}", pp.name, exc)

    if pp.dim == 1 and bracket is not None:
        x0 = float(pp.x0[0])
        lo = max(float(bracket[0]), x0 - pp.domain_radius)
        hi = min(float(bracket[1]), x0 + pp.domain_radius)

        def scalar_residual(s: float) -> float:
            return float(pp.residual(np.array([s]))[0])

        if lo < hi and scalar_residual(lo) * scalar_residual(hi) < 0.0:
            root = optimize.bisect(
                scalar_residual, lo, hi, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=200
            )
            bisection_root = np.array([float(root)])
            if newton_root is not None:
                gap = float(abs(newton_root[0] - bisection_root[0]))
                if gap > ORACLE_AGREEMENT:
                    raise OracleUnavailableError(
                        f"{pp.name}: Newton and bisection roots differ by {gap:.3e}"
                    )
            return bisection_root

    if newton_root is None:
        raise OracleUnavailableError(f"{pp.name}: Newton did not reach residual {tol:.1e}")
    return newton_root
