"""
Scalar majorant engine.

Everything here works on plain floats: the function W = Φ_h + Ψ whose zero
t* bounds the convergence ball, the Newton-type recurrence {t_n} that
dominates the operator iteration step by step, the Picard majorant {ρ_n},
and the certificate deciding whether an operator iteration may run at all.

t* is computed twice on purpose: by bisection for the certificate and by the
recurrence for the trace.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from loguru import logger
from scipy import optimize

from src.errors import MajorantConfigError, MajorantDomainError, ModulusRangeError, PreconditionError
from src.scalar.moduli import (
    Modulus,
    PsiRate,
    ZeroRate,
    omega_eval,
    omega_integral,
    omega_inverse,
    psi_eval,
    psi_integral,
    validate_modulus,
)

BISECTION_REL_WIDTH = 1e-14
TRACE_TOL = 1e-12
AUDIT_SLACK = 1e-10
IDENTITY_TOL = 1e-10
DEFAULT_TRACE_ITER = 500


def audit_slack(scale: float) -> float:
    """Slack 1e-10·max(1, scale) absorbing rounding in audited inequalities."""
    if not math.isfinite(scale):
        return AUDIT_SLACK
    return AUDIT_SLACK * max(1.0, abs(scale))


@dataclass(frozen=True)
class MajorantConfig:
    """
    Scalar data of one certification problem.

    ``a`` bounds the preconditioned residual at the starting point, ``h`` is
    the regular-smoothness offset, and χ = ω⁻¹(1 − h) is derived.
    """
    a: float
    h: float
    modulus: Modulus
    psi: PsiRate = field(default_factory=ZeroRate)
    chi: float = field(init=False)

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0.0):
            raise MajorantConfigError(f"a must be positive and finite, got {self.a!r}")
        if not (0.0 <= self.h < 1.0):
            raise MajorantConfigError(f"h must lie in [0, 1), got {self.h!r}")
        try:
            chi = omega_inverse(self.modulus, 1.0 - self.h)
        except ModulusRangeError as exc:
            raise MajorantConfigError(f"χ = ω⁻¹(1 − h) not computable: {exc}") from exc
        object.__setattr__(self, "chi", chi)
        if not math.isfinite(self.condition_rhs):
            raise MajorantConfigError("Ω(χ) + hχ − Ψ(χ) is not finite")

    @property
    def omega_chi(self) -> float:
        """Ω(χ)."""
        return omega_integral(self.modulus, self.chi)

    @property
    def psi_chi(self) -> float:
        """Ψ(χ)."""
        return psi_integral(self.psi, self.chi)

    @property
    def condition_rhs(self) -> float:
        """Ω(χ) + hχ − Ψ(χ), the quantity ``a`` must stay strictly below."""
        return self.omega_chi + self.h * self.chi - self.psi_chi

    def describe(self) -> dict:
        return {
            "a": self.a,
            "h": self.h,
            "chi": self.chi,
            "modulus": self.modulus.model_dump(mode="json"),
            "psi": self.psi.model_dump(mode="json"),
        }


@dataclass
class MajorantTrace:
    """The scalar sequence {t_n} (or {ρ_n}) with t₀ = 0."""
    t: list[float]
    t_star: float
    converged: bool
    chi: float
    kind: str = "newton"

    @property
    def iterations(self) -> int:
        return len(self.t) - 1

    @property
    def limit(self) -> float:
        return self.t[-1]

    def alpha(self, n: int) -> float:
        """α_n = χ − t_n."""
        return self.chi - self.t[n]

    def delta(self, n: int) -> float:
        """δ_n = t_{n+1} − t_n."""
        return self.t[n + 1] - self.t[n]


@dataclass(frozen=True)
class Certificate:
    """Machine-checked convergence hypotheses for one config."""
    a: float
    h: float
    chi: float
    omega_chi: float
    psi_chi: float
    majorant_condition_holds: bool
    majorant_condition_slack: float
    unique_zero_found: bool
    t_star: float
    ball_radius_ok: bool
    w_at_0: float
    w_at_chi: float
    domain_radius: float
    modulus_valid: bool = True
    modulus_failure: str | None = None

    @property
    def passed(self) -> bool:
        return (
            self.modulus_valid
            and self.majorant_condition_holds
            and self.unique_zero_found
            and self.ball_radius_ok
        )

    @property
    def failure_reason(self) -> str | None:
        if not self.modulus_valid:
            return f"modulus rejected: {self.modulus_failure}"
        if not self.majorant_condition_holds:
            return (
                "majorant condition violated: a < Ω(χ) + hχ − Ψ(χ) fails, "
                f"slack = {self.majorant_condition_slack:.17g}"
            )
        if not self.unique_zero_found:
            return "W has no zero in (0, χ)"
        if not self.ball_radius_ok:
            return f"t* = {self.t_star:.17g} exceeds domain radius {self.domain_radius:.17g}"
        return None

    def to_dict(self) -> dict:
        payload = asdict(self)
        payload["passed"] = self.passed
        payload["failure_reason"] = self.failure_reason
        return payload


def _check_interval(cfg: MajorantConfig, t: float) -> float:
    t = float(t)
    if not 0.0 <= t <= cfg.chi:
        raise MajorantDomainError(f"t={t!r} outside [0, χ={cfg.chi!r}]")
    return t


def phi_h(cfg: MajorantConfig, t: float) -> float:
    """Φ_h(t) = a − Ω(χ) + Ω(χ − t) − t·h on [0, χ]."""
    t = _check_interval(cfg, t)
    return (
        cfg.a
        - omega_integral(cfg.modulus, cfg.chi)
        + omega_integral(cfg.modulus, cfg.chi - t)
        - t * cfg.h
    )


def phi_h_prime(cfg: MajorantConfig, t: float) -> float:
    """Φ′_h(t) = −ω(χ − t) − h."""
    t = _check_interval(cfg, t)
    return -omega_eval(cfg.modulus, cfg.chi - t) - cfg.h


def w_eval(cfg: MajorantConfig, t: float) -> float:
    """W(t) = Φ_h(t) + Ψ(t)."""
    return phi_h(cfg, t) + psi_integral(cfg.psi, t)


def d_eval(cfg: MajorantConfig, t: float) -> float:
    """d(t) = t + W(t), the Picard majorant map."""
    return t + w_eval(cfg, t)


def d_prime(cfg: MajorantConfig, t: float) -> float:
    """d′(t) = ω(χ) − ω(χ − t) + ψ(t); nonnegative on [0, χ]."""
    t = _check_interval(cfg, t)
    return (
        omega_eval(cfg.modulus, cfg.chi)
        - omega_eval(cfg.modulus, cfg.chi - t)
        + psi_eval(cfg.psi, t)
    )


def find_t_star(cfg: MajorantConfig) -> float:
    """
    Locate the zero of W on [0, χ] by bisection.

    The bracket is valid whenever W(0) > 0 > W(χ); convexity of W then makes
    the zero unique.

    Raises:
        PreconditionError: W does not change sign on [0, χ]
    """
    w0 = w_eval(cfg, 0.0)
    w_chi = w_eval(cfg, cfg.chi)
    if not (w0 > 0.0 and w_chi < 0.0):
        raise PreconditionError(
            f"W has no sign change on [0, χ]: W(0)={w0!r}, W(χ)={w_chi!r}"
        )
    return float(
        optimize.bisect(
            lambda t: w_eval(cfg, t),
            0.0,
            cfg.chi,
            xtol=BISECTION_REL_WIDTH * cfg.chi,
            rtol=4.0 * np.finfo(float).eps,
            maxiter=500,
        )
    )


def check_conditions(cfg: MajorantConfig, domain_radius: float = math.inf) -> Certificate:
    """
    Evaluate the convergence hypotheses for cfg.

    The majorant condition a < Ω(χ) + hχ − Ψ(χ) is tested strictly, with no
    tolerance. A modulus rejected by validate_modulus fails the certificate,
    since t* is only unique for an increasing concave ω. Failure is returned
    as data, never raised.

    Args:
        cfg: Scalar majorant data
        domain_radius: Radius R of the domain ball; t* must not exceed it

    Returns:
        Certificate with all evaluated ingredients
    """
    validation = validate_modulus(cfg.modulus)
    rhs = cfg.condition_rhs
    holds = cfg.a < rhs
    w0 = w_eval(cfg, 0.0)
    w_chi = w_eval(cfg, cfg.chi)

    t_star = math.nan
    unique = False
    if w0 > 0.0 and w_chi < 0.0:
        t_star = find_t_star(cfg)
        unique = 0.0 < t_star < cfg.chi

    ball_ok = unique and t_star <= domain_radius
    certificate = Certificate(
        a=cfg.a,
        h=cfg.h,
        chi=cfg.chi,
        omega_chi=cfg.omega_chi,
        psi_chi=cfg.psi_chi,
        majorant_condition_holds=holds,
        majorant_condition_slack=rhs - cfg.a,
        unique_zero_found=unique,
        t_star=t_star,
        ball_radius_ok=ball_ok,
        w_at_0=w0,
        w_at_chi=w_chi,
        domain_radius=float(domain_radius),
        modulus_valid=validation.valid,
        modulus_failure=validation.first_violation,
    )
    if certificate.passed:
        logger.info("Certificate passed: t*={:.17g}, χ={:.17g}", t_star, cfg.chi)
    else:
        logger.info("Certificate failed: {}", certificate.failure_reason)
    return certificate


def next_t(cfg: MajorantConfig, t: float) -> float:
    """
    One step of the majorant recurrence t + W(t)/(h + ω(χ − t)).

    Raises:
        MajorantDomainError: t outside [0, χ)
    """
    t = float(t)
    if not 0.0 <= t < cfg.chi:
        raise MajorantDomainError(f"t={t!r} outside [0, χ={cfg.chi!r})")
    return t + w_eval(cfg, t) / (cfg.h + omega_eval(cfg.modulus, cfg.chi - t))


def next_t_newton_form(cfg: MajorantConfig, t: float) -> float:
    """The same step written as t − W(t)/Φ′_h(t)."""
    t = float(t)
    if not 0.0 <= t < cfg.chi:
        raise MajorantDomainError(f"t={t!r} outside [0, χ={cfg.chi!r})")
    return t - w_eval(cfg, t) / phi_h_prime(cfg, t)


def next_rho(cfg: MajorantConfig, rho: float) -> float:
    """ρ + W(ρ), the majorant step of the simplified process."""
    return d_eval(cfg, rho)


def _trace_t_star(cfg: MajorantConfig) -> float:
    try:
        return find_t_star(cfg)
    except PreconditionError:
        return math.nan


def run_majorant(
    cfg: MajorantConfig,
    tol: float = TRACE_TOL,
    max_iter: int = DEFAULT_TRACE_ITER,
) -> MajorantTrace:
    """
    Iterate the majorant recurrence from t₀ = 0.

    Stops once an increment falls below ``tol`` or stops being positive
    (W(t_n) ≤ 0 in floating point). Hitting ``max_iter`` or reaching χ
    leaves the trace flagged as not converged.
    """
    ts = [0.0]
    converged = False
    for _ in range(max_iter):
        t = ts[-1]
        if t >= cfg.chi:
            break
        t_next = next_t(cfg, t)
        if not t_next > t:
            converged = True
            break
        ts.append(t_next)
        if t_next - t < tol:
            converged = True
            break

    trace = MajorantTrace(t=ts, t_star=_trace_t_star(cfg), converged=converged, chi=cfg.chi)
    logger.debug(
        "Majorant trace: {} steps, limit {:.17g}, converged={}",
        trace.iterations, trace.limit, converged,
    )
    return trace


def run_rho_majorant(
    cfg: MajorantConfig,
    tol: float = TRACE_TOL,
    max_iter: int = 10 * DEFAULT_TRACE_ITER,
) -> MajorantTrace:
    """Iterate ρ_{n+1} = ρ_n + W(ρ_n) from ρ₀ = 0 (linear convergence)."""
    rhos = [0.0]
    converged = False
    for _ in range(max_iter):
        rho = rhos[-1]
        if rho > cfg.chi:
            break
        rho_next = next_rho(cfg, rho)
        if not rho_next > rho:
            converged = True
            break
        rhos.append(rho_next)
        if rho_next - rho < tol:
            converged = True
            break
    return MajorantTrace(
        t=rhos, t_star=_trace_t_star(cfg), converged=converged, chi=cfg.chi, kind="picard"
    )


@dataclass
class IdentityReport:
    """Per-step residuals of the recurrence identity."""
    deviations: list[float]
    tolerance: float

    @property
    def worst_deviation(self) -> float:
        return max(self.deviations, default=0.0)

    @property
    def worst_index(self) -> int | None:
        if not self.deviations:
            return None
        return int(np.argmax(self.deviations))

    @property
    def ok(self) -> bool:
        return self.worst_deviation <= self.tolerance


def residual_identity_check(
    cfg: MajorantConfig,
    trace: MajorantTrace,
    tol: float = IDENTITY_TOL,
) -> IdentityReport:
    """
    Check ω(χ−t_n)(t_{n+1}−t_n) − Ω(χ−t_n) + t_{n+1}h − Ψ(t_n) = a − Ω(χ).

    The identity is a rearrangement of the recurrence; a deviation beyond
    ``tol`` means the trace was not produced from this config.
    """
    target = cfg.a - cfg.omega_chi
    deviations = []
    for n in range(trace.iterations):
        t_n, t_next = trace.t[n], trace.t[n + 1]
        alpha = cfg.chi - t_n
        lhs = (
            omega_eval(cfg.modulus, alpha) * (t_next - t_n)
            - omega_integral(cfg.modulus, alpha)
            + t_next * cfg.h
            - psi_integral(cfg.psi, t_n)
        )
        deviations.append(abs(lhs - target))
    return IdentityReport(deviations=deviations, tolerance=tol)


def check_step_map_monotone(cfg: MajorantConfig, t_star: float, points: int = 256) -> bool:
    """Whether t ↦ t − W(t)/Φ′_h(t) is nondecreasing on a grid of [0, t*]."""
    grid = np.linspace(0.0, t_star, points)
    values = np.array([next_t_newton_form(cfg, t) for t in grid])
    return bool(np.all(np.diff(values) >= -audit_slack(t_star)))


def kantorovich_t_star(K: float, a: float) -> float:
    """
    Closed-form zero of a − t + K·t²/2, i.e. (1 − √(1 − 2Ka))/K.

    Returns NaN when 2Ka ≥ 1 (no zero below 1/K).
    """
    disc = 1.0 - 2.0 * K * a
    if disc <= 0.0:
        return math.nan
    # 2a/(1 + √disc) avoids cancellation for small Ka
    return 2.0 * a / (1.0 + math.sqrt(disc))
