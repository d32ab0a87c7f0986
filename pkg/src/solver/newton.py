"""
Certified iterations for F(x) + G(x) = 0.

Two processes run in lockstep with their scalar majorants:

    Newton:  x_{n+1} = x_n − F′(x_n)⁻¹(F(x_n) + G(x_n)),  t_{n+1} from the recurrence
    Picard:  u_{n+1} = u_n − (F(u_n) + G(u_n)),          ρ_{n+1} = ρ_n + W(ρ_n)

Every step's norm is checked against the matching scalar increment. A
violated bound means the declared hypotheses are false, so a certified run
stops there instead of continuing without a guarantee.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from loguru import logger

from src.errors import (
    DomainExitError,
    MajorantDomainError,
    SingularJacobianError,
    SingularMatrixError,
)
from src.operators.linalg import factorize
from src.operators.problem import PreconditionedProblem
from src.scalar.majorant import (
    Certificate,
    MajorantConfig,
    MajorantTrace,
    audit_slack,
    check_conditions,
    next_rho,
    next_t,
)
from src.scalar.moduli import omega_eval
from src.solver.records import SolveResult, SolveStatus, StepRecord

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100


def newton_step(pp: PreconditionedProblem, x_n: np.ndarray) -> np.ndarray:
    """
    x_n − F′(x_n)⁻¹(F(x_n) + G(x_n)).

    Raises:
        DomainExitError: x_n outside the domain ball
        SingularJacobianError: F′(x_n) numerically singular
    """
    x_n = np.atleast_1d(np.asarray(x_n, dtype=float))
    residual = pp.residual(x_n)
    try:
        factorization = factorize(pp.F_prime(x_n))
    except SingularMatrixError as exc:
        raise SingularJacobianError(f"Jacobian singular at iterate: {exc}") from exc
    return x_n - factorization.solve(residual)


def picard_step(pp: PreconditionedProblem, u_n: np.ndarray) -> np.ndarray:
    """u_n − (F(u_n) + G(u_n))."""
    u_n = np.atleast_1d(np.asarray(u_n, dtype=float))
    return u_n - pp.residual(u_n)


def inverse_bound(cfg: MajorantConfig, t_n: float) -> float:
    """
    Neumann-series bound 1/(1 − [ω(χ) − ω(χ − t_n)]) on ‖F′(x_n)⁻¹‖.

    Raises:
        MajorantDomainError: t_n outside [0, χ)
    """
    t_n = float(t_n)
    if not 0.0 <= t_n < cfg.chi:
        raise MajorantDomainError(f"t_n={t_n!r} outside [0, χ={cfg.chi!r})")
    spent = omega_eval(cfg.modulus, cfg.chi) - omega_eval(cfg.modulus, cfg.chi - t_n)
    return 1.0 / (1.0 - spent)


@dataclass(frozen=True)
class _Process:
    method: str
    step: Callable[[PreconditionedProblem, np.ndarray], np.ndarray]
    scalar_step: Callable[[MajorantConfig, float], float]
    inverse_bound: Callable[[MajorantConfig, float], float]


NEWTON = _Process("newton", newton_step, next_t, inverse_bound)
PICARD = _Process("picard", picard_step, next_rho, lambda cfg, t: 1.0)


def _safe_scalar(func, cfg: MajorantConfig, t: float) -> float:
    """Scalar quantity, or NaN where the majorant is undefined (forced runs)."""
    if not math.isfinite(t):
        return math.nan
    try:
        return float(func(cfg, t))
    except MajorantDomainError:
        return math.nan


def _iterate(
    pp: PreconditionedProblem,
    cfg: MajorantConfig,
    certificate: Certificate,
    certified: bool,
    process: _Process,
    tol: float,
    max_iter: int,
) -> SolveResult:
    x0 = np.array(pp.x0, dtype=float)
    x = x0.copy()
    t = 0.0
    ts = [0.0]
    steps: list[StepRecord] = []
    t_star = certificate.t_star
    slack = audit_slack(t_star)
    status = SolveStatus.MAX_ITER
    diagnostic = None
    final_residual = math.nan

    def finish(final_status: SolveStatus) -> SolveResult:
        trace = MajorantTrace(
            t=ts,
            t_star=t_star,
            converged=final_status is SolveStatus.CONVERGED,
            chi=cfg.chi,
            kind=process.method,
        )
        result = SolveResult(
            status=final_status,
            final_x=x,
            steps=steps,
            certificate=certificate,
            majorant=trace,
            method=process.method,
            certified=certified,
            tol=tol,
            diagnostic=diagnostic,
            final_residual=final_residual,
            x0=x0,
        )
        logger.info(
            "{} {} run on {}: {} after {} steps",
            "Certified" if certified else "Uncertified",
            process.method, pp.name, final_status.value, len(steps),
        )
        return result

    for n in range(max_iter):
        try:
            residual_norm = pp.norm(pp.residual(x))
        except DomainExitError as exc:
            diagnostic = str(exc)
            return finish(SolveStatus.DOMAIN_EXIT)
        final_residual = residual_norm
        if residual_norm <= tol:
            return finish(SolveStatus.CONVERGED)

        try:
            x_next = process.step(pp, x)
        except SingularJacobianError as exc:
            diagnostic = f"step {n}: {exc}"
            return finish(SolveStatus.SINGULAR_JACOBIAN)
        except DomainExitError as exc:
            diagnostic = f"step {n}: {exc}"
            return finish(SolveStatus.DOMAIN_EXIT)

        t_next = _safe_scalar(process.scalar_step, cfg, t)
        delta = t_next - t
        step_norm = pp.norm(x_next - x)
        bound_ok = bool(math.isfinite(delta) and step_norm <= delta + slack)
        steps.append(
            StepRecord(
                n=n,
                x=x.copy(),
                t_n=t,
                step_norm=step_norm,
                majorant_delta=delta,
                residual_norm=residual_norm,
                error_bound=t_star - t,
                bound_ok=bound_ok,
                jacobian_inverse_bound=_safe_scalar(process.inverse_bound, cfg, t),
                distance_from_start=pp.norm(x - x0),
                certified=certified,
            )
        )
        logger.debug(
            "step {}: ‖Δx‖={:.3e} Δt={:.3e} residual={:.3e}", n, step_norm, delta, residual_norm
        )
        x, t = x_next, t_next
        ts.append(t)

        if certified and not bound_ok:
            diagnostic = (
                f"step bound violated at step {n}: ‖x_{n + 1} − x_{n}‖ = {step_norm:.17g} "
                f"> t_{n + 1} − t_{n} = {delta:.17g} (+ slack {slack:.3g}); "
                "declared hypotheses are false for this problem"
            )
            logger.error(diagnostic)
            return finish(SolveStatus.BOUND_VIOLATED)

        if step_norm < tol:
            try:
                final_residual = pp.norm(pp.residual(x))
            except DomainExitError as exc:
                diagnostic = str(exc)
                return finish(SolveStatus.DOMAIN_EXIT)
            if final_residual <= tol:
                return finish(SolveStatus.CONVERGED)
            diagnostic = f"stalled at step {n}: step below tol with residual {final_residual:.3e}"
            return finish(SolveStatus.MAX_ITER)

    try:
        final_residual = pp.norm(pp.residual(x))
    except DomainExitError as exc:
        diagnostic = str(exc)
        return finish(SolveStatus.DOMAIN_EXIT)
    if final_residual <= tol:
        return finish(SolveStatus.CONVERGED)
    diagnostic = f"no convergence within {max_iter} iterations (residual {final_residual:.3e})"
    return finish(SolveStatus.MAX_ITER)


def _run(
    pp: PreconditionedProblem,
    process: _Process,
    tol: float,
    max_iter: int,
    force: bool,
    cfg: MajorantConfig | None,
) -> SolveResult:
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol!r}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter!r}")

    cfg = cfg or pp.majorant_config()
    certificate = check_conditions(cfg, pp.domain_radius)
    reason = certificate.failure_reason
    if reason is None and not pp.base.exact_jacobian:
        reason = "finite-difference Jacobian excluded from certified runs"
    certified = reason is None

    if not certified and not force:
        logger.warning("{}: not iterating, {}", pp.name, reason)
        return SolveResult(
            status=SolveStatus.CERTIFICATE_FAILED,
            final_x=np.array(pp.x0, dtype=float),
            steps=[],
            certificate=certificate,
            majorant=MajorantTrace(t=[0.0], t_star=certificate.t_star, converged=False, chi=cfg.chi,
                                   kind=process.method),
            method=process.method,
            certified=False,
            tol=tol,
            diagnostic=reason,
            x0=np.array(pp.x0, dtype=float),
        )
    if not certified:
        logger.warning("{}: forced uncertified run, {}", pp.name, reason)
    return _iterate(pp, cfg, certificate, certified, process, tol, max_iter)


def solve_certified(
    pp: PreconditionedProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    force: bool = False,
    cfg: MajorantConfig | None = None,
) -> SolveResult:
    """
    Generalized Newton–Kantorovich iteration with its majorant in lockstep.

    Args:
        pp: Preconditioned problem
        tol: Stop once the residual norm (or the step norm) drops below tol
        max_iter: Iteration budget
        force: Iterate even if the certificate fails; rows are marked uncertified
        cfg: Scalar data to certify with (defaults to the problem's declarations)

    Returns:
        SolveResult whose status is CERTIFICATE_FAILED without any step when
        the certificate fails and ``force`` is not set
    """
    return _run(pp, NEWTON, tol, max_iter, force, cfg)


def solve_picard(
    pp: PreconditionedProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    force: bool = False,
    cfg: MajorantConfig | None = None,
) -> SolveResult:
    """Simplified process u_{n+1} = u_n − (F(u_n) + G(u_n)) with the ρ majorant."""
    return _run(pp, PICARD, tol, max_iter, force, cfg)


def newton_iterate(
    pp: PreconditionedProblem,
    x_start: np.ndarray,
    tol: float = 1e-14,
    max_iter: int = 4 * DEFAULT_MAX_ITER,
) -> tuple[np.ndarray, float, int]:
    """
    Plain Newton from an arbitrary start, without any majorant.

    Returns:
        (final point, final residual norm, iterations used)
    """
    x = np.atleast_1d(np.asarray(x_start, dtype=float)).copy()
    residual = pp.norm(pp.residual(x))
    for k in range(max_iter):
        if residual <= tol:
            return x, residual, k
        x_next = newton_step(pp, x)
        stalled = pp.norm(x_next - x) == 0.0
        x = x_next
        residual = pp.norm(pp.residual(x))
        if stalled:
            return x, residual, k + 1
    return x, residual, max_iter
