"""
Records emitted by the iterations.

A solve is a small state machine: it ends in exactly one SolveStatus and
leaves behind immutable StepRecords paired with the scalar majorant trace.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from src.scalar.majorant import Certificate, MajorantTrace


class SolveStatus(Enum):
    """Terminal states of a solve."""
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    CERTIFICATE_FAILED = "certificate_failed"
    BOUND_VIOLATED = "bound_violated"
    DOMAIN_EXIT = "domain_exit"
    SINGULAR_JACOBIAN = "singular_jacobian"


@dataclass(frozen=True, eq=False)
class StepRecord:
    """
    One iteration x_n → x_{n+1} next to its majorant increment.

    ``bound_ok`` is the step bound ‖x_{n+1} − x_n‖ ≤ t_{n+1} − t_n + slack;
    on uncertified (forced) runs it is still evaluated where the majorant is
    defined but never stops the run.
    """
    n: int
    x: np.ndarray
    t_n: float
    step_norm: float
    majorant_delta: float
    residual_norm: float
    error_bound: float
    bound_ok: bool
    jacobian_inverse_bound: float
    distance_from_start: float
    certified: bool = True

    def to_row(self) -> dict:
        return {
            "n": self.n,
            "t_n": self.t_n,
            "delta_t": self.majorant_delta,
            "step_norm": self.step_norm,
            "residual": self.residual_norm,
            "error_bound": self.error_bound,
            "bound_ok": self.bound_ok if self.certified else "uncertified",
        }


@dataclass(eq=False)
class SolveResult:
    """Outcome of a Newton or Picard run."""
    status: SolveStatus
    final_x: np.ndarray
    steps: list[StepRecord]
    certificate: Certificate
    majorant: MajorantTrace
    method: str = "newton"
    certified: bool = True
    tol: float = 1e-10
    diagnostic: str | None = None
    final_residual: float = math.nan
    x0: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED

    @property
    def iterations(self) -> int:
        return len(self.steps)

    def iterates(self) -> list[np.ndarray]:
        """x₀, …, x_N including the final point."""
        return [step.x for step in self.steps] + [self.final_x]

    def summary(self) -> dict:
        return {
            "status": self.status.value,
            "method": self.method,
            "certified": self.certified,
            "iterations": self.iterations,
            "final_x": [float(v) for v in self.final_x],
            "final_residual": self.final_residual,
            "t_star": self.certificate.t_star,
            "diagnostic": self.diagnostic,
            "all_bounds_ok": all(step.bound_ok for step in self.steps),
        }
