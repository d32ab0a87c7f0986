"""
Operator equations f(x) + g(x) = 0 in finite dimensions.

A Problem bundles the evaluators for f, g and f′, the starting point, the
closed domain ball and the declared smoothness data. Preconditioning by
A₀ = f′(x₀) produces the normalized operators F = A₀⁻¹f, G = A₀⁻¹g with
F′(x₀) = I, which is the form all bounds are stated in.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from loguru import logger

from src.errors import DomainExitError, SingularJacobianError, SingularMatrixError
from src.operators.linalg import LUFactorization, NormChoice, factorize, operator_norm
from src.scalar.majorant import MajorantConfig
from src.scalar.moduli import Modulus, PsiRate, ZeroRate

Evaluator = Callable[[np.ndarray], np.ndarray]

RESIDUAL_SAFETY = 1.0 + 1e-12
IDENTITY_TOL = 1e-12
FD_REL_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class Problem:
    """
    One operator equation with its declared hypotheses.

    Evaluators receive and return float vectors of length ``dim`` (the
    Jacobian returns a dim×dim matrix) and must be free of side effects.
    """
    name: str
    dim: int
    eval_f: Evaluator
    eval_g: Evaluator
    eval_jacobian: Evaluator
    x0: np.ndarray
    domain_radius: float
    declared_modulus: Modulus
    declared_psi: PsiRate = field(default_factory=ZeroRate)
    declared_h: float = 0.0
    norm: NormChoice = NormChoice.EUCLIDEAN
    exact_jacobian: bool = True

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float)).copy()
        if x0.shape != (self.dim,):
            raise ValueError(f"x0 must have shape ({self.dim},), got {x0.shape}")
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        if not (math.isfinite(self.domain_radius) and self.domain_radius > 0.0):
            raise ValueError(f"domain radius must be positive, got {self.domain_radius!r}")
        if not 0.0 <= self.declared_h < 1.0:
            raise ValueError(f"declared h must lie in [0, 1), got {self.declared_h!r}")

    def in_domain(self, x: np.ndarray) -> bool:
        return in_domain(self, x)

    def _checked(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not self.in_domain(x):
            distance = self.norm.vector_norm(x - self.x0)
            raise DomainExitError(
                f"{self.name}: point at distance {distance:.17g} outside domain ball "
                f"of radius {self.domain_radius:.17g}"
            )
        return x

    def f(self, x: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.eval_f(self._checked(x)), dtype=float))

    def g(self, x: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.eval_g(self._checked(x)), dtype=float))

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return np.atleast_2d(np.asarray(self.eval_jacobian(self._checked(x)), dtype=float))

    def with_declarations(
        self,
        modulus: Modulus | None = None,
        psi: PsiRate | None = None,
        h: float | None = None,
    ) -> "Problem":
        """Copy with some declared hypotheses replaced."""
        return replace(
            self,
            declared_modulus=modulus if modulus is not None else self.declared_modulus,
            declared_psi=psi if psi is not None else self.declared_psi,
            declared_h=h if h is not None else self.declared_h,
        )

    def with_norm(self, norm: NormChoice) -> "Problem":
        return replace(self, norm=norm)

    def with_finite_difference_jacobian(self) -> "Problem":
        """Copy whose Jacobian is a central-difference estimate; never certified."""
        eval_f = self.eval_f
        return replace(
            self,
            eval_jacobian=lambda x: finite_difference_jacobian(eval_f, x),
            exact_jacobian=False,
        )


def in_domain(p: Problem, x: np.ndarray) -> bool:
    """True iff ‖x − x₀‖ ≤ R (closed ball)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return p.norm.vector_norm(x - p.x0) <= p.domain_radius


def finite_difference_jacobian(func: Evaluator, x: np.ndarray) -> np.ndarray:
    """Central differences with step 1e-6·(1 + ‖x‖)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    step = FD_REL_STEP * (1.0 + float(np.linalg.norm(x)))
    columns = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        forward = np.atleast_1d(np.asarray(func(x + e), dtype=float))
        backward = np.atleast_1d(np.asarray(func(x - e), dtype=float))
        columns.append((forward - backward) / (2.0 * step))
    return np.column_stack(columns)


@dataclass(frozen=True, eq=False)
class PreconditionedProblem:
    """A problem normalized by A₀ = f′(x₀), with the residual bound a."""
    base: Problem
    factorization: LUFactorization
    residual_bound: float

    @property
    def name(self) -> str:
        return self.base.name

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def x0(self) -> np.ndarray:
        return self.base.x0

    @property
    def domain_radius(self) -> float:
        return self.base.domain_radius

    def F(self, x: np.ndarray) -> np.ndarray:
        return self.factorization.solve(self.base.f(x))

    def G(self, x: np.ndarray) -> np.ndarray:
        return self.factorization.solve(self.base.g(x))

    def F_prime(self, x: np.ndarray) -> np.ndarray:
        return self.factorization.solve(self.base.jacobian(x))

    def residual(self, x: np.ndarray) -> np.ndarray:
        """F(x) + G(x)."""
        return self.factorization.solve(self.base.f(x) + self.base.g(x))

    def norm(self, v: np.ndarray) -> float:
        return self.base.norm.vector_norm(v)

    def operator_norm(self, matrix: np.ndarray) -> float:
        return operator_norm(matrix, self.base.norm)

    def in_domain(self, x: np.ndarray) -> bool:
        return self.base.in_domain(x)

    def majorant_config(
        self,
        modulus: Modulus | None = None,
        psi: PsiRate | None = None,
        h: float | None = None,
    ) -> MajorantConfig:
        """Scalar majorant data from a and the declared (or given) hypotheses."""
        return MajorantConfig(
            a=self.residual_bound,
            h=self.base.declared_h if h is None else h,
            modulus=self.base.declared_modulus if modulus is None else modulus,
            psi=self.base.declared_psi if psi is None else psi,
        )


def precondition(p: Problem) -> PreconditionedProblem:
    """
    Normalize a problem so that F′(x₀) = I.

    The residual bound is a = ‖F(x₀) + G(x₀)‖·(1 + 1e-12), or the smallest
    normal float when the residual vanishes.

    Raises:
        SingularJacobianError: f′(x₀) is numerically singular
    """
    try:
        factorization = factorize(p.jacobian(p.x0))
    except SingularMatrixError as exc:
        raise SingularJacobianError(f"{p.name}: Jacobian at x0 singular ({exc})") from exc

    pp = PreconditionedProblem(base=p, factorization=factorization, residual_bound=1.0)
    residual = pp.norm(pp.residual(p.x0))
    a = residual * RESIDUAL_SAFETY
    if a == 0.0:
        a = float(np.finfo(float).tiny)
    pp = replace(pp, residual_bound=a)

    deviation = pp.operator_norm(pp.F_prime(p.x0) - np.eye(p.dim))
    if deviation > IDENTITY_TOL:
        logger.warning("{}: ‖F′(x₀) − I‖ = {:.3e}, preconditioner ill-conditioned", p.name, deviation)
    logger.debug("{}: preconditioned, a = {:.17g}", p.name, a)
    return pp
