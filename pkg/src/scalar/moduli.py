"""
Smoothness moduli - the ω and ψ families used by the majorant engine.

A modulus ω is continuous, strictly increasing, concave and vanishes at
zero. Each family provides ω, its integral Ω, its inverse ω⁻¹ and a right
derivative, so that the three functions the scalar analysis needs stay
consistent with one another. Rates ψ bound the variation of the
nondifferentiable part and come with their integral Ψ.

Values are pydantic models discriminated on ``kind``, so they can be read
straight from a JSON run configuration.
"""

from dataclasses import dataclass, field
from typing import Annotated, Any, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, model_validator
from scipy import optimize

from src.errors import ModulusDomainError, ModulusRangeError

INVERSE_XTOL = 1e-14
VALIDATION_POINTS = 1024
VALIDATION_SPAN = 1e-8
DEFAULT_VALIDATION_LIMIT = 10.0


def _nonnegative(t: float, name: str = "t") -> float:
    value = float(t)
    if not value >= 0.0:
        raise ModulusDomainError(f"{name} must be nonnegative, got {value!r}")
    return value


def _bisect_inverse(func, s: float, upper: float) -> float:
    """Solve func(t) = s on [0, upper] by bisection to INVERSE_XTOL."""
    if s == 0.0:
        return 0.0
    return float(
        optimize.bisect(
            lambda t: func(t) - s,
            0.0,
            upper,
            xtol=INVERSE_XTOL,
            rtol=4.0 * np.finfo(float).eps,
            maxiter=400,
        )
    )


def _piecewise_integral(ts: np.ndarray, vs: np.ndarray, t: float) -> float:
    """Exact integral of the piecewise-linear interpolant, constant past the end."""
    idx = int(np.searchsorted(ts, t, side="right")) - 1
    idx = min(max(idx, 0), len(ts) - 1)
    widths = np.diff(ts[: idx + 1])
    full = float(np.sum(0.5 * (vs[1 : idx + 1] + vs[:idx]) * widths))
    v_t = float(np.interp(t, ts, vs))
    return full + 0.5 * (vs[idx] + v_t) * (t - ts[idx])


class _FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# ---------------------------------------------------------------------------
# ω families
# ---------------------------------------------------------------------------


class LipschitzModulus(_FrozenModel):
    """ω(t) = K·t."""

    kind: Literal["lipschitz"] = "lipschitz"
    K: float = Field(gt=0, allow_inf_nan=False)

    @property
    def range_limit(self) -> float:
        return float("inf")

    @property
    def evaluation_limit(self) -> float:
        return float("inf")

    def value(self, t: float) -> float:
        return self.K * _nonnegative(t)

    def inverse(self, s: float) -> float:
        return _nonnegative(s, "s") / self.K

    def integral(self, t: float) -> float:
        t = _nonnegative(t)
        return 0.5 * self.K * t * t

    def derivative(self, t: float) -> float:
        _nonnegative(t)
        return self.K


class HoelderModulus(_FrozenModel):
    """ω(t) = L·t^α with 0 < α < 1."""

    kind: Literal["hoelder"] = "hoelder"
    L: float = Field(gt=0, allow_inf_nan=False)
    alpha: float = Field(gt=0, lt=1)

    @property
    def range_limit(self) -> float:
        return float("inf")

    @property
    def evaluation_limit(self) -> float:
        return float("inf")

    def value(self, t: float) -> float:
        return self.L * _nonnegative(t) ** self.alpha

    def inverse(self, s: float) -> float:
        return (_nonnegative(s, "s") / self.L) ** (1.0 / self.alpha)

    def integral(self, t: float) -> float:
        t = _nonnegative(t)
        return self.L * t ** (self.alpha + 1.0) / (self.alpha + 1.0)

    def derivative(self, t: float) -> float:
        t = _nonnegative(t)
        if t == 0.0:
            return float("inf")
        return self.alpha * self.L * t ** (self.alpha - 1.0)


class HoelderTerm(_FrozenModel):
    L: float = Field(gt=0, allow_inf_nan=False)
    alpha: float = Field(gt=0, le=1)


class SumOfHoelderModulus(_FrozenModel):
    """ω(t) = Σ L_i·t^α_i with 0 < α_i ≤ 1; inverted by bisection."""

    kind: Literal["sum_of_hoelder"] = "sum_of_hoelder"
    terms: tuple[HoelderTerm, ...] = Field(min_length=1)

    @property
    def range_limit(self) -> float:
        return float("inf")

    @property
    def evaluation_limit(self) -> float:
        return float("inf")

    def value(self, t: float) -> float:
        t = _nonnegative(t)
        return float(sum(term.L * t**term.alpha for term in self.terms))

    def inverse(self, s: float) -> float:
        s = _nonnegative(s, "s")
        # ω dominates each single term, so the smallest single-term inverse brackets the root
        upper = min((s / term.L) ** (1.0 / term.alpha) for term in self.terms)
        return _bisect_inverse(self.value, s, 2.0 * upper)

    def integral(self, t: float) -> float:
        t = _nonnegative(t)
        return float(
            sum(term.L * t ** (term.alpha + 1.0) / (term.alpha + 1.0) for term in self.terms)
        )

    def derivative(self, t: float) -> float:
        t = _nonnegative(t)
        if t == 0.0 and any(term.alpha < 1.0 for term in self.terms):
            return float("inf")
        return float(sum(term.alpha * term.L * t ** (term.alpha - 1.0) for term in self.terms))


class PiecewiseLinearConcaveModulus(_FrozenModel):
    """
    Piecewise-linear ω through breakpoints starting at (0, 0).

    Defined on [0, t_last] only: evaluating past the last breakpoint raises
    ModulusRangeError. Slope conditions (positive, nonincreasing) are left
    to validate_modulus so that invalid declarations can be reported.
    """

    kind: Literal["piecewise_linear_concave"] = "piecewise_linear_concave"
    breakpoints: tuple[tuple[float, float], ...] = Field(min_length=2)

    @model_validator(mode="after")
    def _check_structure(self) -> "PiecewiseLinearConcaveModulus":
        ts, vs = self.arrays
        if not (np.all(np.isfinite(ts)) and np.all(np.isfinite(vs))):
            raise ValueError("breakpoints must be finite")
        if ts[0] != 0.0 or vs[0] != 0.0:
            raise ValueError("first breakpoint must be (0, 0)")
        if np.any(np.diff(ts) <= 0.0):
            raise ValueError("breakpoint abscissae must be strictly increasing")
        return self

    @property
    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        points = np.asarray(self.breakpoints, dtype=float)
        return points[:, 0], points[:, 1]

    @property
    def range_limit(self) -> float:
        return float(self.breakpoints[-1][1])

    @property
    def evaluation_limit(self) -> float:
        return float(self.breakpoints[-1][0])

    def _in_range(self, t: float) -> float:
        t = _nonnegative(t)
        if t > self.evaluation_limit:
            raise ModulusRangeError(
                f"t={t!r} beyond last breakpoint {self.evaluation_limit!r}"
            )
        return t

    def value(self, t: float) -> float:
        ts, vs = self.arrays
        return float(np.interp(self._in_range(t), ts, vs))

    def inverse(self, s: float) -> float:
        s = _nonnegative(s, "s")
        if s > self.range_limit:
            raise ModulusRangeError(f"s={s!r} above modulus range {self.range_limit!r}")
        return _bisect_inverse(self.value, s, self.evaluation_limit)

    def integral(self, t: float) -> float:
        ts, vs = self.arrays
        return _piecewise_integral(ts, vs, self._in_range(t))

    def derivative(self, t: float) -> float:
        t = self._in_range(t)
        ts, vs = self.arrays
        slopes = np.diff(vs) / np.diff(ts)
        idx = min(int(np.searchsorted(ts, t, side="right")) - 1, len(slopes) - 1)
        return float(slopes[idx])


Modulus = Annotated[
    Union[LipschitzModulus, HoelderModulus, SumOfHoelderModulus, PiecewiseLinearConcaveModulus],
    Field(discriminator="kind"),
]


# ---------------------------------------------------------------------------
# ψ families
# ---------------------------------------------------------------------------


class ZeroRate(_FrozenModel):
    """ψ ≡ 0, the smooth case g = 0."""

    kind: Literal["zero"] = "zero"

    def value(self, t: float) -> float:
        _nonnegative(t)
        return 0.0

    def integral(self, t: float) -> float:
        _nonnegative(t)
        return 0.0


class ConstantRate(_FrozenModel):
    kind: Literal["constant"] = "constant"
    c: float = Field(ge=0, allow_inf_nan=False)

    def value(self, t: float) -> float:
        _nonnegative(t)
        return self.c

    def integral(self, t: float) -> float:
        return self.c * _nonnegative(t)


class PiecewiseLinearRate(_FrozenModel):
    """Nondecreasing piecewise-linear ψ, constant after its last breakpoint."""

    kind: Literal["piecewise_linear_nondecreasing"] = "piecewise_linear_nondecreasing"
    breakpoints: tuple[tuple[float, float], ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_structure(self) -> "PiecewiseLinearRate":
        ts, vs = self.arrays
        if not (np.all(np.isfinite(ts)) and np.all(np.isfinite(vs))):
            raise ValueError("breakpoints must be finite")
        if ts[0] != 0.0:
            raise ValueError("first breakpoint must be at t = 0")
        if np.any(np.diff(ts) <= 0.0):
            raise ValueError("breakpoint abscissae must be strictly increasing")
        if vs[0] < 0.0 or np.any(np.diff(vs) < 0.0):
            raise ValueError("rate values must be nonnegative and nondecreasing")
        return self

    @property
    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        points = np.asarray(self.breakpoints, dtype=float)
        return points[:, 0], points[:, 1]

    def value(self, t: float) -> float:
        ts, vs = self.arrays
        return float(np.interp(_nonnegative(t), ts, vs))

    def integral(self, t: float) -> float:
        ts, vs = self.arrays
        return _piecewise_integral(ts, vs, _nonnegative(t))


PsiRate = Annotated[
    Union[ZeroRate, ConstantRate, PiecewiseLinearRate],
    Field(discriminator="kind"),
]

_MODULUS_ADAPTER: TypeAdapter = TypeAdapter(Modulus)
_PSI_ADAPTER: TypeAdapter = TypeAdapter(PsiRate)


def parse_modulus(data: Any) -> Modulus:
    """Build a modulus from a JSON-like mapping such as ``{"kind": "lipschitz", "K": 1}``."""
    return _MODULUS_ADAPTER.validate_python(data)


def parse_psi(data: Any) -> PsiRate:
    """Build a ψ rate from a JSON-like mapping such as ``{"kind": "constant", "c": 0.1}``."""
    return _PSI_ADAPTER.validate_python(data)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def omega_eval(m: Modulus, t: float) -> float:
    """
    Evaluate ω(t).

    Raises:
        ModulusDomainError: t < 0
        ModulusRangeError: t past the last breakpoint of a piecewise modulus
    """
    return m.value(t)


def omega_inverse(m: Modulus, s: float) -> float:
    """
    Evaluate ω⁻¹(s).

    Closed form for Lipschitz and Hölder moduli, bisection to absolute
    1e-14 otherwise.

    Raises:
        ModulusDomainError: s < 0
        ModulusRangeError: s above the range of ω
    """
    return m.inverse(s)


def omega_integral(m: Modulus, t: float) -> float:
    """Ω(t) = ∫₀ᵗ ω(τ) dτ."""
    return m.integral(t)


def omega_derivative(m: Modulus, t: float) -> float:
    """Right derivative of ω at t (may be +inf at 0)."""
    return m.derivative(t)


def psi_eval(p: PsiRate, t: float) -> float:
    return p.value(t)


def psi_integral(p: PsiRate, t: float) -> float:
    """Ψ(t) = ∫₀ᵗ ψ(τ) dτ."""
    return p.integral(t)


@dataclass
class ModulusValidationReport:
    """Outcome of the grid validation of a modulus."""
    valid: bool
    failures: list[str] = field(default_factory=list)
    grid_points: int = 0

    @property
    def first_violation(self) -> str | None:
        return self.failures[0] if self.failures else None


def validation_grid(m: Modulus, points: int = VALIDATION_POINTS) -> np.ndarray:
    """Zero followed by a geometric grid up to the evaluation limit (or 10)."""
    t_max = m.evaluation_limit
    if not np.isfinite(t_max):
        t_max = DEFAULT_VALIDATION_LIMIT
    grid = np.geomspace(t_max * VALIDATION_SPAN, t_max, points)
    return np.concatenate(([0.0], grid))


def validate_modulus(m: Modulus, points: int = VALIDATION_POINTS) -> ModulusValidationReport:
    """
    Check that ω vanishes at zero, increases strictly and is concave.

    Piecewise moduli get exact checks on their segment slopes; every kind is
    then checked on a deterministic geometric grid through secant slopes.

    Args:
        m: Modulus to validate
        points: Number of geometric grid points

    Returns:
        Report listing the first failure of each check
    """
    failures: list[str] = []

    if isinstance(m, PiecewiseLinearConcaveModulus):
        ts, vs = m.arrays
        slopes = np.diff(vs) / np.diff(ts)
        bad = np.flatnonzero(slopes <= 0.0)
        if bad.size:
            failures.append(f"monotonicity violated on segment starting at t={ts[bad[0]]:.6g}")
        rising = np.flatnonzero(np.diff(slopes) > 0.0)
        if rising.size:
            failures.append(f"concavity violated at breakpoint t={ts[rising[0] + 1]:.6g}")

    grid = validation_grid(m, points)
    values = np.array([m.value(t) for t in grid])

    if values[0] != 0.0:
        failures.append(f"zero at zero violated: ω(0) = {values[0]!r}")

    steps = np.diff(values)
    bad = np.flatnonzero(steps <= 0.0)
    if bad.size and not any(f.startswith("monotonicity") for f in failures):
        failures.append(f"monotonicity violated at t={grid[bad[0] + 1]:.6g}")

    secants = steps / np.diff(grid)
    tolerance = 1e-9 * np.abs(secants[:-1]) + 1e-12
    rising = np.flatnonzero(secants[1:] > secants[:-1] + tolerance)
    if rising.size and not any(f.startswith("concavity") for f in failures):
        failures.append(f"concavity violated at t={grid[rising[0] + 1]:.6g}")

    return ModulusValidationReport(valid=not failures, failures=failures, grid_points=len(grid))
