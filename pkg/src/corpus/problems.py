"""
Built-in problem corpus.

Each entry is an operator equation with analytically declared hypotheses.
Declared constants are derived from the entry's parameters, so overriding a
parameter (``x0``, ``c``, ``beta`` ...) keeps the declarations consistent
unless the constant itself is overridden (``K``, ``L``, ``psi``), which is
how under-declared counterexamples are built.

Expected roots are stored as brackets; decimals come from the oracle.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from pydantic import ValidationError

from src.errors import CorpusValidationError, UnknownProblemError
from src.operators.linalg import NormChoice, operator_norm
from src.operators.problem import Problem
from src.scalar.moduli import ConstantRate, HoelderModulus, LipschitzModulus, ZeroRate

MAX_LINEAR_DIM = 8


@dataclass
class CorpusEntry:
    """A corpus problem together with its provenance."""
    name: str
    problem: Problem
    notes: str
    bracket: tuple[float, float] | None = None
    parameters: dict[str, float] = field(default_factory=dict)
    override_keys: tuple[str, ...] = ()


# Static corpus: defaults, allowed override keys and notes per entry
PROBLEMS: dict[str, dict] = {
    "scalar_sqrt2_smooth": {
        "dim": 1,
        "defaults": {"x0": 1.5, "R": 0.5},
        "derived": ("K",),
        "notes": (
            "f(x) = x² − 2, g = 0. After preconditioning F″ = 1/x0, so the "
            "declared Lipschitz constant is K = 1/|x0| with h = 0."
        ),
    },
    "scalar_sqrt2_kink": {
        "dim": 1,
        "defaults": {"x0": 1.5, "R": 0.5, "c": 0.1, "d": 1.5},
        "derived": ("K", "psi"),
        "notes": (
            "f(x) = x² − 2, g(x) = c·|x − d|. K = 1/|x0| as in the smooth entry; "
            "G = g/(2x0) is Lipschitz with constant ψ = c/|2x0|."
        ),
    },
    "linear_nd": {
        "dim": None,
        "defaults": {"dim": 2, "R": 0.5, "shift": 0.1},
        "derived": ("K",),
        "notes": (
            "f(x) = Ax − b with A tridiagonal (2 on the diagonal, 0.5 beside it). "
            "F′ ≡ I, so any modulus holds; K = 1 is declared."
        ),
    },
    "hoelder_scalar": {
        "dim": 1,
        "defaults": {"x0": 0.25, "R": 0.3, "beta": 1.0, "b": 0.1},
        "derived": ("L", "h"),
        "notes": (
            "f(x) = x + β·x·|x|^(1/2) − b, f′(x) = 1 + 1.5β|x|^(1/2). With "
            "A0 = f′(x0): h = 1/A0 (the infimum of F′, attained at 0) and "
            "Hölder L = 1.5β/A0, α = 1/2. f′ has an unbounded difference "
            "quotient at 0, so no Lipschitz constant certifies a ball containing 0."
        ),
    },
    "system_2d_kink": {
        "dim": 2,
        "defaults": {"c": 0.05, "d1": 0.7, "d2": 0.8, "R": 0.5},
        "derived": ("K", "psi"),
        "notes": (
            "f(x) = (x1 + x2²/4 − 0.8, x2 + x1²/4 − 0.9), "
            "g(x) = c·(|x1 − d1|, |x2 − d2|), x0 = (0.6, 0.6). "
            "‖f′(x) − f′(y)‖ ≤ ‖x − y‖/2, so K = ‖A0⁻¹‖/2 and ψ = c·‖A0⁻¹‖."
        ),
    },
}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise CorpusValidationError(message)


def _sqrt2(name: str, params: dict, norm: NormChoice) -> tuple[Problem, tuple | None]:
    x0, radius = params["x0"], params["R"]
    _require(x0 != 0.0, "x0 must be nonzero: Jacobian at x0 singular")
    _require(radius > 0.0, "R must be positive")
    kink = name == "scalar_sqrt2_kink"
    c = params.get("c", 0.0)
    d = params.get("d", 0.0)
    _require(c >= 0.0, "c must be nonnegative")

    def eval_f(x):
        return x * x - 2.0

    def eval_g(x):
        return c * np.abs(x - d) if kink else np.zeros_like(x)

    def eval_jacobian(x):
        return np.array([[2.0 * x[0]]])

    K = params.get("K", 1.0 / abs(x0))
    psi = ConstantRate(c=params.get("psi", c / abs(2.0 * x0))) if kink else ZeroRate()
    problem = Problem(
        name=name,
        dim=1,
        eval_f=eval_f,
        eval_g=eval_g,
        eval_jacobian=eval_jacobian,
        x0=np.array([x0]),
        domain_radius=radius,
        declared_modulus=LipschitzModulus(K=K),
        declared_psi=psi,
        norm=norm,
    )
    return problem, (1.0, 2.0)


def _linear(name: str, params: dict, norm: NormChoice) -> tuple[Problem, tuple | None]:
    dim = params["dim"]
    _require(float(dim).is_integer() and 1 <= dim <= MAX_LINEAR_DIM, f"dim must be an integer in [1, {MAX_LINEAR_DIM}]")
    _require(params["R"] > 0.0, "R must be positive")
    dim = int(dim)
    matrix = 2.0 * np.eye(dim) + 0.5 * (np.eye(dim, k=1) + np.eye(dim, k=-1))
    x_true = 1.0 + 0.1 * np.arange(dim)
    rhs = matrix @ x_true
    x0 = x_true + params["shift"] / math.sqrt(dim) * np.ones(dim)

    problem = Problem(
        name=name,
        dim=dim,
        eval_f=lambda x: matrix @ x - rhs,
        eval_g=lambda x: np.zeros_like(x),
        eval_jacobian=lambda x: matrix,
        x0=x0,
        domain_radius=params["R"],
        declared_modulus=LipschitzModulus(K=params.get("K", 1.0)),
        norm=norm,
    )
    return problem, None


def _hoelder(name: str, params: dict, norm: NormChoice) -> tuple[Problem, tuple | None]:
    x0, radius, beta, shift = params["x0"], params["R"], params["beta"], params["b"]
    _require(beta > 0.0, "beta must be positive")
    _require(x0 != 0.0, "x0 must be nonzero: h = 1/f′(x0) would reach 1")
    _require(radius > 0.0, "R must be positive")
    _require(shift >= 0.0, "b must be nonnegative")
    jac0 = 1.0 + 1.5 * beta * math.sqrt(abs(x0))

    def eval_f(x):
        return x + beta * x * np.sqrt(np.abs(x)) - shift

    def eval_jacobian(x):
        return np.array([[1.0 + 1.5 * beta * math.sqrt(abs(x[0]))]])

    problem = Problem(
        name=name,
        dim=1,
        eval_f=eval_f,
        eval_g=lambda x: np.zeros_like(x),
        eval_jacobian=eval_jacobian,
        x0=np.array([x0]),
        domain_radius=radius,
        declared_modulus=HoelderModulus(L=params.get("L", 1.5 * beta / jac0), alpha=0.5),
        declared_h=params.get("h", 1.0 / jac0),
        norm=norm,
    )
    return problem, ((0.0, shift) if shift > 0.0 else None)


def _system(name: str, params: dict, norm: NormChoice) -> tuple[Problem, tuple | None]:
    c, d1, d2, radius = params["c"], params["d1"], params["d2"], params["R"]
    _require(c >= 0.0, "c must be nonnegative")
    _require(radius > 0.0, "R must be positive")
    offsets = np.array([0.8, 0.9])
    kinks = np.array([d1, d2])
    x0 = np.array([0.6, 0.6])

    def eval_f(x):
        return np.array([x[0] + 0.25 * x[1] ** 2, x[1] + 0.25 * x[0] ** 2]) - offsets

    def eval_jacobian(x):
        return np.array([[1.0, 0.5 * x[1]], [0.5 * x[0], 1.0]])

    inverse_norm = operator_norm(np.linalg.inv(eval_jacobian(x0)), norm)
    problem = Problem(
        name=name,
        dim=2,
        eval_f=eval_f,
        eval_g=lambda x: c * np.abs(x - kinks),
        eval_jacobian=eval_jacobian,
        x0=x0,
        domain_radius=radius,
        declared_modulus=LipschitzModulus(K=params.get("K", 0.5 * inverse_norm)),
        declared_psi=ConstantRate(c=params.get("psi", c * inverse_norm)),
        norm=norm,
    )
    return problem, None


BUILDERS: dict[str, Callable[[str, dict, NormChoice], tuple[Problem, tuple | None]]] = {
    "scalar_sqrt2_smooth": _sqrt2,
    "scalar_sqrt2_kink": _sqrt2,
    "linear_nd": _linear,
    "hoelder_scalar": _hoelder,
    "system_2d_kink": _system,
}


def override_keys(name: str) -> tuple[str, ...]:
    spec = PROBLEMS[name]
    return tuple(spec["defaults"]) + tuple(spec["derived"])


def corpus_entry(
    name: str,
    overrides: dict[str, float] | None = None,
    norm: NormChoice = NormChoice.EUCLIDEAN,
) -> CorpusEntry:
    """
    Build a corpus entry with parameter overrides applied and revalidated.

    Raises:
        UnknownProblemError: no entry called ``name``
        CorpusValidationError: unknown override key or a failed entry check
    """
    if name not in PROBLEMS:
        raise UnknownProblemError(f"unknown problem '{name}'; available: {', '.join(PROBLEMS)}")
    spec = PROBLEMS[name]
    allowed = override_keys(name)

    params = dict(spec["defaults"])
    for key, value in (overrides or {}).items():
        if key not in allowed:
            raise CorpusValidationError(
                f"unknown override '{key}' for {name}; allowed: {', '.join(allowed)}"
            )
        try:
            params[key] = float(value)
        except (TypeError, ValueError) as exc:
            raise CorpusValidationError(f"override '{key}' must be a number, got {value!r}") from exc
        _require(math.isfinite(params[key]), f"override '{key}' must be finite")

    try:
        problem, bracket = BUILDERS[name](name, params, norm)
    except (ValidationError, ValueError) as exc:
        if isinstance(exc, CorpusValidationError):
            raise
        raise CorpusValidationError(f"{name}: {exc}") from exc

    return CorpusEntry(
        name=name,
        problem=problem,
        notes=spec["notes"],
        bracket=bracket,
        parameters=params,
        override_keys=allowed,
    )


def corpus_get(
    name: str,
    overrides: dict[str, float] | None = None,
    norm: NormChoice = NormChoice.EUCLIDEAN,
) -> Problem:
    """Problem of the named corpus entry (see corpus_entry)."""
    return corpus_entry(name, overrides, norm).problem


def corpus_list() -> list[CorpusEntry]:
    """All entries at their default parameters."""
    return [corpus_entry(name) for name in PROBLEMS]
