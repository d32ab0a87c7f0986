"""
Dense linear algebra for small systems.

LU with partial pivoting (scipy.linalg), a singularity test on the pivots,
and the vector/operator norms a problem can be posed in.
"""

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import linalg

from src.errors import SingularMatrixError

PIVOT_REL_TOL = 1e-14
EXACT_SVD_MAX_DIM = 3
POWER_ITER_TOL = 1e-10
POWER_ITER_MAX = 1000


class NormChoice(Enum):
    """Vector norm of the problem and its induced operator norm."""
    EUCLIDEAN = "euclidean"
    MAX_ABS = "max_abs"

    def vector_norm(self, v: np.ndarray) -> float:
        v = np.atleast_1d(np.asarray(v, dtype=float))
        if self is NormChoice.MAX_ABS:
            return float(np.max(np.abs(v))) if v.size else 0.0
        return float(np.linalg.norm(v))

    def operator_norm(self, matrix: np.ndarray) -> float:
        return operator_norm(matrix, self)


def _spectral_norm(matrix: np.ndarray) -> float:
    rows, cols = matrix.shape
    if rows == 1 and cols == 1:
        return float(abs(matrix[0, 0]))
    if max(rows, cols) <= EXACT_SVD_MAX_DIM:
        return float(np.linalg.svd(matrix, compute_uv=False)[0])

    gram = matrix.T @ matrix
    # fixed start vector keeps the estimate reproducible
    rng = np.random.default_rng(0)
    v = np.ones(cols) + 0.1 * rng.standard_normal(cols)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(POWER_ITER_MAX):
        w = gram @ v
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        if abs(norm_w - estimate) <= POWER_ITER_TOL * norm_w:
            estimate = norm_w
            break
        estimate = norm_w
    return float(np.sqrt(estimate))


def operator_norm(matrix: np.ndarray, norm: NormChoice = NormChoice.EUCLIDEAN) -> float:
    """
    Operator norm induced by ``norm``.

    Euclidean: exact SVD up to 3×3, power iteration on MᵀM beyond.
    MaxAbs: maximum absolute row sum.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if norm is NormChoice.MAX_ABS:
        return float(np.max(np.sum(np.abs(matrix), axis=1)))
    return _spectral_norm(matrix)


@dataclass(frozen=True)
class LUFactorization:
    """LU factors with partial pivoting of a square matrix."""
    lu: np.ndarray
    piv: np.ndarray
    matrix_norm: float

    @property
    def dim(self) -> int:
        return self.lu.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve M·x = rhs for a vector or a matrix of right-hand sides."""
        return linalg.lu_solve((self.lu, self.piv), np.asarray(rhs, dtype=float))


def factorize(matrix: np.ndarray) -> LUFactorization:
    """
    Factorize a square matrix.

    Raises:
        SingularMatrixError: a pivot is below 1e-14·‖M‖ (or M is not finite)
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"matrix must be square, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise SingularMatrixError("matrix has non-finite entries")

    matrix_norm = float(np.max(np.sum(np.abs(matrix), axis=1)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(matrix)

    pivots = np.abs(np.diag(lu))
    threshold = PIVOT_REL_TOL * matrix_norm
    if matrix_norm == 0.0 or np.any(pivots <= threshold):
        raise SingularMatrixError(
            f"numerically singular: smallest pivot {float(pivots.min()):.3e} "
            f"vs threshold {threshold:.3e}"
        )
    return LUFactorization(lu=lu, piv=piv, matrix_norm=matrix_norm)


def linear_solve(matrix: np.ndarray | LUFactorization, rhs: np.ndarray) -> np.ndarray:
    """
    Solve M·x = rhs by LU with partial pivoting.

    Args:
        matrix: Square matrix or an existing factorization
        rhs: Right-hand side vector (or matrix)

    Returns:
        Solution with the shape of ``rhs``
    """
    factorization = matrix if isinstance(matrix, LUFactorization) else factorize(matrix)
    return factorization.solve(rhs)
