# Operator model: problems, preconditioning and dense linear algebra
from src.operators.linalg import NormChoice, factorize, linear_solve, operator_norm
from src.operators.problem import PreconditionedProblem, Problem, precondition

__all__ = [
    "NormChoice",
    "PreconditionedProblem",
    "Problem",
    "factorize",
    "linear_solve",
    "operator_norm",
    "precondition",
]
