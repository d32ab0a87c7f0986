# Certified Newton and Picard iterations
from src.solver.newton import newton_iterate, solve_certified, solve_picard
from src.solver.records import SolveResult, SolveStatus, StepRecord

__all__ = ["SolveResult", "SolveStatus", "StepRecord", "newton_iterate", "solve_certified", "solve_picard"]
