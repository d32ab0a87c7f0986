# Falsification audits of declared hypotheses and run-level bounds
from src.audit.bounds import (
    audit_ball_containment,
    audit_error_bound,
    audit_inverse_bound,
    audit_residual_estimate,
    oracle_solution,
    probe_uniqueness,
)
from src.audit.smoothness import check_norm_regularity, check_psi_condition, check_regular_smoothness

__all__ = [
    "audit_ball_containment",
    "audit_error_bound",
    "audit_inverse_bound",
    "audit_residual_estimate",
    "check_norm_regularity",
    "check_psi_condition",
    "check_regular_smoothness",
    "oracle_solution",
    "probe_uniqueness",
]
