# Scalar layer: moduli of continuity and the majorant sequence
from src.scalar.majorant import Certificate, MajorantConfig, MajorantTrace, check_conditions, run_majorant
from src.scalar.moduli import Modulus, PsiRate, parse_modulus, parse_psi, validate_modulus

__all__ = [
    "Certificate",
    "MajorantConfig",
    "MajorantTrace",
    "Modulus",
    "PsiRate",
    "check_conditions",
    "parse_modulus",
    "parse_psi",
    "run_majorant",
    "validate_modulus",
]
