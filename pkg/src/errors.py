"""
Exceptions raised by the certified solver.

Mathematical hypotheses that fail are reported as data (certificates,
audit reports, solve statuses). These exceptions cover misuse: arguments
outside a function's domain, singular linear systems, bad configuration.
"""


class CertifyError(Exception):
    """Base class for all solver errors."""


class ModulusDomainError(CertifyError, ValueError):
    """Negative argument passed to a modulus or rate."""


class ModulusRangeError(CertifyError, ValueError):
    """Argument beyond the range (or evaluation interval) of a modulus."""


class MajorantConfigError(CertifyError, ValueError):
    """Scalar majorant data that cannot define a majorant."""


class MajorantDomainError(CertifyError, ValueError):
    """Scalar argument outside the interval where the majorant is defined."""


class PreconditionError(CertifyError):
    """A root search was requested on data without a sign change."""


class SingularMatrixError(CertifyError, ArithmeticError):
    """A pivot fell below the singularity threshold."""


class SingularJacobianError(SingularMatrixError):
    """Jacobian singular at an iterate or at the starting point."""


class DomainExitError(CertifyError):
    """Operator evaluated outside its closed domain ball."""


class OracleUnavailableError(CertifyError):
    """Reference solution could not be computed to the requested accuracy."""


class CorpusError(CertifyError):
    """Base class for corpus lookup failures."""


class UnknownProblemError(CorpusError, KeyError):
    """No corpus entry with the requested name."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown problem"


class CorpusValidationError(CorpusError, ValueError):
    """Override values rejected by a corpus entry's checks."""


class ConfigError(CertifyError, ValueError):
    """Run configuration failed validation."""
