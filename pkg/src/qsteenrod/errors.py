"""
Exception hierarchy for qsteenrod.

Every error carries the process exit code the CLI maps it to.
"""

from typing import Optional


class QSteenrodError(Exception):
    """Base class for all qsteenrod errors."""

    exit_code = 1


class ConfigError(QSteenrodError):
    """Invalid or unsupported configuration."""

    exit_code = 2


class DegeneracyError(QSteenrodError):
    """Bad prime or chamber, or stable envelopes that do not close up."""

    exit_code = 3


class PrimeDegeneracyError(DegeneracyError):
    """A tangent weight, edge label or denominator vanishes mod p."""


class ChamberDegeneracyError(DegeneracyError):
    """The chosen cocharacter is not dominant or pairs to zero with some root."""


class AxiomDegeneracyError(DegeneracyError):
    """Two reduced words give different stable-envelope rows."""


class ConventionError(QSteenrodError):
    """Inconsistent system, usually a sign convention mismatch."""


class WeylGateError(QSteenrodError):
    """The Weyl operators fail involutivity or the braid relations."""

    def __init__(self, message: str, witness: Optional[str] = None):
        super().__init__(message)
        self.witness = witness


class InternalCheckError(QSteenrodError):
    """A property that holds by construction was violated."""
