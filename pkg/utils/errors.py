"""
Error types for PhiGamma

Every failure raised by the kernel derives from PhiRingError. The class
attribute exit_code is what the CLI returns when the error reaches it.
"""
from typing import Optional

PRECONDITION_FAILURE = 2
PROPERTY_VIOLATION = 3


class PhiRingError(Exception):
    """Base class of all kernel errors."""

    exit_code = PRECONDITION_FAILURE


class DivisionByZeroAtPrecision(PhiRingError):
    """The divisor is indistinguishable from zero at its precision."""


class PrecisionExhausted(PhiRingError):
    """No significant digit is left where one is required."""


class WindowUnderflow(PhiRingError):
    """A truncated result has an empty window."""


class WindowInsufficient(PhiRingError):
    """The stored window cannot certify the requested quantity."""


class NotAUnit(PhiRingError):
    """A series has no invertible leading term at its precision."""


class SubstitutionDiverges(PhiRingError):
    """The substituted series is not topologically nilpotent."""


class NotInTPlus(PhiRingError):
    """A torus element does not contract N0."""


class LevelOverflow(PhiRingError):
    """A coordinate cannot be represented at the requested level."""


class LevelTooSmall(PhiRingError):
    """The level is below the minimum the construction needs."""


class DepthTooShallow(PhiRingError):
    """The transport depth is below the required bound."""


class NotEtale(PhiRingError):
    """The Frobenius matrix is not invertible at precision."""


class CertificationFailed(PhiRingError):
    """A truncation could not be certified faithful."""


class IncompatibleClasses(PhiRingError):
    """Two analyticity classes have no common refinement."""


class MicrolocalReorderUnsupported(PhiRingError):
    """A product would need to move b_alpha^-1 past a b_beta factor."""


class ParseError(PhiRingError):
    """A fixture could not be decoded."""

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        if location:
            message = f"{message} (at {location})"
        super().__init__(message)


class PropertyViolation(PhiRingError):
    """A checked identity failed."""

    exit_code = PROPERTY_VIOLATION

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}" if detail else invariant)
