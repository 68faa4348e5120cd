"""Exception hierarchy shared by all modules."""


class ChiralForgeError(Exception):
    """Base class for errors raised by this package."""


class ShapeError(ChiralForgeError, ValueError):
    """Incompatible block dimensions."""


class TruncationOverflowError(ChiralForgeError):
    """A result would leave the declared truncation; enlarge the cutoff."""


class GridError(ChiralForgeError, ValueError):
    """A mode index does not lie on the legal grid of the sector."""


class NormConvergenceError(ChiralForgeError):
    """The norm estimator failed to certify a bound within its budget."""


class ContractViolationError(ChiralForgeError):
    """Operands violate a structural precondition (e.g. shared tensor leg)."""


class SpecError(ChiralForgeError, ValueError):
    """Malformed or mutually inconsistent sector data."""


class WindowError(ChiralForgeError):
    """A shift field does not fit in the grading window."""


class SpinError(ChiralForgeError, ValueError):
    """Left and right conformal dimensions differ by a non-integer."""


class MissingEnergyBoundError(ChiralForgeError):
    """No fitted energy-bound constants are available for a charge."""


class UnsupportedGroupError(ChiralForgeError):
    """The operation needs a finite group."""


class ParameterError(ChiralForgeError, ValueError):
    """A numeric parameter is outside its allowed range."""
