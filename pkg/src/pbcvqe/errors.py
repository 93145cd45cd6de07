"""Exception hierarchy shared across the package."""


class PbcError(Exception):
    """Base class for all package errors."""


class DimensionError(PbcError, ValueError):
    """Operands disagree on qubit or mode count, or an index is out of range."""


class ContractionError(PbcError, ValueError):
    """A qubit fixed during contraction carries a non-diagonal letter."""


class ResourceError(PbcError, MemoryError):
    """Requested dense object exceeds the size guard."""


class InputError(PbcError, ValueError):
    """Malformed or inconsistent user input."""


class SymmetryError(PbcError, ValueError):
    """A symmetry fails verification or a state is outside the chosen sector."""


class NumericalError(PbcError, ArithmeticError):
    """Ill-conditioned linear algebra (e.g. a near-singular confusion matrix)."""


class ConditioningError(NumericalError):
    """The TransQSE normalisation 1 + s1 is too close to zero."""


class ValidationError(PbcError, ValueError):
    """A data file failed validation; ``location`` names the offending entry."""

    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.message = message
        self.location = location
