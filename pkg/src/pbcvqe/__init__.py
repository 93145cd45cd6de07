"""Periodic-system VQE and TransQSE with partition-measurement symmetry verification."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConditioningError,
    ContractionError,
    DimensionError,
    InputError,
    NumericalError,
    PbcError,
    ResourceError,
    SymmetryError,
    ValidationError,
)
from .pauli import PauliSum, PauliWord  # noqa: E402

__all__ = [
    "__version__",
    "PauliSum",
    "PauliWord",
    "PbcError",
    "DimensionError",
    "ContractionError",
    "ResourceError",
    "InputError",
    "SymmetryError",
    "NumericalError",
    "ConditioningError",
    "ValidationError",
]
