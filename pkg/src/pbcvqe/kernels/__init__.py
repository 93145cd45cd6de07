"""State-vector kernels with a compiled core and a numpy fallback.

The compiled extension is used when it imports; set ``PBCVQE_PURE_PYTHON=1``
to force the numpy implementation.  ``BACKEND`` names the active one.
"""
import os

from . import _pykernels

python_kernels = _pykernels
compiled_kernels = None

if not os.environ.get("PBCVQE_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_kernels
    except ImportError:  # extension not built
        compiled_kernels = None

_active = compiled_kernels if compiled_kernels is not None else _pykernels
BACKEND = "cython" if compiled_kernels is not None and _active is compiled_kernels else "python"

apply_pauli_inplace = _active.apply_pauli_inplace
pauli_rotation_inplace = _active.pauli_rotation_inplace
expectations = _active.expectations
dense_matrix = _active.dense_matrix

__all__ = [
    "BACKEND",
    "apply_pauli_inplace",
    "pauli_rotation_inplace",
    "expectations",
    "dense_matrix",
    "python_kernels",
    "compiled_kernels",
]
