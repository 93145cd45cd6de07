import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_state
from pbcvqe import kernels

py = kernels.python_kernels
cy = kernels.compiled_kernels
needs_compiled = pytest.mark.skipif(cy is None, reason="compiled extension not built")


@st.composite
def masks(draw, n):
    return draw(st.integers(0, (1 << n) - 1)), draw(st.integers(0, (1 << n) - 1))


def test_backend_name_matches_active_module():
    assert kernels.BACKEND in ("cython", "python")
    if kernels.BACKEND == "cython":
        assert kernels.expectations is cy.expectations
    else:
        assert kernels.expectations is py.expectations


@needs_compiled
@given(st.integers(1, 7).flatmap(lambda n: st.tuples(st.just(n), masks(n))), st.floats(-4, 4))
def test_rotation_agrees(case, theta):
    n, (x, z) = case
    psi = random_state(np.random.default_rng(n + x + z), n)
    a, b = psi.copy(), psi.copy()
    py.pauli_rotation_inplace(a, x, z, theta)
    cy.pauli_rotation_inplace(b, x, z, theta)
    assert np.allclose(a, b, atol=1e-12)


@needs_compiled
@given(st.integers(1, 7).flatmap(lambda n: st.tuples(st.just(n), masks(n))))
def test_apply_pauli_agrees(case):
    n, (x, z) = case
    psi = random_state(np.random.default_rng(x * 31 + z), n)
    a, b = psi.copy(), psi.copy()
    py.apply_pauli_inplace(a, x, z)
    cy.apply_pauli_inplace(b, x, z)
    assert np.allclose(a, b, atol=1e-12)


@needs_compiled
@pytest.mark.parametrize("n", [1, 3, 6, 10])
def test_expectations_and_dense_agree(n):
    rng = np.random.default_rng(n)
    xs = rng.integers(0, 1 << n, size=15).astype(np.uint64)
    zs = rng.integers(0, 1 << n, size=15).astype(np.uint64)
    cs = rng.normal(size=15) + 1j * rng.normal(size=15)
    psi = random_state(rng, n)
    assert np.allclose(py.expectations(psi, xs, zs), cy.expectations(psi, xs, zs), atol=1e-12)
    if n <= 6:
        assert np.allclose(py.dense_matrix(n, xs, zs, cs), cy.dense_matrix(n, xs, zs, cs), atol=1e-12)


def test_pure_python_fallback_selected_by_environment():
    env = dict(os.environ, PBCVQE_PURE_PYTHON="1")
    code = ("from pbcvqe import kernels; from pbcvqe.workbench.tables import reproduce_table; "
            "print(kernels.BACKEND, round(reproduce_table('V', 1000, 0).row('circuit_1', '00').exact, 4))")
    proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.split() == ["python", "0.7441"]
