import numpy as np
import pytest
from hypothesis import settings, strategies as st

from pbcvqe.pauli import PauliSum, PauliWord

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")


@st.composite
def words(draw, n_qubits=None, max_qubits=6):
    n = draw(st.integers(1, max_qubits)) if n_qubits is None else n_qubits
    x = draw(st.integers(0, (1 << n) - 1))
    z = draw(st.integers(0, (1 << n) - 1))
    return PauliWord(n, x, z)


@st.composite
def word_pairs(draw, max_qubits=6):
    n = draw(st.integers(1, max_qubits))
    return draw(words(n)), draw(words(n))


def random_hermitian_sum(rng, n_qubits, n_terms):
    terms = {}
    for _ in range(n_terms):
        w = PauliWord(n_qubits, int(rng.integers(0, 1 << n_qubits)), int(rng.integers(0, 1 << n_qubits)))
        terms[w] = terms.get(w, 0) + float(rng.normal())
    return PauliSum(n_qubits, terms)


def random_state(rng, n_qubits):
    psi = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return psi / np.linalg.norm(psi)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
        terminalreporter.write_line(f"NOT REPRODUCIBLE: {mod.NOT_REPRODUCIBLE}")
