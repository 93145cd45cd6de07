import math
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm
from scipy.stats import chisquare

from conftest import random_hermitian_sum, random_state, words
from helpers import random_circuit
from pbcvqe.errors import DimensionError, InputError
from pbcvqe.pauli import PauliSum, PauliWord
from pbcvqe.simulator import (Circuit, NoiseModel, ShotsBackend, StatevectorBackend, exact_expectation,
                              make_backend, run_statevector, sample)

_P = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]),
      "Z": np.diag([1, -1])}


def kron_matrix(word: PauliWord) -> np.ndarray:
    # qubit 0 is the least significant index bit, so it goes rightmost in the product
    return reduce(np.kron, [_P[c] for c in reversed(word.to_string())]).astype(complex)


def sum_matrix(op: PauliSum) -> np.ndarray:
    dim = 1 << op.n_qubits
    return sum((c * kron_matrix(w) for w, c in op.items()), np.zeros((dim, dim), dtype=complex))


def yx():
    return Circuit(2).pauli_exp(PauliWord.from_string("YX"), param=0)


def test_empty_circuit_gives_all_zero_state():
    psi = run_statevector(Circuit(2))
    assert np.allclose(psi, [1, 0, 0, 0])


@pytest.mark.parametrize("theta,p00", [(-0.09283, 0.99141), (-0.53038, 0.7441)])
def test_yx_ansatz_ground_probability(theta, p00):
    psi = run_statevector(yx(), [theta])
    assert abs(psi[0]) ** 2 == pytest.approx(p00, abs=1e-4)
    assert abs(psi[0]) ** 2 == pytest.approx(math.cos(theta) ** 2, abs=1e-12)
    assert abs(psi[1]) ** 2 + abs(psi[2]) ** 2 == pytest.approx(0.0, abs=1e-12)


@given(st.floats(-math.pi, math.pi))
def test_yx_ansatz_preserves_zz_parity(theta):
    psi = run_statevector(yx(), [theta])
    assert exact_expectation(psi, PauliSum.from_labels({"ZZ": 1})) == pytest.approx(1.0, abs=1e-12)


def test_z0_on_zero_state_is_one():
    assert exact_expectation(run_statevector(Circuit(2)), PauliSum.from_labels({"ZI": 1})) == 1.0


def test_x_gate_flips_qubit_zero():
    psi = run_statevector(Circuit(2).x(0))
    # qubit 0 is the low index bit
    assert abs(psi[1]) == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(5))
def test_exact_expectation_matches_dense_form(seed):
    rng = np.random.default_rng(seed)
    op = random_hermitian_sum(rng, 6, 12)
    psi = random_state(rng, 6)
    want = np.vdot(psi, sum_matrix(op) @ psi).real
    assert exact_expectation(psi, op) == pytest.approx(want, abs=1e-10)


def test_exact_expectation_rejects_non_hermitian():
    op = PauliSum.from_labels({"XI": 1j})
    with pytest.raises(InputError):
        exact_expectation(run_statevector(Circuit(2)), op)


@given(words(max_qubits=4), st.floats(-math.pi, math.pi))
def test_pauli_exponential_matches_expm(word, theta):
    rng = np.random.default_rng(7)
    n = word.n_qubits
    prep = random_circuit(rng, n, depth=3)
    psi0 = run_statevector(prep)
    psi = run_statevector(prep.copy().pauli_exp(word, angle=theta))
    want = expm(-1j * theta * kron_matrix(word)) @ psi0
    assert np.allclose(psi, want, atol=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_norm_preserved(seed):
    rng = np.random.default_rng(seed)
    psi = run_statevector(random_circuit(rng, 5, depth=20))
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_wrong_parameter_count_rejected():
    with pytest.raises(InputError):
        run_statevector(yx(), [])


def test_out_of_range_qubit_rejected():
    with pytest.raises(DimensionError):
        Circuit(2).cx(0, 2)


def test_point_mass_sampling():
    t = sample(Circuit(3).x(1).measure_all(), (), 500, seed=1)
    assert t.counts == {"010": 500}


def test_sampled_p00_within_tolerance_at_default_shots():
    t = sample(yx().measure_all(), [-0.53038], 24000, seed=11)
    assert t.probabilities()["00"] == pytest.approx(0.7441, abs=0.0085)


def test_readout_flips_on_zero_state():
    t = sample(Circuit(2).measure_all(), (), 100000, NoiseModel.readout_only(0.1, 0.1), seed=3)
    assert t.probabilities()["00"] == pytest.approx(0.81, abs=0.005)


def test_per_qubit_readout_probabilities():
    t = sample(Circuit(2).measure_all(), (), 100000, NoiseModel.readout_only([0.2, 0.0], 0.0), seed=3)
    p = t.probabilities()
    assert p["10"] == pytest.approx(0.2, abs=0.005)
    assert "01" not in p


def test_sampling_is_seed_deterministic():
    c = yx().measure_all()
    noise = NoiseModel(0.02, 0.03, 0.01, 0.05)
    a = sample(c, [0.4], 5000, noise, seed=99)
    b = sample(c, [0.4], 5000, noise, seed=99)
    assert a.counts == b.counts
    assert sample(c, [0.4], 5000, noise, seed=100).counts != a.counts


def test_sampling_matches_born_rule_chi_square():
    rng = np.random.default_rng(5)
    c = random_circuit(rng, 3, depth=8)
    probs = np.abs(run_statevector(c)) ** 2
    t = sample(c.copy().measure_all(), (), 100000, seed=21)
    observed = np.array([t.counts.get(format(i, "03b")[::-1], 0) for i in range(8)])
    stat = chisquare(observed, probs * 100000)
    assert stat.pvalue > 1e-3


def test_depolarizing_noise_moves_distribution():
    c = yx().measure_all()
    clean = sample(c, [0.0], 20000, seed=1).probabilities()
    noisy = sample(c, [0.0], 20000, NoiseModel(0, 0, 0.0, 0.3), seed=1).probabilities()
    assert clean == {"00": 1.0}
    assert noisy["00"] < 0.95


def test_shots_backend_sequential_runs_reproduce():
    c = yx().measure_all()
    a, b = ShotsBackend(shots=2000, seed=4), ShotsBackend(shots=2000, seed=4)
    first = [a.run(c, [0.3]).counts for _ in range(3)]
    second = [b.run(c, [0.3]).counts for _ in range(3)]
    assert first == second
    assert first[0] != first[1]


def test_statevector_backend_prepare_basis():
    t = StatevectorBackend().prepare_basis("10", shots=10)
    assert t.counts == {"10": 10}


def test_shots_backend_prepare_basis_is_point_mass_without_noise():
    assert ShotsBackend(shots=300, seed=0).prepare_basis("011").counts == {"011": 300}


def test_make_backend_unknown_kind():
    with pytest.raises(InputError):
        make_backend("qpu")


def test_noise_probability_out_of_range():
    with pytest.raises(InputError):
        NoiseModel(1.5, 0.0, 0.0, 0.0)


def test_noise_model_round_trip():
    n = NoiseModel([0.01, 0.02], 0.03, 0.001, 0.02)
    assert NoiseModel.from_dict(n.to_dict()) == n
    with pytest.raises(InputError):
        NoiseModel.from_dict({"bogus": 1})
