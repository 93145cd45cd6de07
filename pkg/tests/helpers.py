"""Shared builders for tests that need random circuits and sampled plans."""
import numpy as np

from pbcvqe.measurement import build_plan, estimate_expectation
from pbcvqe.pauli import PauliWord
from pbcvqe.simulator import Circuit, NoiseModel, exact_expectation, run_statevector, sample


def random_circuit(rng, n_qubits, depth=6) -> Circuit:
    c = Circuit(n_qubits)
    for _ in range(depth):
        x = int(rng.integers(0, 1 << n_qubits))
        z = int(rng.integers(0, 1 << n_qubits))
        if x == 0 and z == 0:
            x = 1
        c.pauli_exp(PauliWord(n_qubits, x, z), angle=float(rng.uniform(-np.pi, np.pi)))
    return c


def sampled_estimate(h, prep: Circuit, shots, seed, symmetries=(), strategy="general", noise=None):
    """(estimate, stddev, exact) for ``h`` on the state ``prep`` prepares."""
    plan = build_plan(h, symmetries, strategy)
    seqs = np.random.SeedSequence(seed).spawn(len(plan))
    tables = []
    for e, s in zip(plan, seqs):
        c = prep.copy().clifford(e.circuit).measure_all()
        tables.append(sample(c, (), shots, noise or NoiseModel.noiseless(), int(s.generate_state(1)[0]), e.circuit_id))
    value, std = estimate_expectation(plan, tables, h)
    return value, std, exact_expectation(run_statevector(prep), h)
