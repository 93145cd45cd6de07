"""Seeded state-vector simulation with a synthetic noise model.

Circuits hold Pauli exponentials ``exp(-i theta P)``, a few Clifford gates and
X flips.  Sampling under noise uses Pauli trajectories: each shot draws an
error pattern, shots with the same pattern share one state-vector run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .clifford import Gate
from .errors import DimensionError, InputError
from .measurement import ShotTable, int_to_bits
from .pauli import PauliSum, PauliWord

MAX_QUBITS = 20
_CLIFFORD_1Q = ("H", "S", "SDG", "X")


@dataclass(frozen=True)
class PauliExp:
    """``exp(-i * angle * word)``; ``param`` indexes the parameter vector."""

    word: PauliWord
    param: int | None = None
    angle: float = 0.0
    scale: float = 1.0

    def theta(self, params: Sequence[float]) -> float:
        if self.param is None:
            return self.angle
        return self.scale * float(params[self.param]) + self.angle


@dataclass
class Circuit:
    n_qubits: int
    ops: list = field(default_factory=list)

    def __post_init__(self):
        if not 0 < self.n_qubits <= MAX_QUBITS:
            raise DimensionError(f"{self.n_qubits} qubits outside 1..{MAX_QUBITS}")

    def _check(self, *qubits):
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise DimensionError(f"qubit {q} outside 0..{self.n_qubits - 1}")
        if len(set(qubits)) != len(qubits):
            raise DimensionError(f"repeated qubit in {qubits}")

    def pauli_exp(self, word: PauliWord, param: int | None = None, angle: float = 0.0) -> "Circuit":
        if word.n_qubits != self.n_qubits:
            raise DimensionError(f"word on {word.n_qubits} qubits, circuit has {self.n_qubits}")
        self.ops.append(PauliExp(word, param, angle))
        return self

    def gate(self, name: str, *qubits: int) -> "Circuit":
        if name in _CLIFFORD_1Q and len(qubits) == 1 or name == "CX" and len(qubits) == 2:
            self._check(*qubits)
            self.ops.append((name, *qubits))
            return self
        raise InputError(f"unsupported gate {name}{qubits}")

    def x(self, q):
        return self.gate("X", q)

    def h(self, q):
        return self.gate("H", q)

    def cx(self, c, t):
        return self.gate("CX", c, t)

    def clifford(self, gates: Sequence[Gate]) -> "Circuit":
        for g in gates:
            self.gate(g[0], *g[1:])
        return self

    def measure_all(self) -> "Circuit":
        self.ops.append(("MEASURE",))
        return self

    def copy(self) -> "Circuit":
        return Circuit(self.n_qubits, list(self.ops))

    @property
    def n_params(self) -> int:
        idx = [op.param for op in self.ops if isinstance(op, PauliExp) and op.param is not None]
        return max(idx) + 1 if idx else 0

    def to_list(self) -> list[dict]:
        out = []
        for op in self.ops:
            if isinstance(op, PauliExp):
                out.append({"name": "pauli_exp", "pauli": op.word.to_string(),
                            "param": op.param, "angle": op.angle})
            elif op[0] == "MEASURE":
                out.append({"name": "measure_all"})
            else:
                out.append({"name": op[0], "targets": list(op[1:])})
        return out


def zero_state(n_qubits: int) -> np.ndarray:
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def _apply_h(psi, q):
    v = psi.reshape(-1, 2, 1 << q)
    a, b = v[:, 0, :].copy(), v[:, 1, :].copy()
    s = 1 / math.sqrt(2)
    v[:, 0, :] = s * (a + b)
    v[:, 1, :] = s * (a - b)


def _apply_phase(psi, q, ph):
    psi.reshape(-1, 2, 1 << q)[:, 1, :] *= ph


def _apply_cx(psi, c, t):
    idx = np.arange(psi.size)
    sel = idx[((idx >> c) & 1 == 1) & ((idx >> t) & 1 == 0)]
    other = sel | (1 << t)
    psi[sel], psi[other] = psi[other].copy(), psi[sel].copy()


def _apply_pauli_word(psi, word: PauliWord):
    kernels.apply_pauli_inplace(psi, word.x, word.z)


def _apply_op(psi, op, params):
    if isinstance(op, PauliExp):
        kernels.pauli_rotation_inplace(psi, op.word.x, op.word.z, op.theta(params))
        return
    name = op[0]
    if name == "H":
        _apply_h(psi, op[1])
    elif name == "S":
        _apply_phase(psi, op[1], 1j)
    elif name == "SDG":
        _apply_phase(psi, op[1], -1j)
    elif name == "X":
        kernels.apply_pauli_inplace(psi, 1 << op[1], 0)
    elif name == "CX":
        _apply_cx(psi, op[1], op[2])
    elif name != "MEASURE":
        raise InputError(f"unknown op {op!r}")


def _check_params(circuit: Circuit, params) -> np.ndarray:
    params = np.atleast_1d(np.asarray(params if params is not None else [], dtype=float))
    if len(params) < circuit.n_params:
        raise InputError(f"circuit needs {circuit.n_params} parameters, got {len(params)}")
    return params


def run_statevector(circuit: Circuit, params=()) -> np.ndarray:
    """Exact final state of ``circuit`` from ``|0...0>``."""
    params = _check_params(circuit, params)
    psi = zero_state(circuit.n_qubits)
    for op in circuit.ops:
        _apply_op(psi, op, params)
    return psi


def exact_expectation(state: np.ndarray, op: PauliSum) -> float:
    """<psi|op|psi> for a Hermitian operator.

    Raises:
        InputError: if ``op`` is not Hermitian or sizes disagree.
    """
    if state.size != 1 << op.n_qubits:
        raise InputError(f"state of size {state.size} for a {op.n_qubits}-qubit operator")
    if not op.is_hermitian(1e-10):
        raise InputError("exact_expectation needs a Hermitian operator")
    if not len(op):
        return 0.0
    xs, zs, cs = op.masks()
    vals = kernels.expectations(np.ascontiguousarray(state, dtype=complex), xs, zs)
    total = complex(np.dot(cs, vals))
    norm = float(np.vdot(state, state).real)
    if abs(total.imag) > 1e-10 * max(1.0, abs(total)):
        raise InputError(f"expectation has imaginary part {total.imag:.3e}")
    return total.real / norm


@dataclass(frozen=True)
class NoiseModel:
    """Synthetic device noise.

    Attributes:
        readout_p01: P(read 1 | state 0), scalar or per-qubit list.
        readout_p10: P(read 0 | state 1), scalar or per-qubit list.
        depolarizing_1q: Error probability after each single-qubit gate.
        depolarizing_2q: Error probability per two-qubit gate; a Pauli
            exponential of weight w counts as 2(w-1) such gates.
    """

    readout_p01: float | tuple = 0.02
    readout_p10: float | tuple = 0.03
    depolarizing_1q: float = 0.001
    depolarizing_2q: float = 0.01

    def __post_init__(self):
        for name in ("readout_p01", "readout_p10"):
            v = getattr(self, name)
            if isinstance(v, list):
                object.__setattr__(self, name, tuple(v))
        for p in (*np.atleast_1d(self.readout_p01), *np.atleast_1d(self.readout_p10),
                  self.depolarizing_1q, self.depolarizing_2q):
            if not 0.0 <= float(p) <= 1.0:
                raise InputError(f"noise probability {p} outside [0, 1]")

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls(0.0, 0.0, 0.0, 0.0)

    @classmethod
    def readout_only(cls, p01=0.02, p10=0.03) -> "NoiseModel":
        return cls(p01, p10, 0.0, 0.0)

    def flips(self, n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
        p01 = np.broadcast_to(np.asarray(self.readout_p01, dtype=float), (n_qubits,))
        p10 = np.broadcast_to(np.asarray(self.readout_p10, dtype=float), (n_qubits,))
        return p01, p10

    @property
    def is_noiseless(self) -> bool:
        p01, p10 = np.atleast_1d(self.readout_p01), np.atleast_1d(self.readout_p10)
        return not (p01.any() or p10.any() or self.depolarizing_1q or self.depolarizing_2q)

    def to_dict(self) -> dict:
        conv = lambda v: list(v) if isinstance(v, tuple) else v
        return {"readout_p01": conv(self.readout_p01), "readout_p10": conv(self.readout_p10),
                "depolarizing_1q": self.depolarizing_1q, "depolarizing_2q": self.depolarizing_2q}

    @classmethod
    def from_dict(cls, data: Mapping) -> "NoiseModel":
        unknown = set(data) - {"readout_p01", "readout_p10", "depolarizing_1q", "depolarizing_2q"}
        if unknown:
            raise InputError(f"unknown noise fields {sorted(unknown)}")
        return cls(**data)


def _error_locations(circuit: Circuit, noise: NoiseModel) -> list[tuple[int, tuple[int, ...], float]]:
    """(op index, qubits, probability) for every place a Pauli error may strike."""
    locs = []
    for i, op in enumerate(circuit.ops):
        if isinstance(op, PauliExp):
            sup = op.word.support
            if len(sup) == 1:
                locs.append((i, sup, noise.depolarizing_1q))
            for a, b in zip(sup, sup[1:]):
                # CX ladder: each neighbouring pair is entangled twice
                locs.extend([(i, (a, b), noise.depolarizing_2q)] * 2)
        elif op[0] in _CLIFFORD_1Q:
            locs.append((i, op[1:], noise.depolarizing_1q))
        elif op[0] == "CX":
            locs.append((i, op[1:], noise.depolarizing_2q))
    return [l for l in locs if l[2] > 0]


def _pauli_on(n: int, qubits: tuple[int, ...], code: int) -> PauliWord:
    """Non-identity Pauli number ``code`` (1..4^k-1) on ``qubits``."""
    x = z = 0
    for j, q in enumerate(qubits):
        d = (code >> (2 * j)) & 3  # 1 = X, 2 = Z, 3 = Y
        if d & 1:
            x |= 1 << q
        if d & 2:
            z |= 1 << q
    return PauliWord(n, x, z)


def _probabilities(psi: np.ndarray) -> np.ndarray:
    p = np.abs(psi) ** 2
    return p / p.sum()


def sample(circuit: Circuit, params=(), shots: int = 24000, noise: NoiseModel | None = None,
           seed: int | None = None, circuit_id: str = "c0") -> ShotTable:
    """Draw ``shots`` terminal measurements of every qubit.

    Deterministic in ``(seed, circuit, params, shots, noise)``.
    """
    if shots <= 0:
        raise InputError("shots must be positive")
    params = _check_params(circuit, params)
    noise = noise or NoiseModel.noiseless()
    n = circuit.n_qubits
    rng = np.random.default_rng(seed)
    locs = _error_locations(circuit, noise)
    outcomes = np.empty(shots, dtype=np.int64)
    if locs:
        probs = np.array([l[2] for l in locs])
        hit = rng.random((shots, len(locs))) < probs
        codes = np.array([rng.integers(1, 4 ** len(l[1]), size=shots) for l in locs]).T
        pattern = np.where(hit, codes, 0)
        uniq, inverse = np.unique(pattern, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
    else:
        uniq, inverse = np.zeros((1, 0), dtype=np.int64), np.zeros(shots, dtype=np.int64)
    for u, row in enumerate(uniq):
        members = np.flatnonzero(inverse == u)
        after: dict[int, list[PauliWord]] = {}
        for (i, qubits, _), code in zip(locs, row):
            if code:
                after.setdefault(i, []).append(_pauli_on(n, qubits, int(code)))
        psi = zero_state(n)
        for i, op in enumerate(circuit.ops):
            _apply_op(psi, op, params)
            for err in after.get(i, ()):
                _apply_pauli_word(psi, err)
        outcomes[members] = rng.choice(psi.size, size=members.size, p=_probabilities(psi))
    p01, p10 = noise.flips(n)
    if p01.any() or p10.any():
        bits = (outcomes[:, None] >> np.arange(n)) & 1
        flip_p = np.where(bits == 0, p01, p10)
        flips = rng.random((shots, n)) < flip_p
        outcomes ^= (flips.astype(np.int64) << np.arange(n)).sum(axis=1)
    vals, cnt = np.unique(outcomes, return_counts=True)
    counts = {int_to_bits(int(v), n): int(c) for v, c in zip(vals, cnt)}
    return ShotTable(circuit_id, counts, shots, seed)


class StatevectorBackend:
    """Exact expectations; no sampling noise."""

    name = "statevector"
    exact = True

    def state(self, circuit: Circuit, params=()) -> np.ndarray:
        return run_statevector(circuit, params)

    def expectation(self, circuit: Circuit, params, op: PauliSum) -> float:
        return exact_expectation(run_statevector(circuit, params), op)

    def prepare_basis(self, bits: str, shots: int = 24000, seed: int | None = None) -> ShotTable:
        return ShotTable(f"basis_{bits}", {bits: shots}, shots, seed)


class ShotsBackend:
    """Sampling backend; every call draws a fresh child seed from one root seed."""

    name = "shots"
    exact = False

    def __init__(self, noise: NoiseModel | None = None, shots: int = 24000, seed: int | None = 0):
        if shots <= 0:
            raise InputError("shots must be positive")
        self.noise = noise or NoiseModel.noiseless()
        self.shots = shots
        self.root_seed = seed
        self._seq = np.random.SeedSequence(seed)

    def next_seed(self) -> int:
        child = self._seq.spawn(1)[0]
        return int(child.generate_state(1, dtype=np.uint32)[0])

    def run(self, circuit: Circuit, params=(), shots: int | None = None, seed: int | None = None,
            circuit_id: str = "c0") -> ShotTable:
        seed = self.next_seed() if seed is None else seed
        return sample(circuit, params, shots or self.shots, self.noise, seed, circuit_id)

    def prepare_basis(self, bits: str, shots: int | None = None, seed: int | None = None) -> ShotTable:
        """Measure a computational basis state prepared with X gates."""
        c = Circuit(len(bits))
        for q, b in enumerate(bits):
            if b == "1":
                c.x(q)
        return self.run(c.measure_all(), (), shots, seed, circuit_id=f"basis_{bits}")


def make_backend(kind: str, noise: NoiseModel | None = None, shots: int = 24000, seed: int | None = 0):
    if kind == "statevector":
        return StatevectorBackend()
    if kind == "shots":
        return ShotsBackend(noise, shots, seed)
    raise InputError(f"unknown backend {kind!r}")
