"""Grouping of Pauli terms into commuting sets and their measurement.

Each set is rotated by a Clifford circuit into a product of Z operators, so
every member (and every attached symmetry) is read off as a signed parity of
a subset of output bits.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .clifford import Gate, conjugate_circuit, cz
from .errors import InputError, PbcError
from .pauli import PauliSum, PauliWord, commutes, qubitwise_commutes
from .symmetry import SymmetryOperator

STRATEGIES = ("general", "qubitwise")


@dataclass
class CommutingSet:
    members: list[PauliWord]
    attached_symmetries: list[SymmetryOperator] = field(default_factory=list)

    @property
    def n_qubits(self) -> int:
        return self.members[0].n_qubits

    def is_valid(self) -> bool:
        ms = self.members
        ok = all(commutes(a, b) for i, a in enumerate(ms) for b in ms[i + 1:])
        return ok and all(commutes(s.word, m) for s in self.attached_symmetries for m in ms)


def _relation(strategy: str):
    if strategy == "general":
        return commutes
    if strategy == "qubitwise":
        return qubitwise_commutes
    raise InputError(f"unknown grouping strategy {strategy!r}; use one of {STRATEGIES}")


def partition_commuting(terms: Sequence[PauliWord], strategy: str = "general") -> list[CommutingSet]:
    """Greedy largest-degree-first colouring of the conflict graph.

    Args:
        terms: Words to group. Identity words are skipped, duplicates kept once.
        strategy: ``"general"`` or ``"qubitwise"`` commutation.

    Returns:
        Sets in colour order, members in input order.
    """
    ok = _relation(strategy)
    words: list[PauliWord] = []
    seen = set()
    for w in terms:
        if w.is_identity() or w in seen:
            continue
        if words and w.n_qubits != words[0].n_qubits:
            raise InputError("terms must share a qubit count")
        seen.add(w)
        words.append(w)
    n = len(words)
    conflict = [[j for j in range(n) if j != i and not ok(words[i], words[j])] for i in range(n)]
    order = sorted(range(n), key=lambda i: (-len(conflict[i]), i))
    colour = [-1] * n
    for i in order:
        used = {colour[j] for j in conflict[i] if colour[j] >= 0}
        c = 0
        while c in used:
            c += 1
        colour[i] = c
    n_colours = max(colour, default=-1) + 1
    return [CommutingSet([words[i] for i in range(n) if colour[i] == c]) for c in range(n_colours)]


def attach_symmetries(sets: Sequence[CommutingSet], syms: Sequence[SymmetryOperator]) -> list[CommutingSet]:
    out = []
    for s in sets:
        extra = [y for y in syms if all(commutes(y.word, m) for m in s.members)
                 and y not in s.attached_symmetries]
        out.append(CommutingSet(list(s.members), list(s.attached_symmetries) + extra))
    return out


@dataclass(frozen=True)
class ResultMap:
    """Measured eigenvalue = sign * (-1)^(parity of ``bits``)."""

    bits: tuple[int, ...]
    sign: int

    def mask(self) -> int:
        m = 0
        for b in self.bits:
            m |= 1 << b
        return m


@dataclass
class PlanEntry:
    circuit_id: str
    n_qubits: int
    circuit: list[Gate]
    members: list[PauliWord]
    result_map: dict[PauliWord, ResultMap]
    symmetries: list[SymmetryOperator]
    symmetry_map: list[ResultMap]

    def to_dict(self) -> dict:
        return {
            "circuit_id": self.circuit_id,
            "n_qubits": self.n_qubits,
            "circuit": [list(g) for g in self.circuit],
            "result_map": [{"pauli": w.to_string(), "bits": list(r.bits), "sign": r.sign}
                           for w, r in self.result_map.items()],
            "symmetries": [{"pauli": s.word.to_string(), "sign": s.sign, "bits": list(r.bits),
                            "map_sign": r.sign} for s, r in zip(self.symmetries, self.symmetry_map)],
        }


@dataclass
class MeasurementPlan:
    entries: list[PlanEntry]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i) -> PlanEntry:
        return self.entries[i]

    def entry_for(self, word: PauliWord) -> PlanEntry:
        for e in self.entries:
            if word in e.result_map:
                return e
        raise InputError(f"no measurement circuit covers {word}")

    def to_dict(self) -> dict:
        return {"circuits": [e.to_dict() for e in self.entries]}

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


def _independent(words: Iterable[PauliWord]) -> list[PauliWord]:
    """Maximal GF(2)-independent subset, in input order."""
    basis: dict[int, int] = {}
    chosen = []
    for w in words:
        n = w.n_qubits
        v = w.z | (w.x << n)
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                chosen.append(w)
                break
            v ^= basis[top]
    return chosen


def _diagonalize(gens: list[PauliWord], n: int) -> list[Gate]:
    circuit: list[Gate] = []

    def current(w):
        return conjugate_circuit(w, circuit)[1]

    for g in gens:
        cur = current(g)
        if cur.x == 0:
            continue
        q = (cur.x & -cur.x).bit_length() - 1
        if cur.letter(q) == "Y":
            circuit.append(("SDG", q))
        cur = current(g)
        for j in range(n):
            if j != q and (cur.x >> j) & 1:
                circuit.append(("CX", q, j))
        cur = current(g)
        for j in range(n):
            if j != q and (cur.z >> j) & 1:
                circuit.extend(cz(q, j))
        cur = current(g)
        if cur.letter(q) == "Y":
            circuit.append(("SDG", q))
        circuit.append(("H", q))
        cur = current(g)
        if cur.x:
            raise PbcError(f"measurement synthesis failed on generator {g}")
    return circuit


def _read_map(word: PauliWord, circuit: Sequence[Gate]) -> ResultMap:
    phase, img = conjugate_circuit(word, circuit)
    if img.x != 0 or abs(phase.imag if isinstance(phase, complex) else 0) > 1e-12:
        raise PbcError(f"circuit does not diagonalize {word}: got {phase} * {img}")
    sign = int(round(complex(phase).real))
    if sign not in (1, -1):
        raise PbcError(f"non-Hermitian image for {word}")
    return ResultMap(tuple(q for q in range(img.n_qubits) if (img.z >> q) & 1), sign)


def synthesize_measurement(cset: CommutingSet, circuit_id: str = "c0") -> PlanEntry:
    """Clifford circuit mapping every member and attached symmetry to a Z product.

    Raises:
        PbcError: if the set is not mutually commuting.
    """
    if not cset.is_valid():
        raise PbcError("synthesize_measurement needs a mutually commuting set")
    n = cset.n_qubits
    words = list(cset.members) + [s.word for s in cset.attached_symmetries]
    circuit = _diagonalize(_independent(words), n)
    result_map = {w: _read_map(w, circuit) for w in cset.members}
    sym_map = [_read_map(s.word, circuit) for s in cset.attached_symmetries]
    return PlanEntry(circuit_id, n, circuit, list(cset.members), result_map,
                     list(cset.attached_symmetries), sym_map)


def build_plan(op, symmetries: Sequence[SymmetryOperator] = (), strategy: str = "general") -> MeasurementPlan:
    """Partition, attach symmetries and synthesize circuits for an operator."""
    words = op.words() if isinstance(op, PauliSum) else list(op)
    sets = attach_symmetries(partition_commuting(words, strategy), symmetries)
    return MeasurementPlan([synthesize_measurement(s, f"c{i}") for i, s in enumerate(sets)])


@dataclass
class ShotTable:
    """Outcome histogram of one measurement circuit.

    ``counts`` maps bitstrings (qubit 0 leftmost) to weights. Weights are
    integers for raw data and may be real after readout correction.
    """

    circuit_id: str
    counts: dict[str, float]
    shots: int | None = None
    seed: int | None = None

    def __post_init__(self):
        lengths = {len(b) for b in self.counts}
        if len(lengths) > 1:
            raise InputError(f"shot table {self.circuit_id}: mixed bitstring lengths {sorted(lengths)}")
        for b, c in self.counts.items():
            if set(b) - {"0", "1"}:
                raise InputError(f"shot table {self.circuit_id}: bad bitstring {b!r}")
            if c < 0:
                raise InputError(f"shot table {self.circuit_id}: negative count for {b}")
        if self.shots is None:
            self.shots = int(round(self.total))

    @property
    def total(self) -> float:
        return float(sum(self.counts.values()))

    @property
    def n_bits(self) -> int:
        return len(next(iter(self.counts))) if self.counts else 0

    def probabilities(self) -> dict[str, float]:
        t = self.total
        if t <= 0:
            raise InputError(f"shot table {self.circuit_id} is empty")
        return {b: c / t for b, c in self.counts.items()}

    def to_dict(self) -> dict:
        counts = {b: (int(c) if float(c).is_integer() else float(c)) for b, c in sorted(self.counts.items())}
        return {"circuit_id": self.circuit_id, "shots": self.shots, "seed": self.seed, "counts": counts}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ShotTable":
        try:
            return cls(str(data["circuit_id"]), {str(k): float(v) for k, v in data["counts"].items()},
                       data.get("shots"), data.get("seed"))
        except (KeyError, TypeError, AttributeError) as exc:
            raise InputError(f"malformed shot table: {exc}") from exc

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path) -> "ShotTable":
        return cls.from_dict(json.loads(Path(path).read_text()))


def bits_to_int(bitstring: str) -> int:
    """Bitstring with qubit 0 leftmost to a little-endian integer."""
    return int(bitstring[::-1], 2) if bitstring else 0


def int_to_bits(v: int, n: int) -> str:
    return format(v, f"0{n}b")[::-1] if n else ""


def parity_sign(outcome: int, rmap: ResultMap) -> int:
    return rmap.sign * (-1 if bin(outcome & rmap.mask()).count("1") % 2 else 1)


def _table_lookup(tables, entry: PlanEntry, index: int) -> ShotTable:
    if isinstance(tables, Mapping):
        if entry.circuit_id not in tables:
            raise InputError(f"missing shot table for circuit {entry.circuit_id}")
        return tables[entry.circuit_id]
    if index >= len(tables):
        raise InputError(f"missing shot table for circuit {entry.circuit_id}")
    return tables[index]


def set_estimate(entry: PlanEntry, table: ShotTable, coefficients: Mapping[PauliWord, float]) -> tuple[float, float]:
    """Mean and standard error of the set's share of the cost."""
    total = table.total
    if total <= 0:
        raise InputError(f"shot table {table.circuit_id} has no shots")
    if table.n_bits != entry.n_qubits:
        raise InputError(f"shot table {table.circuit_id} has {table.n_bits} bits, circuit has {entry.n_qubits}")
    words = [w for w in entry.members if w in coefficients]
    if not words:
        return 0.0, 0.0
    outcomes = np.array([bits_to_int(b) for b in table.counts], dtype=np.int64)
    weights = np.array(list(table.counts.values()), dtype=float)
    values = np.zeros(len(outcomes))
    for w in words:
        r = entry.result_map[w]
        m = r.mask()
        par = np.array([bin(int(o) & m).count("1") & 1 for o in outcomes])
        values += float(np.real(coefficients[w])) * r.sign * (1 - 2 * par)
    mean = float(weights @ values / total)
    n_eff = table.shots if table.shots else total
    if n_eff <= 1:
        return mean, 0.0
    var = float(weights @ (values - mean) ** 2 / total) * n_eff / (n_eff - 1)
    return mean, math.sqrt(max(var, 0.0) / n_eff)


def estimate_expectation(plan: MeasurementPlan, tables, coefficients, constant: float = 0.0) -> tuple[float, float]:
    """Energy-style estimate of ``sum_w c_w <w>`` from per-circuit shot tables.

    Args:
        plan: Measurement plan covering every non-identity word.
        tables: Shot tables, either aligned with ``plan`` or keyed by circuit id.
        coefficients: A ``PauliSum`` or a map word -> real coefficient. The
            identity coefficient is added as a constant.
        constant: Extra additive constant.

    Returns:
        ``(value, stddev)`` with per-set standard errors added in quadrature.
    """
    if isinstance(coefficients, PauliSum):
        coefficients = dict(coefficients.items())
    coeffs = {}
    for w, c in coefficients.items():
        if w.is_identity():
            constant += float(np.real(c))
        else:
            coeffs[w] = c
    covered = set()
    for e in plan:
        covered.update(w for w in e.members if w in coeffs)
    missing = [w for w in coeffs if w not in covered]
    if missing:
        raise InputError(f"no measurement circuit for {missing[0]}")
    value, var = constant, 0.0
    for i, e in enumerate(plan):
        if not any(w in coeffs for w in e.members):
            continue
        m, se = set_estimate(e, _table_lookup(tables, e, i), coeffs)
        value += m
        var += se * se
    return value, math.sqrt(var)
