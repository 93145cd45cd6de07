"""Clifford gates (H, S, S†, CX) acting on Pauli words by conjugation."""
from __future__ import annotations

from typing import Sequence

from .errors import DimensionError, InputError
from .pauli import PauliWord, multiply

Gate = tuple  # ("H", q) | ("S", q) | ("SDG", q) | ("CX", control, target)

_ARITY = {"H": 1, "S": 1, "SDG": 1, "CX": 2}


def check_gate(gate: Gate, n_qubits: int) -> None:
    name = gate[0]
    if name not in _ARITY:
        raise InputError(f"unknown Clifford gate {name!r}")
    qubits = gate[1:]
    if len(qubits) != _ARITY[name]:
        raise InputError(f"{name} takes {_ARITY[name]} qubit(s), got {len(qubits)}")
    if any(not 0 <= q < n_qubits for q in qubits) or len(set(qubits)) != len(qubits):
        raise DimensionError(f"bad qubits {qubits} for {n_qubits}-qubit gate {name}")


def _generator_image(gate: Gate, kind: str, q: int, n: int) -> tuple[complex, PauliWord]:
    """G P G† for P = X_q or Z_q."""
    name = gate[0]
    w = PauliWord.from_letters(n, {q: kind})
    if name == "CX":
        c, t = gate[1], gate[2]
        if kind == "X" and q == c:
            return 1, PauliWord.from_letters(n, {c: "X", t: "X"})
        if kind == "Z" and q == t:
            return 1, PauliWord.from_letters(n, {c: "Z", t: "Z"})
        return 1, w
    if q != gate[1]:
        return 1, w
    if name == "H":
        return 1, PauliWord.from_letters(n, {q: "Z" if kind == "X" else "X"})
    if kind == "Z":
        return 1, w
    # S X S† = Y ; S† X S = -Y
    return (1 if name == "S" else -1), PauliWord.from_letters(n, {q: "Y"})


def conjugate(word: PauliWord, gate: Gate, phase: complex = 1) -> tuple[complex, PauliWord]:
    """Return ``(p, w)`` with ``G (phase * word) G† = p w``."""
    n = word.n_qubits
    touched = set(gate[1:])
    if not any(((word.x | word.z) >> q) & 1 for q in touched):
        return phase, word
    ph = phase * (1, 1j, -1, -1j)[bin(word.x & word.z).count("1") % 4]
    acc = PauliWord.identity(n)
    # canonical form is i^{|x&z|} X^x Z^z: X factors first, then Z factors
    for kind, mask in (("X", word.x), ("Z", word.z)):
        for q in range(n):
            if (mask >> q) & 1:
                if q in touched:
                    p, img = _generator_image(gate, kind, q, n)
                else:
                    p, img = 1, PauliWord.from_letters(n, {q: kind})
                p2, acc = multiply(acc, img, 1, p)
                ph *= p2
    return ph, acc


def conjugate_circuit(word: PauliWord, gates: Sequence[Gate], phase: complex = 1) -> tuple[complex, PauliWord]:
    for g in gates:
        phase, word = conjugate(word, g, phase)
    return phase, word


def cz(a: int, b: int) -> list[Gate]:
    return [("H", b), ("CX", a, b), ("H", b)]
