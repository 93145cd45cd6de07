"""Z2 Pauli symmetries, sector bookkeeping and qubit tapering."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionError, InputError, SymmetryError
from .pauli import PauliSum, PauliWord, as_sum, commutes, multiply, sum_commutator


@dataclass(frozen=True)
class SymmetryOperator:
    """Pauli word plus the eigenvalue (+1 or -1) it takes in the target sector."""

    word: PauliWord
    sign: int = 1

    def __post_init__(self):
        if self.word.is_identity():
            raise InputError("a symmetry word must not be the identity")
        if self.sign not in (1, -1):
            raise InputError(f"symmetry sign must be +1 or -1, got {self.sign!r}")

    @classmethod
    def from_string(cls, label: str, sign: int = 1) -> "SymmetryOperator":
        return cls(PauliWord.from_string(label), int(sign))

    @property
    def n_qubits(self) -> int:
        return self.word.n_qubits

    def eigenvalue_on(self, bits: Sequence[int]) -> int:
        """Eigenvalue of the word on a computational basis state (Z-type words only)."""
        if not self.word.is_diagonal():
            raise SymmetryError(f"{self.word} is not diagonal in the computational basis")
        return -1 if sum(bits[q] for q in self.word.support) % 2 else 1

    def __str__(self):
        return f"{'+' if self.sign > 0 else '-'}1*{self.word}"


def load_symmetries(path) -> list[SymmetryOperator]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    entries = data["symmetries"] if isinstance(data, dict) else data
    try:
        return [SymmetryOperator.from_string(e["pauli"], int(e["sign"])) for e in entries]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad symmetry entry ({exc})") from None


def dump_symmetries(symmetries: Iterable[SymmetryOperator]) -> str:
    return json.dumps({"symmetries": [{"pauli": s.word.to_string(), "sign": s.sign} for s in symmetries]}, indent=2)


def verify_symmetry(h: PauliSum, s: SymmetryOperator | PauliWord) -> bool:
    word = s.word if isinstance(s, SymmetryOperator) else s
    if h.n_qubits != word.n_qubits:
        raise DimensionError(f"qubit count mismatch: {h.n_qubits} vs {word.n_qubits}")
    return sum_commutator(h, word).is_empty()


def default_sector(symmetries: Iterable[SymmetryOperator | PauliWord], reference: Sequence[int]) -> list[SymmetryOperator]:
    """Signs read off a computational-basis reference occupation."""
    out = []
    for s in symmetries:
        word = s.word if isinstance(s, SymmetryOperator) else s
        out.append(SymmetryOperator(word, SymmetryOperator(word).eigenvalue_on(reference)))
    return out


def parse_bits(bits) -> tuple[int, ...]:
    """Accept ``"0110"`` (qubit 0 leftmost) or a sequence of ints."""
    if isinstance(bits, str):
        if set(bits) - {"0", "1"}:
            raise InputError(f"bit pattern must contain only 0/1, got {bits!r}")
        return tuple(int(c) for c in bits)
    return tuple(int(b) for b in bits)


def _gf2_rank(rows: list[int]) -> int:
    rows = list(rows)
    rank = 0
    while rows:
        pivot = rows.pop()
        if pivot == 0:
            continue
        rank += 1
        low = pivot & -pivot
        rows = [r ^ pivot if r & low else r for r in rows]
    return rank


def find_symmetries(h: PauliSum) -> list[PauliWord]:
    """Basis of Pauli words commuting with every term of ``h`` (GF(2) kernel)."""
    n = h.n_qubits
    # a word (x, z) commutes with term (x', z') iff x.z' + z.x' = 0 mod 2
    rows = [w.z | (w.x << n) for w in h.words() if not w.is_identity()]
    # solve rows . v = 0 with v = (x | z << n) by reducing to echelon form
    width = 2 * n
    pivots: dict[int, int] = {}
    for r in rows:
        for col, pr in pivots.items():
            if (r >> col) & 1:
                r ^= pr
        if r:
            col = r.bit_length() - 1
            for c2 in list(pivots):
                if (pivots[c2] >> col) & 1:
                    pivots[c2] ^= r
            pivots[col] = r
    free = [c for c in range(width) if c not in pivots]
    basis = []
    for f in free:
        v = 1 << f
        for col, pr in pivots.items():
            if (pr >> f) & 1:
                v |= 1 << col
        x = v & ((1 << n) - 1)
        z = v >> n
        basis.append(PauliWord(n, x, z))
    return basis


@dataclass
class TaperingMap:
    n_qubits: int
    removed_qubits: list[int]
    # (sigma_i, tau_i) with U_i = (sigma_i + tau_i)/sqrt(2); sigma is single-qubit
    clifford_conjugation: list[tuple[PauliWord, PauliWord]]
    sector_signs: dict[int, int]
    qubit_relabeling: dict[int, int]
    symmetries: list[SymmetryOperator] = field(default_factory=list)

    @property
    def retained_qubits(self) -> list[int]:
        return sorted(self.qubit_relabeling)

    @property
    def n_tapered(self) -> int:
        return self.n_qubits - len(self.removed_qubits)

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "removed_qubits": self.removed_qubits,
            "clifford_conjugation": [[s.to_string(), t.to_string()] for s, t in self.clifford_conjugation],
            "sector_signs": {str(q): s for q, s in self.sector_signs.items()},
            "qubit_relabeling": {str(q): r for q, r in self.qubit_relabeling.items()},
            "symmetries": [{"pauli": s.word.to_string(), "sign": s.sign} for s in self.symmetries],
        }


def _reduce_generators(symmetries: Sequence[SymmetryOperator]):
    """Pick a pivot qubit per symmetry and eliminate it from the others.

    Returns ``[(pivot, sigma_letter, word, sign)]``.  A Z-type pivot (letter
    Z or Y on the lowest available qubit) gets sigma = X; words with no Z
    component left pivot on an X letter with sigma = Z.
    """
    gens = [[s.word, complex(s.sign)] for s in symmetries]
    out = []
    used: set[int] = set()
    for i in range(len(gens)):
        w, sign = gens[i]
        cand = [q for q in range(w.n_qubits) if (w.z >> q) & 1 and q not in used]
        if cand:
            q, letter, bit = cand[0], "X", "z"
        else:
            cand = [q for q in range(w.n_qubits) if (w.x >> q) & 1 and q not in used]
            if not cand:
                raise InputError(f"symmetry {w} is dependent on the preceding ones")
            q, letter, bit = cand[0], "Z", "x"
        used.add(q)
        for j in range(len(gens)):
            if j == i:
                continue
            wj, sj = gens[j]
            if (getattr(wj, bit) >> q) & 1:
                phase, prod = multiply(wj, w)
                if prod.is_identity():
                    raise InputError("symmetry set is dependent")
                gens[j] = [prod, sj * sign * phase]
        out.append((q, letter, i))
    result = []
    for q, letter, i in out:
        w, sign = gens[i]
        if abs(sign.imag) > 1e-12:
            raise InputError("symmetry products picked up an imaginary phase; words do not commute")
        result.append((q, letter, w, int(round(sign.real))))
    return result


def _conjugate_term(word: PauliWord, coeff: complex, sigma: PauliWord, tau: PauliWord) -> tuple[PauliWord, complex]:
    # U P U with U = (sigma + tau)/sqrt(2), P commuting with tau
    if commutes(word, sigma):
        return word, coeff
    p1, w1 = multiply(word, tau)
    p2, w2 = multiply(w1, sigma)
    return w2, coeff * p1 * p2


def apply_taper(op, tmap: TaperingMap, check: bool = True) -> PauliSum:
    """Taper any operator commuting with the map's symmetries."""
    op = as_sum(op)
    if op.n_qubits != tmap.n_qubits:
        raise DimensionError(f"operator has {op.n_qubits} qubits, map expects {tmap.n_qubits}")
    if check:
        for sigma, tau in tmap.clifford_conjugation:
            if not verify_symmetry(op, tau):
                raise SymmetryError(f"operator does not commute with symmetry {tau}")
    terms = list(op.items())
    for sigma, tau in tmap.clifford_conjugation:
        terms = [_conjugate_term(w, c, sigma, tau) for w, c in terms]
    keep = tmap.retained_qubits
    acc: dict[PauliWord, complex] = {}
    for w, c in terms:
        for (sigma, _), q in zip(tmap.clifford_conjugation, tmap.removed_qubits):
            letter = w.letter(q)
            if letter == "I":
                continue
            if letter != sigma.letter(q):
                raise SymmetryError(f"term {w} is not block-diagonal on removed qubit {q}")
            c = c * tmap.sector_signs[q]
        x = z = 0
        for new, old in enumerate(keep):
            x |= ((w.x >> old) & 1) << new
            z |= ((w.z >> old) & 1) << new
        nw = PauliWord(len(keep), x, z)
        acc[nw] = acc.get(nw, 0) + c
    return PauliSum(len(keep), acc)


def build_tapering_map(n_qubits: int, symmetries: Sequence[SymmetryOperator]) -> TaperingMap:
    if not symmetries:
        return TaperingMap(n_qubits, [], [], {}, {q: q for q in range(n_qubits)}, [])
    for s in symmetries:
        if s.n_qubits != n_qubits:
            raise DimensionError(f"symmetry {s.word} has {s.n_qubits} qubits, expected {n_qubits}")
    for i, a in enumerate(symmetries):
        for b in symmetries[i + 1:]:
            if not commutes(a.word, b.word):
                raise InputError(f"symmetries {a.word} and {b.word} do not commute")
    if _gf2_rank([(s.word.z << n_qubits) | s.word.x for s in symmetries]) < len(symmetries):
        raise InputError("symmetry set is dependent")
    reduced = _reduce_generators(symmetries)
    conj = []
    signs = {}
    for q, letter, w, sign in reduced:
        conj.append((PauliWord.from_letters(n_qubits, {q: letter}), w))
        signs[q] = sign
    removed = [q for q, *_ in reduced]
    keep = [q for q in range(n_qubits) if q not in removed]
    return TaperingMap(
        n_qubits=n_qubits,
        removed_qubits=removed,
        clifford_conjugation=conj,
        sector_signs=signs,
        qubit_relabeling={old: new for new, old in enumerate(keep)},
        symmetries=list(symmetries),
    )


def taper(h: PauliSum, symmetries: Sequence[SymmetryOperator]) -> tuple[PauliSum, TaperingMap]:
    """Remove one qubit per symmetry, restricted to the sector given by the signs.

    The spectrum of the result equals the spectrum of ``h`` on the joint
    eigenspace where each symmetry word takes its ``sign``.
    """
    for s in symmetries:
        if s.n_qubits != h.n_qubits:
            raise DimensionError(f"symmetry {s.word} has {s.n_qubits} qubits, Hamiltonian has {h.n_qubits}")
        if not verify_symmetry(h, s):
            raise SymmetryError(f"{s.word} does not commute with the Hamiltonian")
    tmap = build_tapering_map(h.n_qubits, symmetries)
    return apply_taper(h, tmap, check=False), tmap


def taper_symmetry(s: SymmetryOperator, tmap: TaperingMap) -> SymmetryOperator:
    """Image of an extra symmetry (e.g. one kept for post-selection)."""
    img = apply_taper(PauliSum.from_word(s.word), tmap)
    if len(img) != 1:
        raise SymmetryError(f"{s.word} does not taper to a single Pauli word")
    (word, coeff), = img.items()
    if abs(abs(coeff) - 1) > 1e-9 or abs(coeff.imag) > 1e-9:
        raise SymmetryError(f"{s.word} tapers to a non-Hermitian multiple {coeff}")
    if word.is_identity():
        raise SymmetryError(f"{s.word} becomes a constant after tapering; it is fixed by the sector")
    return SymmetryOperator(word, s.sign * int(round(coeff.real)))


def taper_state_prep(reference_occupation, tmap: TaperingMap) -> tuple[int, ...]:
    """Reference bits on the retained qubits.

    Valid when every symmetry is diagonal; the removed qubits then sit in X
    eigenstates and the retained qubits keep their original values.
    """
    bits = parse_bits(reference_occupation)
    if len(bits) != tmap.n_qubits:
        raise DimensionError(f"reference has {len(bits)} bits, map expects {tmap.n_qubits}")
    for s in tmap.symmetries:
        if not s.word.is_diagonal():
            raise InputError(f"state preparation needs diagonal symmetries, got {s.word}")
        if s.eigenvalue_on(bits) != s.sign:
            raise SymmetryError(f"reference {''.join(map(str, bits))} has {s.word} = {-s.sign:+d}, sector expects {s.sign:+d}")
    return tuple(bits[q] for q in tmap.retained_qubits)


def sector_projector(n_qubits: int, symmetries: Sequence[SymmetryOperator]) -> np.ndarray:
    """Dense projector onto the joint sector; a test oracle."""
    from .pauli import dense_matrix

    proj = np.eye(1 << n_qubits, dtype=complex)
    for s in symmetries:
        proj = proj @ (0.5 * (np.eye(1 << n_qubits) + s.sign * dense_matrix(s.word)))
    return proj


def sector_spectrum(h: PauliSum, symmetries: Sequence[SymmetryOperator]) -> np.ndarray:
    """Eigenvalues of ``h`` restricted to the sector, by dense diagonalisation."""
    from .pauli import dense_matrix

    proj = sector_projector(h.n_qubits, symmetries)
    vals, vecs = np.linalg.eigh(proj)
    basis = vecs[:, vals > 0.5]
    block = basis.conj().T @ dense_matrix(h) @ basis
    return np.linalg.eigvalsh(0.5 * (block + block.conj().T))
