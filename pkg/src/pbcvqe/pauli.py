"""Pauli words and complex-weighted Pauli sums.

A word on ``n`` qubits is stored as two packed integers ``x`` and ``z`` with
qubit 0 in the lowest bit.  The word denotes ``i**popcount(x & z) X**x Z**z``
so every letter is Hermitian (``Y = iXZ``) and a Hermitian sum has real
coefficients.  Strings render qubit 0 leftmost: ``PauliWord.from_string("XZ")``
is X on qubit 0 and Z on qubit 1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from . import kernels
from .errors import ContractionError, DimensionError, InputError, ResourceError

PRUNE_TOL = 1e-12
MAX_DENSE_QUBITS = 12

_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {v: k for k, v in _LETTERS.items()}
_IPOW = (1, 1j, -1, -1j)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True, order=True)
class PauliWord:
    n_qubits: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.n_qubits < 0:
            raise DimensionError("negative qubit count")
        limit = 1 << self.n_qubits
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise DimensionError(f"bit masks exceed {self.n_qubits} qubits")

    @classmethod
    def from_string(cls, label: str) -> "PauliWord":
        x = z = 0
        for q, ch in enumerate(label.upper()):
            if ch not in _BITS:
                raise InputError(f"invalid Pauli letter {ch!r} in {label!r}")
            xb, zb = _BITS[ch]
            x |= xb << q
            z |= zb << q
        return cls(len(label), x, z)

    @classmethod
    def from_letters(cls, n_qubits: int, letters: Mapping[int, str]) -> "PauliWord":
        """Build from a sparse ``{qubit: letter}`` map, e.g. ``{0: "Y", 1: "X"}``."""
        x = z = 0
        for q, ch in letters.items():
            if not 0 <= q < n_qubits:
                raise DimensionError(f"qubit {q} out of range for {n_qubits} qubits")
            xb, zb = _BITS[ch.upper()]
            x |= xb << q
            z |= zb << q
        return cls(n_qubits, x, z)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliWord":
        return cls(n_qubits, 0, 0)

    @property
    def x_bits(self) -> tuple[int, ...]:
        return tuple((self.x >> q) & 1 for q in range(self.n_qubits))

    @property
    def z_bits(self) -> tuple[int, ...]:
        return tuple((self.z >> q) & 1 for q in range(self.n_qubits))

    def letter(self, q: int) -> str:
        return _LETTERS[((self.x >> q) & 1, (self.z >> q) & 1)]

    def to_string(self) -> str:
        return "".join(self.letter(q) for q in range(self.n_qubits))

    def __str__(self):
        return self.to_string()

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x | self.z
        return tuple(q for q in range(self.n_qubits) if (mask >> q) & 1)

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def is_diagonal(self) -> bool:
        return self.x == 0

    def commutes(self, other: "PauliWord") -> bool:
        return commutes(self, other)

    def __mul__(self, other):
        if isinstance(other, PauliWord):
            return multiply(self, other)
        return NotImplemented


def _check_same(a_n: int, b_n: int) -> None:
    if a_n != b_n:
        raise DimensionError(f"qubit count mismatch: {a_n} vs {b_n}")


def multiply(a: PauliWord, b: PauliWord, phase_a: complex = 1, phase_b: complex = 1) -> tuple[complex, PauliWord]:
    """Return ``(p, c)`` with ``(phase_a a)(phase_b b) = p c``."""
    _check_same(a.n_qubits, b.n_qubits)
    x = a.x ^ b.x
    z = a.z ^ b.z
    k = _popcount(a.x & a.z) + _popcount(b.x & b.z) - _popcount(x & z) + 2 * _popcount(a.z & b.x)
    return phase_a * phase_b * _IPOW[k % 4], PauliWord(a.n_qubits, x, z)


def commutes(a: PauliWord, b: PauliWord) -> bool:
    _check_same(a.n_qubits, b.n_qubits)
    return (_popcount(a.x & b.z) + _popcount(a.z & b.x)) % 2 == 0


def qubitwise_commutes(a: PauliWord, b: PauliWord) -> bool:
    """True when on every qubit the two letters are equal or one is I."""
    _check_same(a.n_qubits, b.n_qubits)
    both = (a.x | a.z) & (b.x | b.z)
    return ((a.x ^ b.x) | (a.z ^ b.z)) & both == 0


class PauliSum:
    """Immutable map ``PauliWord -> complex`` with coefficients pruned at 1e-12."""

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: Mapping[PauliWord, complex] | Iterable[tuple[PauliWord, complex]] = ()):
        self.n_qubits = n_qubits
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[PauliWord, complex] = {}
        for w, c in items:
            _check_same(n_qubits, w.n_qubits)
            acc[w] = acc.get(w, 0) + complex(c)
        self._terms = {w: c for w, c in acc.items() if abs(c) >= PRUNE_TOL}

    @classmethod
    def from_word(cls, word: PauliWord, coeff: complex = 1.0) -> "PauliSum":
        return cls(word.n_qubits, {word: coeff})

    @classmethod
    def from_labels(cls, labels: Mapping[str, complex]) -> "PauliSum":
        """``PauliSum.from_labels({"ZI": 0.5, "XX": -0.2})``"""
        words = [(PauliWord.from_string(k), v) for k, v in labels.items()]
        if not words:
            raise InputError("cannot infer qubit count from an empty label map")
        return cls(words[0][0].n_qubits, words)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(n_qubits, {PauliWord.identity(n_qubits): coeff})

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls(n_qubits)

    @property
    def terms(self) -> dict[PauliWord, complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def words(self) -> list[PauliWord]:
        return list(self._terms)

    def coefficient(self, word: PauliWord) -> complex:
        return self._terms.get(word, 0j)

    def constant(self) -> complex:
        return self.coefficient(PauliWord.identity(self.n_qubits))

    def __len__(self):
        return len(self._terms)

    def __iter__(self) -> Iterator[PauliWord]:
        return iter(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_empty(self) -> bool:
        return not self._terms

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and (self - other).is_empty()

    def __hash__(self):
        return hash((self.n_qubits, frozenset((w, round(c.real, 12), round(c.imag, 12)) for w, c in self._terms.items())))

    def __repr__(self):
        body = " + ".join(f"({c:.6g})*{w}" for w, c in sorted(self._terms.items()))
        return f"PauliSum({self.n_qubits}, {body or '0'})"

    def _coerce(self, other) -> "PauliSum":
        if isinstance(other, PauliSum):
            _check_same(self.n_qubits, other.n_qubits)
            return other
        if isinstance(other, PauliWord):
            return PauliSum.from_word(other)
        if isinstance(other, (int, float, complex, np.number)):
            return PauliSum.identity(self.n_qubits, other)
        raise TypeError(f"cannot combine PauliSum with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        return PauliSum(self.n_qubits, list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return PauliSum(self.n_qubits, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return PauliSum(self.n_qubits, {w: c * other for w, c in self._terms.items()})
        other = self._coerce(other)
        acc: dict[PauliWord, complex] = {}
        for wa, ca in self._terms.items():
            for wb, cb in other._terms.items():
                phase, w = multiply(wa, wb)
                acc[w] = acc.get(w, 0) + phase * ca * cb
        return PauliSum(self.n_qubits, acc)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return self._coerce(other) * self

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def dagger(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {w: c.conjugate() for w, c in self._terms.items()})

    def is_hermitian(self, tol: float = PRUNE_TOL) -> bool:
        return all(abs(c.imag) < tol for c in self._terms.values())

    def real(self) -> "PauliSum":
        return PauliSum(self.n_qubits, {w: c.real for w, c in self._terms.items()})

    def chop(self, tol: float) -> "PauliSum":
        return PauliSum(self.n_qubits, {w: c for w, c in self._terms.items() if abs(c) >= tol})

    def without_identity(self) -> "PauliSum":
        ident = PauliWord.identity(self.n_qubits)
        return PauliSum(self.n_qubits, {w: c for w, c in self._terms.items() if w != ident})

    def masks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(xs, zs, coeffs)`` arrays for the kernels."""
        ws = list(self._terms)
        xs = np.array([w.x for w in ws], dtype=np.uint64)
        zs = np.array([w.z for w in ws], dtype=np.uint64)
        cs = np.array([self._terms[w] for w in ws], dtype=complex)
        return xs, zs, cs

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "terms": [
                {"pauli": w.to_string(), "coeff": [c.real, c.imag]}
                for w, c in sorted(self._terms.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PauliSum":
        try:
            n = int(data["n_qubits"])
            raw = data["terms"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"Pauli-sum document needs n_qubits and terms: {exc}") from None
        terms = []
        for i, entry in enumerate(raw):
            label = entry["pauli"]
            if len(label) != n:
                raise DimensionError(f"terms[{i}]: {label!r} has {len(label)} letters, expected {n}")
            coeff = entry["coeff"]
            if isinstance(coeff, (list, tuple)):
                value = complex(float(coeff[0]), float(coeff[1]) if len(coeff) > 1 else 0.0)
            else:
                value = complex(float(coeff))
            terms.append((PauliWord.from_string(label), value))
        return cls(n, terms)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def loads(cls, text: str) -> "PauliSum":
        return cls.from_dict(json.loads(text))


def as_sum(op) -> PauliSum:
    if isinstance(op, PauliSum):
        return op
    if isinstance(op, PauliWord):
        return PauliSum.from_word(op)
    raise TypeError(f"expected PauliSum or PauliWord, got {type(op).__name__}")


def sum_commutator(a, b) -> PauliSum:
    """``ab - ba``; only anticommuting pairs contribute (twice their product)."""
    a = as_sum(a)
    b = as_sum(b)
    _check_same(a.n_qubits, b.n_qubits)
    acc: dict[PauliWord, complex] = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            if not commutes(wa, wb):
                phase, w = multiply(wa, wb)
                acc[w] = acc.get(w, 0) + 2 * phase * ca * cb
    return PauliSum(a.n_qubits, acc)


def _compress(v: int, keep: list[int]) -> int:
    out = 0
    for new, old in enumerate(keep):
        out |= ((v >> old) & 1) << new
    return out


def restrict_support(op: PauliSum, fixed_bits: Mapping[int, int]) -> PauliSum:
    """Fold qubits held in computational basis states into the coefficients.

    Every fixed qubit must carry only I or Z; a Z on a qubit fixed to ``1``
    flips the sign.  Remaining qubits are renumbered in ascending order.
    """
    n = op.n_qubits
    for q, bit in fixed_bits.items():
        if not 0 <= q < n:
            raise DimensionError(f"fixed qubit {q} out of range for {n} qubits")
        if bit not in (0, 1):
            raise InputError(f"fixed value for qubit {q} must be 0 or 1, got {bit!r}")
    fixed_mask = sum(1 << q for q in fixed_bits)
    ones_mask = sum(1 << q for q, b in fixed_bits.items() if b)
    keep = [q for q in range(n) if not (fixed_mask >> q) & 1]
    acc: dict[PauliWord, complex] = {}
    for w, c in op.items():
        if w.x & fixed_mask:
            bad = next(q for q in sorted(fixed_bits) if (w.x >> q) & 1)
            raise ContractionError(f"term {w} has letter {w.letter(bad)} on fixed qubit {bad}")
        sign = -1 if _popcount(w.z & ones_mask) % 2 else 1
        nw = PauliWord(len(keep), _compress(w.x, keep), _compress(w.z, keep))
        acc[nw] = acc.get(nw, 0) + sign * c
    return PauliSum(len(keep), acc)


def contract(op: PauliSum, fixed_bits: Mapping[int, int]) -> PauliSum:
    """Like :func:`restrict_support` but first drops terms that flip a fixed qubit.

    Such terms have zero expectation on any state that is a product of the
    fixed basis bits with an arbitrary state on the other qubits.
    """
    fixed_mask = sum(1 << q for q in fixed_bits)
    diag = PauliSum(op.n_qubits, {w: c for w, c in op.items() if not w.x & fixed_mask})
    return restrict_support(diag, fixed_bits)


def permute_qubits(op: PauliSum, mapping: Mapping[int, int], n_qubits: int | None = None) -> PauliSum:
    """Relabel qubit ``q`` as ``mapping[q]``; unmapped qubits must be idle."""
    n_new = op.n_qubits if n_qubits is None else n_qubits
    acc = []
    for w, c in op.items():
        x = z = 0
        for q in w.support:
            if q not in mapping:
                raise DimensionError(f"qubit {q} of {w} has no image")
            t = mapping[q]
            x |= ((w.x >> q) & 1) << t
            z |= ((w.z >> q) & 1) << t
        acc.append((PauliWord(n_new, x, z), c))
    return PauliSum(n_new, acc)


def dense_matrix(op) -> np.ndarray:
    op = as_sum(op)
    if op.n_qubits > MAX_DENSE_QUBITS:
        raise ResourceError(f"dense matrix limited to {MAX_DENSE_QUBITS} qubits, got {op.n_qubits}")
    xs, zs, cs = op.masks()
    return kernels.dense_matrix(op.n_qubits, xs, zs, cs)


def _fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis."""
    a = a.copy()
    h = 1
    n = a.shape[-1]
    while h < n:
        a = a.reshape(a.shape[:-1] + (n // (2 * h), 2, h))
        lo = a[..., 0, :] + a[..., 1, :]
        hi = a[..., 0, :] - a[..., 1, :]
        a = np.stack([lo, hi], axis=-2).reshape(a.shape[:-3] + (n,))
        h *= 2
    return a


def from_dense(matrix: np.ndarray, tol: float = PRUNE_TOL) -> PauliSum:
    """Pauli decomposition of a ``2**n x 2**n`` matrix in O(n 4**n)."""
    dim = matrix.shape[0]
    n = dim.bit_length() - 1
    if matrix.shape != (dim, dim) or 1 << n != dim:
        raise DimensionError(f"matrix shape {matrix.shape} is not 2**n square")
    if n > MAX_DENSE_QUBITS:
        raise ResourceError(f"dense decomposition limited to {MAX_DENSE_QUBITS} qubits")
    idx = np.arange(dim)
    terms = []
    for x in range(dim):
        v = matrix[idx ^ x, idx]
        if not np.any(np.abs(v) > tol):
            continue
        coeffs = _fwht(v) / dim
        for z in np.nonzero(np.abs(coeffs) > tol)[0]:
            z = int(z)
            # coefficient of i^{|x&z|} X^x Z^z is conj(i^{|x&z|}) * <Z^z X^x, M>
            terms.append((PauliWord(n, x, z), coeffs[z] * np.conj(_IPOW[_popcount(x & z) % 4])))
    return PauliSum(n, terms).chop(tol)
