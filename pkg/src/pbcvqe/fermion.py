"""Second-quantised operators on k-point/spin orbitals and their qubit images."""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import DimensionError, InputError
from .pauli import PauliSum, PauliWord


class Spin(IntEnum):
    UP = 0
    DOWN = 1

    @classmethod
    def parse(cls, value) -> "Spin":
        if isinstance(value, Spin):
            return value
        text = str(value).strip().lower()
        if text in ("up", "u", "a", "alpha", "↑", "0", "+"):
            return cls.UP
        if text in ("down", "d", "b", "beta", "↓", "1", "-"):
            return cls.DOWN
        raise InputError(f"unrecognised spin label {value!r}")

    @property
    def arrow(self) -> str:
        return "↑" if self is Spin.UP else "↓"


def _as_k(k) -> tuple[int, int, int]:
    if isinstance(k, int):
        return (k, 0, 0)
    k = tuple(int(v) for v in k)
    return k + (0,) * (3 - len(k))


@dataclass(frozen=True, order=True)
class SpinOrbital:
    k: tuple[int, int, int]
    p: int
    sigma: Spin

    def __post_init__(self):
        object.__setattr__(self, "k", _as_k(self.k))
        object.__setattr__(self, "sigma", Spin.parse(self.sigma))

    @classmethod
    def of(cls, k, p: int, sigma) -> "SpinOrbital":
        return cls(_as_k(k), int(p), Spin.parse(sigma))

    def __str__(self):
        k = self.k[0] if self.k[1:] == (0, 0) else self.k
        return f"({k}, {self.p}, {self.sigma.arrow})"


@dataclass(frozen=True)
class KPointMesh:
    L1: int = 1
    L2: int = 1
    L3: int = 1

    def __post_init__(self):
        if min(self.L1, self.L2, self.L3) < 1:
            raise InputError(f"k-point mesh dimensions must be positive, got {self.dims}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.L1, self.L2, self.L3)

    def contains(self, k) -> bool:
        # -L/2 < k <= L/2, written without fractions
        return all(-L < 2 * v <= L for v, L in zip(_as_k(k), self.dims))

    def is_zero(self, k) -> bool:
        return all(v % L == 0 for v, L in zip(_as_k(k), self.dims))


def conserves_momentum(excitation: Iterable[tuple[SpinOrbital, bool]], mesh: KPointMesh) -> bool:
    """Created minus annihilated crystal momentum vanishes modulo the mesh."""
    total = [0, 0, 0]
    for orb, create in excitation:
        sign = 1 if create else -1
        for a in range(3):
            total[a] += sign * orb.k[a]
    return mesh.is_zero(total)


Ladder = tuple[int, bool]  # (mode, is_creation)


class FermionOperator:
    """Sum of products of ladder operators on integer modes.

    ``FermionOperator({((2, True), (0, False)): 0.5})`` is ``0.5 a†_2 a_0``.
    Products are stored in the order given; :meth:`normal_ordered` gives the
    canonical form (creators before annihilators, each block in descending
    mode order) used for equality.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[Ladder, ...], complex] | None = None):
        acc: dict[tuple[Ladder, ...], complex] = {}
        for key, c in (terms or {}).items():
            key = tuple((int(m), bool(d)) for m, d in key)
            acc[key] = acc.get(key, 0) + complex(c)
        self._terms = {k: c for k, c in acc.items() if abs(c) >= 1e-14}

    @classmethod
    def term(cls, *ladders: Ladder, coeff: complex = 1.0) -> "FermionOperator":
        return cls({tuple(ladders): coeff})

    @classmethod
    def identity(cls, coeff: complex = 1.0) -> "FermionOperator":
        return cls({(): coeff})

    @property
    def terms(self) -> dict[tuple[Ladder, ...], complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self.normal_ordered()._terms

    def max_mode(self) -> int:
        return max((m for key in self._terms for m, _ in key), default=-1)

    def __add__(self, other):
        if isinstance(other, (int, float, complex)):
            other = FermionOperator.identity(other)
        acc = dict(self._terms)
        for k, c in other._terms.items():
            acc[k] = acc.get(k, 0) + c
        return FermionOperator(acc)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float, complex)):
            return FermionOperator({k: c * other for k, c in self._terms.items()})
        acc: dict[tuple[Ladder, ...], complex] = {}
        for ka, ca in self._terms.items():
            for kb, cb in other._terms.items():
                acc[ka + kb] = acc.get(ka + kb, 0) + ca * cb
        return FermionOperator(acc)

    def __rmul__(self, other):
        return self * other

    def dagger(self) -> "FermionOperator":
        return FermionOperator({tuple((m, not d) for m, d in reversed(k)): c.conjugate() for k, c in self._terms.items()})

    def normal_ordered(self) -> "FermionOperator":
        acc: dict[tuple[Ladder, ...], complex] = {}
        for key, c in self._terms.items():
            for k2, c2 in _normal_order_term(key, c):
                acc[k2] = acc.get(k2, 0) + c2
        return FermionOperator(acc)

    def __eq__(self, other):
        if not isinstance(other, FermionOperator):
            return NotImplemented
        return (self - other).is_zero()

    def __repr__(self):
        def fmt(key):
            return " ".join(f"a{'†' if d else ''}_{m}" for m, d in key) or "1"

        return "FermionOperator(" + " + ".join(f"({c:.6g}) {fmt(k)}" for k, c in self._terms.items()) + ")"


def _normal_order_term(key: tuple[Ladder, ...], coeff: complex):
    """Bubble sort into canonical order, emitting contraction terms."""
    out = []
    stack = [(list(key), coeff)]
    while stack:
        ops, c = stack.pop()
        done = True
        for i in range(len(ops) - 1):
            (m1, d1), (m2, d2) = ops[i], ops[i + 1]
            if (not d1 and d2) or (d1 == d2 and m1 < m2):
                done = False
                swapped = ops[:i] + [ops[i + 1], ops[i]] + ops[i + 2:]
                stack.append((swapped, -c))
                if m1 == m2 and d1 != d2:
                    stack.append((ops[:i] + ops[i + 2:], c))
                break
            if d1 == d2 and m1 == m2:
                done = False  # a_p a_p = 0
                c = 0
                break
        if done and c != 0:
            out.append((tuple(ops), c))
    return out


@lru_cache(maxsize=1024)
def _ladder_image(mode: int, create: bool, n_modes: int) -> PauliSum:
    # a†_j = (X_j - iY_j)/2 Z_{<j};  a_j = (X_j + iY_j)/2 Z_{<j}
    lower = (1 << mode) - 1
    xw = PauliWord(n_modes, 1 << mode, lower)
    yw = PauliWord(n_modes, 1 << mode, lower | (1 << mode))
    return PauliSum(n_modes, {xw: 0.5, yw: -0.5j if create else 0.5j})


def jordan_wigner(op: FermionOperator, n_modes: int) -> PauliSum:
    if op.max_mode() >= n_modes:
        raise DimensionError(f"mode {op.max_mode()} out of range for {n_modes} modes")
    total = PauliSum.zero(n_modes)
    for key, c in op.items():
        term = PauliSum.identity(n_modes, c)
        for m, d in key:
            term = term * _ladder_image(m, d, n_modes)
        total = total + term
    return total


def number_operator(n_modes: int, modes: Iterable[int] | None = None) -> FermionOperator:
    modes = range(n_modes) if modes is None else modes
    op = FermionOperator()
    for m in modes:
        op = op + FermionOperator.term((m, True), (m, False))
    return op


# -- excitations -----------------------------------------------------------------


@dataclass(frozen=True)
class Excitation:
    """``a†_A a_I`` (single) or ``a†_A a_I a†_B a_J`` (double)."""

    creators: tuple[SpinOrbital, ...]
    annihilators: tuple[SpinOrbital, ...]

    @property
    def rank(self) -> int:
        return len(self.creators)

    def ladders(self) -> list[tuple[SpinOrbital, bool]]:
        out = []
        for a, i in zip(self.creators, self.annihilators):
            out += [(a, True), (i, False)]
        return out

    def operator(self, index: Mapping[SpinOrbital, int], amplitude: complex = 1.0) -> FermionOperator:
        return FermionOperator.term(*((index[o], d) for o, d in self.ladders()), coeff=amplitude)

    def generator(self, index: Mapping[SpinOrbital, int], amplitude: complex = 1.0) -> FermionOperator:
        """Anti-Hermitian ``t E - (t E)†`` for the unitary ``exp(t E - h.c.)``."""
        t = self.operator(index, amplitude)
        return t - t.dagger()

    def __str__(self):
        return " ".join(f"{lbl}={o}" for lbl, o in zip("AIBJ", [x for pair in zip(self.creators, self.annihilators) for x in pair]))


def _overlapping(occupied, virtual) -> set:
    return set(occupied) & set(virtual)


def generate_uccsd_pbc(occupied: Sequence[SpinOrbital], virtual: Sequence[SpinOrbital], mesh: KPointMesh) -> list[Excitation]:
    """Spin- and momentum-conserving singles then doubles.

    Doubles are unique up to reordering inside the creator and annihilator
    pairs; the stored representative pairs same-spin creator/annihilator and
    is the lexicographically smallest ``(A, I, B, J)``.
    """
    clash = _overlapping(occupied, virtual)
    if clash:
        raise InputError(f"orbitals both occupied and virtual: {sorted(map(str, clash))}")
    out: list[Excitation] = []
    for i in occupied:
        for a in virtual:
            if a.sigma == i.sigma and conserves_momentum([(a, True), (i, False)], mesh):
                out.append(Excitation((a,), (i,)))
    seen = set()
    doubles = []
    for a, b in itertools.combinations(virtual, 2):
        for i, j in itertools.combinations(occupied, 2):
            key = (frozenset((a, b)), frozenset((i, j)))
            if key in seen:
                continue
            reps = [
                (x, y, u, v)
                for (x, u), (y, v) in (((a, b), (i, j)), ((a, b), (j, i)))
                if x.sigma == y.sigma and u.sigma == v.sigma
            ]
            if not reps:
                continue
            seen.add(key)
            x, y, u, v = reps[0]
            cands = [(x, y, u, v), (u, v, x, y)] + ([(x, v, u, y), (u, y, x, v)] if x.sigma == u.sigma else [])
            A, I, B, J = min(cands)
            exc = Excitation((A, B), (I, J))
            if conserves_momentum(exc.ladders(), mesh):
                doubles.append(exc)
    return out + sorted(doubles, key=lambda e: (e.creators[0], e.annihilators[0], e.creators[1], e.annihilators[1]))


# -- amplitude tables ------------------------------------------------------------


@dataclass(frozen=True)
class AmplitudeRow:
    excitation: Excitation
    t: complex


@dataclass(frozen=True)
class AmplitudeTable:
    rows: tuple[AmplitudeRow, ...]

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def amplitudes(self) -> list[complex]:
        return [r.t for r in self.rows]


def screen_amplitudes(table: AmplitudeTable, ratio: float = 5.0) -> AmplitudeTable:
    """Keep rows with ``|t| >= max|t| / ratio`` in input order."""
    if not table.rows:
        raise InputError("cannot screen an empty amplitude table")
    if ratio < 1:
        raise InputError(f"screening ratio must be >= 1, got {ratio}")
    cut = max(abs(r.t) for r in table.rows) / ratio
    return AmplitudeTable(tuple(r for r in table.rows if abs(r.t) >= cut))


_AMP_COLUMNS = ["kA", "pA", "sA", "kI", "pI", "sI", "kB", "pB", "sB", "kJ", "pJ", "sJ", "re", "im"]


def read_amplitude_table(path) -> AmplitudeTable:
    """Read a delimited table; singles leave the B/J columns empty."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader((line for line in fh if not line.lstrip().startswith("#")))
        missing = set(_AMP_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise InputError(f"{path}: missing columns {sorted(missing)}")
        for n, rec in enumerate(reader, start=2):
            try:
                a = SpinOrbital.of(int(rec["kA"]), int(rec["pA"]), rec["sA"])
                i = SpinOrbital.of(int(rec["kI"]), int(rec["pI"]), rec["sI"])
                if (rec["kB"] or "").strip():
                    b = SpinOrbital.of(int(rec["kB"]), int(rec["pB"]), rec["sB"])
                    j = SpinOrbital.of(int(rec["kJ"]), int(rec["pJ"]), rec["sJ"])
                    exc = Excitation((a, b), (i, j))
                else:
                    exc = Excitation((a,), (i,))
                t = complex(float(rec["re"]), float(rec["im"] or 0.0))
            except (TypeError, ValueError) as exc_:
                raise InputError(f"{path}:{n}: {exc_}") from None
            rows.append(AmplitudeRow(exc, t))
    return AmplitudeTable(tuple(rows))


# -- Hamiltonian data --------------------------------------------------------------


@dataclass
class FermionHamiltonianData:
    n_modes: int
    mesh: KPointMesh
    orbital_table: list[SpinOrbital]
    one_body: dict[tuple[int, int], complex] = field(default_factory=dict)
    two_body: dict[tuple[int, int, int, int], complex] = field(default_factory=dict)
    constant: float = 0.0
    unit: str = "hartree"
    # "momentum": k labels are crystal momenta and terms must conserve them.
    # "localized": k labels are unit-cell indices (Wannier picture).
    basis: str = "momentum"

    def index(self) -> dict[SpinOrbital, int]:
        return {o: i for i, o in enumerate(self.orbital_table)}

    def to_fermion_operator(self) -> FermionOperator:
        terms: dict[tuple[Ladder, ...], complex] = {(): self.constant}
        for (p, q), c in self.one_body.items():
            key = ((p, True), (q, False))
            terms[key] = terms.get(key, 0) + c
        for (p, q, r, s), c in self.two_body.items():
            key = ((p, True), (q, False), (r, True), (s, False))
            terms[key] = terms.get(key, 0) + 0.5 * c
        return FermionOperator(terms)

    def qubit_operator(self) -> PauliSum:
        return jordan_wigner(self.to_fermion_operator(), self.n_modes)


def chain_mode(cell: int, orbital: int, spin, orbitals_per_cell: int) -> int:
    """Cell-major, then orbital, then spin (up before down)."""
    return (cell * orbitals_per_cell + orbital) * 2 + int(Spin.parse(spin))


def chain_orbital_table(cells: int, orbitals_per_cell: int) -> list[SpinOrbital]:
    return [
        SpinOrbital.of(c, p, s)
        for c in range(cells)
        for p in range(orbitals_per_cell)
        for s in (Spin.UP, Spin.DOWN)
    ]


def _check_chain(cells: int, modes_per_cell: int) -> int:
    if cells != 2:
        raise InputError(f"only the two-cell chain is supported (got {cells} cells)")
    if modes_per_cell % 2:
        raise InputError(f"modes_per_cell must be even (orbital x spin), got {modes_per_cell}")
    return modes_per_cell // 2


def _pair_double(theta_half: complex, src_cell: int, dst_cell: int, norb: int) -> FermionOperator:
    # a†_{dst,1,↑} a_{src,0,↑} a†_{dst,1,↓} a_{src,0,↓}
    return FermionOperator.term(
        (chain_mode(dst_cell, 1, Spin.UP, norb), True),
        (chain_mode(src_cell, 0, Spin.UP, norb), False),
        (chain_mode(dst_cell, 1, Spin.DOWN, norb), True),
        (chain_mode(src_cell, 0, Spin.DOWN, norb), False),
        coeff=theta_half,
    )


def transqse_cluster(theta: float, cells: int = 2, modes_per_cell: int = 4, single: bool = False) -> FermionOperator:
    """``T - T†`` for the two inter-cell pair excitations sharing amplitude θ/2.

    With ``single=True`` only the first excitation is kept; that generator
    produces the localised state whose translate spans the TransQSE subspace.
    """
    norb = _check_chain(cells, modes_per_cell)
    if norb < 2:
        raise InputError("the pair excitation needs two orbitals per cell")
    t = _pair_double(theta / 2, 0, 1, norb)
    if not single:
        t = t + _pair_double(theta / 2, 1, 0, norb)
    return t - t.dagger()


def fermionic_swap(p: int, q: int) -> FermionOperator:
    """Mode transposition ``1 - (a†_p - a†_q)(a_p - a_q)``; maps a_p to a_q."""
    diff_c = FermionOperator.term((p, True)) - FermionOperator.term((q, True))
    diff_a = FermionOperator.term((p, False)) - FermionOperator.term((q, False))
    return FermionOperator.identity() - diff_c * diff_a


def translation_operator(cells: int = 2, modes_per_cell: int = 4) -> PauliSum:
    """Qubit image of the unitary that moves every cell-0 mode onto cell 1.

    For two cells the shift is a product of disjoint mode transpositions, so
    the result is Hermitian and squares to the identity.
    """
    if cells != 2:
        raise InputError(f"only the two-cell translation (a cell swap) is supported, got {cells} cells")
    if modes_per_cell < 1:
        raise InputError("modes_per_cell must be positive")
    n = cells * modes_per_cell
    if n > 12:
        raise DimensionError(f"translation operator limited to 12 modes, got {n}")
    op = PauliSum.identity(n)
    for m in range(modes_per_cell):
        op = op * jordan_wigner(fermionic_swap(m, m + modes_per_cell), n)
    return op
