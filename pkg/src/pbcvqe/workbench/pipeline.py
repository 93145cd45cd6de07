"""From a fermion Hamiltonian to the reduced qubit operators a run measures."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..errors import InputError, SymmetryError
from ..fermion import FermionHamiltonianData, translation_operator
from ..pauli import PauliSum, contract, sum_commutator
from ..symmetry import (
    SymmetryOperator,
    TaperingMap,
    apply_taper,
    build_tapering_map,
    default_sector,
    parse_bits,
    taper_state_prep,
    taper_symmetry,
    verify_symmetry,
)


@dataclass
class Reduction:
    """How the full register is cut down.

    Attributes:
        fixed_bits: Qubits held in a basis state and folded into coefficients.
        symmetries: Symmetries of the contracted operator; their signs are
            recomputed from ``reference`` unless ``signs_from_reference`` is off.
        taper: Indices into ``symmetries`` used for tapering. The others are
            carried to the tapered register and used for post-selection.
        reference: Full-register reference occupation, qubit 0 leftmost.
    """

    fixed_bits: dict[int, int] = field(default_factory=dict)
    symmetries: list[SymmetryOperator] = field(default_factory=list)
    taper: list[int] | None = None
    reference: str | None = None
    signs_from_reference: bool = True


@dataclass
class ReducedProblem:
    operators: dict[str, PauliSum]
    tapering_map: TaperingMap | None
    pmsv_symmetries: list[SymmetryOperator]
    initial_occupation: str
    sector: list[SymmetryOperator]


def _contracted_reference(reference: str, fixed_bits: Mapping[int, int]) -> tuple[int, ...]:
    bits = parse_bits(reference)
    for q, b in fixed_bits.items():
        if q >= len(bits) or bits[q] != b:
            raise InputError(f"reference {reference} disagrees with fixed qubit {q}={b}")
    return tuple(b for q, b in enumerate(bits) if q not in fixed_bits)


def reduce_operators(ops: Mapping[str, PauliSum], reduction: Reduction) -> ReducedProblem:
    """Contract the fixed qubits, then taper every operator with the same map.

    Raises:
        SymmetryError: if a tapering symmetry fails to commute with an operator.
    """
    contracted = {k: contract(op, reduction.fixed_bits) if reduction.fixed_bits else op for k, op in ops.items()}
    n = next(iter(contracted.values())).n_qubits
    ref = None
    if reduction.reference is not None:
        ref = _contracted_reference(reduction.reference, reduction.fixed_bits)
    syms = list(reduction.symmetries)
    for s in syms:
        if s.n_qubits != n:
            raise InputError(f"symmetry {s.word} acts on {s.n_qubits} qubits, reduced register has {n}")
    if ref is not None and reduction.signs_from_reference:
        syms = default_sector(syms, ref)
    idx = list(range(len(syms))) if reduction.taper is None else list(reduction.taper)
    tapering = [syms[i] for i in idx]
    carried = [s for i, s in enumerate(syms) if i not in idx]
    for name, op in contracted.items():
        for s in syms:
            if not verify_symmetry(op, s):
                raise SymmetryError(f"{s.word} does not commute with {name}")
    if not tapering:
        occ = "".join(map(str, ref)) if ref is not None else "0" * n
        return ReducedProblem(contracted, None, carried, occ, syms)
    tmap = build_tapering_map(n, tapering)
    reduced = {k: apply_taper(op, tmap, check=False) for k, op in contracted.items()}
    occ = "".join(map(str, taper_state_prep(ref, tmap))) if ref is not None else "0" * (n - len(tmap.removed_qubits))
    return ReducedProblem(reduced, tmap, [taper_symmetry(s, tmap) for s in carried], occ, syms)


def transqse_operators(ham: FermionHamiltonianData, cells: int = 2) -> dict[str, PauliSum]:
    """Qubit images of H, H*Lambda and Lambda for a two-cell chain.

    Raises:
        SymmetryError: if H is not invariant under the cell translation.
    """
    h = ham.qubit_operator()
    lam = translation_operator(cells, ham.n_modes // cells)
    if len(sum_commutator(h, lam).chop(1e-10)):
        raise SymmetryError("Hamiltonian does not commute with the lattice translation")
    return {"h": h, "h_lambda": (h * lam).real(), "lambda_op": lam}


def check_translation_invariance(ham: FermionHamiltonianData, cells: int = 2) -> bool:
    h = ham.qubit_operator()
    lam = translation_operator(cells, ham.n_modes // cells)
    return not len(sum_commutator(h, lam).chop(1e-10))


def reduction_from_dict(data: Mapping | None, load_symmetries) -> Reduction:
    """``load_symmetries`` resolves a path to a symmetry list."""
    if not data:
        return Reduction()
    fixed = {int(k): int(v) for k, v in data.get("fixed_bits", {}).items()}
    syms = data.get("symmetries", [])
    if isinstance(syms, str):
        syms = load_symmetries(syms)
    else:
        syms = [SymmetryOperator.from_string(s["pauli"], int(s.get("sign", 1))) for s in syms]
    taper = data.get("taper")
    return Reduction(fixed, syms, None if taper is None else [int(i) for i in taper],
                     data.get("reference"), bool(data.get("signs_from_reference", True)))


def flatten_symmetries(syms: Sequence[SymmetryOperator]) -> list[dict]:
    return [{"pauli": s.word.to_string(), "sign": s.sign} for s in syms]
