"""Loading and validation of Hamiltonian, Pauli-sum and symmetry files."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..errors import InputError, PbcError, ValidationError
from ..fermion import FermionHamiltonianData, KPointMesh, SpinOrbital, conserves_momentum
from ..pauli import PauliSum

HERMITICITY_TOL = 1e-8
UNITS = ("hartree", "kj/mol")
BASES = ("momentum", "localized")


def read_json(path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read file ({exc.strerror})", str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"parse error: {exc.msg}", f"{path}:{exc.lineno}:{exc.colno}") from None


def _number(v, where) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"expected a number, got {v!r}", where)
    return float(v)


def _index(v, n, where) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"expected an integer mode index, got {v!r}", where)
    if not 0 <= v < n:
        raise ValidationError(f"mode index {v} out of range 0..{n - 1}", where)
    return v


def _rows(data, key, width, n_modes, errors) -> dict:
    out = {}
    rows = data.get(key, [])
    if not isinstance(rows, list):
        errors.append(ValidationError(f"{key} must be a list", key))
        return out
    n_idx = width - 2
    for i, row in enumerate(rows):
        where = f"{key}[{i}]"
        try:
            if not isinstance(row, list) or len(row) != width:
                raise ValidationError(f"expected {width} fields [indices..., re, im], got {row!r}", where)
            idx = tuple(_index(v, n_modes, where) for v in row[:n_idx])
            value = complex(_number(row[n_idx], where), _number(row[n_idx + 1], where))
        except ValidationError as exc:
            errors.append(exc)
            continue
        if idx in out:
            errors.append(ValidationError(f"duplicate entry {list(idx)}", where))
            continue
        out[idx] = (value, where)
    return out


def _orbital_table(data, n_modes, mesh, errors) -> list[SpinOrbital]:
    table = data.get("orbital_table")
    if not isinstance(table, list) or len(table) != n_modes:
        errors.append(ValidationError(f"orbital_table must list {n_modes} rows", "orbital_table"))
        return []
    out = []
    for i, row in enumerate(table):
        where = f"orbital_table[{i}]"
        try:
            if not isinstance(row, list) or len(row) != 3:
                raise ValidationError(f"expected [k, p, sigma], got {row!r}", where)
            orb = SpinOrbital.of(row[0], row[1], row[2])
        except (PbcError, TypeError, ValueError) as exc:
            errors.append(exc if isinstance(exc, ValidationError) else ValidationError(str(exc), where))
            continue
        if mesh is not None and not mesh.contains(orb.k):
            errors.append(ValidationError(f"k-point {orb.k} outside mesh {mesh.dims}", where))
        if orb in out:
            errors.append(ValidationError(f"duplicate orbital {orb}", where))
        out.append(orb)
    return out


def validate_fermion_hamiltonian(data) -> tuple[FermionHamiltonianData | None, list[ValidationError]]:
    """Validate a decoded fermion-Hamiltonian document.

    Returns:
        The data object (``None`` when structurally broken) and every error found.
    """
    errors: list[ValidationError] = []
    if not isinstance(data, dict):
        return None, [ValidationError("top level must be an object", "$")]
    n_modes = data.get("n_modes")
    if isinstance(n_modes, bool) or not isinstance(n_modes, int) or n_modes <= 0:
        return None, [ValidationError(f"n_modes must be a positive integer, got {n_modes!r}", "n_modes")]
    mesh = None
    try:
        mesh = KPointMesh(*data.get("mesh", [1, 1, 1]))
    except (PbcError, TypeError, ValueError) as exc:
        errors.append(ValidationError(f"bad mesh: {exc}", "mesh"))
    unit = str(data.get("unit", "hartree")).lower()
    if unit not in UNITS:
        errors.append(ValidationError(f"unit must be one of {UNITS}", "unit"))
    basis = data.get("basis", "momentum")
    if basis not in BASES:
        errors.append(ValidationError(f"basis must be one of {BASES}", "basis"))
    try:
        constant = _number(data.get("constant", 0.0), "constant")
    except ValidationError as exc:
        errors.append(exc)
        constant = 0.0
    orbitals = _orbital_table(data, n_modes, mesh, errors)
    one = _rows(data, "one_body", 4, n_modes, errors)
    two = _rows(data, "two_body", 6, n_modes, errors)

    for (p, q), (c, where) in one.items():
        partner = one.get((q, p), (0.0, None))[0]
        if abs(c - partner.conjugate()) > HERMITICITY_TOL:
            errors.append(ValidationError(f"Hermiticity violation: h[{p},{q}] = {c} but conj(h[{q},{p}]) = "
                                          f"{partner.conjugate()}", where))
    for (p, q, r, s), (c, where) in two.items():
        partner = two.get((q, p, s, r), (0.0, None))[0]
        if abs(c - partner.conjugate()) > HERMITICITY_TOL:
            errors.append(ValidationError(f"Hermiticity violation: h[{p},{q},{r},{s}] = {c} but "
                                          f"conj(h[{q},{p},{s},{r}]) = {partner.conjugate()}", where))
    if basis == "momentum" and mesh is not None and len(orbitals) == n_modes:
        for table in (one, two):
            for idx, (c, where) in table.items():
                ladders = [(orbitals[m], j % 2 == 0) for j, m in enumerate(idx)]
                if not conserves_momentum(ladders, mesh):
                    errors.append(ValidationError(
                        f"momentum conservation violated by {' '.join(str(orbitals[m]) for m in idx)}", where))
    if errors or mesh is None:
        return None, errors
    ham = FermionHamiltonianData(
        n_modes, mesh, orbitals,
        {k: v for k, (v, _) in one.items()},
        {k: v for k, (v, _) in two.items()},
        constant, unit, basis,
    )
    return ham, []


@dataclass
class HamiltonianSummary:
    n_modes: int
    n_one_body: int
    n_two_body: int
    max_abs: float
    unit: str
    basis: str

    def lines(self) -> list[str]:
        return [
            f"modes: {self.n_modes}",
            f"one-body entries: {self.n_one_body}",
            f"two-body entries: {self.n_two_body}",
            f"largest |coefficient|: {self.max_abs:.6g} {self.unit}",
            f"basis: {self.basis}",
        ]


def summarize(ham: FermionHamiltonianData) -> HamiltonianSummary:
    vals = [abs(v) for v in ham.one_body.values()] + [abs(v) for v in ham.two_body.values()]
    return HamiltonianSummary(ham.n_modes, len(ham.one_body), len(ham.two_body),
                              max(vals, default=0.0), ham.unit, ham.basis)


def ingest_fermion_hamiltonian(path, echo=None) -> FermionHamiltonianData:
    """Load, validate and summarize a fermion Hamiltonian file.

    Args:
        path: JSON file with ``n_modes``, ``mesh``, ``orbital_table``,
            ``one_body`` rows ``[P, Q, re, im]`` and ``two_body`` rows
            ``[P, Q, R, S, re, im]``.
        echo: Callable receiving summary lines (``print`` on the CLI).

    Raises:
        ValidationError: on the first problem found, with its location.
    """
    ham, errors = validate_fermion_hamiltonian(read_json(path))
    if errors:
        first = errors[0]
        raise ValidationError(first.message, f"{path}:{first.location}" if first.location else str(path))
    if echo is not None:
        for line in summarize(ham).lines():
            echo(line)
    return ham


def validate_pauli_sum(data, require_hermitian: bool = True) -> tuple[PauliSum | None, list[ValidationError]]:
    if not isinstance(data, dict) or "n_qubits" not in data or "terms" not in data:
        return None, [ValidationError("Pauli-sum document needs n_qubits and terms", "$")]
    terms = data["terms"]
    if not isinstance(terms, list):
        return None, [ValidationError("terms must be a list", "terms")]
    for i, t in enumerate(terms):
        if not isinstance(t, dict) or "pauli" not in t or "coeff" not in t:
            return None, [ValidationError("each term needs pauli and coeff", f"terms[{i}]")]
        label = t["pauli"]
        if not isinstance(label, str) or set(label) - set("IXYZ"):
            return None, [ValidationError(f"bad Pauli label {label!r}", f"terms[{i}].pauli")]
    try:
        op = PauliSum.from_dict(data)
    except (PbcError, TypeError, ValueError, IndexError) as exc:
        return None, [ValidationError(str(exc), "terms")]
    if require_hermitian and not op.is_hermitian(HERMITICITY_TOL):
        bad = next((i for i, t in enumerate(terms)
                    if isinstance(t["coeff"], list) and len(t["coeff"]) > 1 and abs(t["coeff"][1]) > HERMITICITY_TOL), 0)
        return None, [ValidationError("Hermiticity violation: imaginary coefficient", f"terms[{bad}]")]
    return op, []


def load_pauli_sum(path, require_hermitian: bool = True) -> PauliSum:
    op, errors = validate_pauli_sum(read_json(path), require_hermitian)
    if errors:
        raise ValidationError(errors[0].message, f"{path}:{errors[0].location}")
    return op


def file_kind(data) -> str:
    if isinstance(data, dict):
        if "n_modes" in data:
            return "fermion_hamiltonian"
        if "n_qubits" in data and "terms" in data:
            return "pauli_sum"
        if "symmetries" in data:
            return "symmetries"
    raise InputError("unrecognised document: expected a fermion Hamiltonian, Pauli sum or symmetry set")
