"""Readout (SPAM) correction and symmetry-verified post-selection (PMSV).

SPAM correction inverts a calibrated confusion model and projects the result
back onto the probability simplex.  PMSV drops every shot whose measured
symmetry parities disagree with the target sector.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError, NumericalError
from .measurement import MeasurementPlan, ShotTable, bits_to_int, estimate_expectation, int_to_bits

CONDITION_BOUND = 1e6
MAX_FULL_QUBITS = 10
VARIANTS = ("raw", "spam", "pmsv", "spam+pmsv")


@dataclass
class ConfusionModel:
    """Readout confusion, ``M[observed][prepared]``.

    ``matrices`` holds one 2x2 matrix per qubit in ``per_qubit`` mode, or a
    single 2^n x 2^n matrix (little-endian bit order) in ``full`` mode.
    """

    mode: str
    matrices: list

    def __post_init__(self):
        if self.mode not in ("per_qubit", "full"):
            raise InputError(f"unknown confusion mode {self.mode!r}")
        mats = [np.asarray(m, dtype=float) for m in self.matrices]
        if self.mode == "full" and len(mats) != 1:
            raise InputError("full confusion model holds exactly one matrix")
        for m in mats:
            if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] & (m.shape[0] - 1):
                raise InputError(f"confusion matrix of shape {m.shape} is not 2^k square")
            if self.mode == "per_qubit" and m.shape != (2, 2):
                raise InputError("per-qubit confusion matrices must be 2x2")
            if (m < -1e-12).any() or (m > 1 + 1e-12).any():
                raise InputError("confusion entries must lie in [0, 1]")
            if not np.allclose(m.sum(axis=0), 1.0, atol=1e-9):
                raise InputError("confusion matrix columns must sum to 1")
        if self.mode == "full" and mats[0].shape[0] > 1 << MAX_FULL_QUBITS:
            raise InputError(f"full confusion model limited to {MAX_FULL_QUBITS} qubits")
        self.matrices = mats

    @property
    def n_qubits(self) -> int:
        if self.mode == "per_qubit":
            return len(self.matrices)
        return int(self.matrices[0].shape[0]).bit_length() - 1

    @classmethod
    def identity(cls, n_qubits: int) -> "ConfusionModel":
        return cls("per_qubit", [np.eye(2) for _ in range(n_qubits)])

    @classmethod
    def from_flips(cls, p01, p10, n_qubits: int) -> "ConfusionModel":
        p01 = np.broadcast_to(np.asarray(p01, float), (n_qubits,))
        p10 = np.broadcast_to(np.asarray(p10, float), (n_qubits,))
        return cls("per_qubit", [np.array([[1 - a, b], [a, 1 - b]]) for a, b in zip(p01, p10)])

    def dense(self) -> np.ndarray:
        if self.mode == "full":
            return self.matrices[0]
        out = np.ones((1, 1))
        for m in self.matrices:  # qubit 0 is the least significant index bit
            out = np.kron(m, out)
        return out

    def condition_number(self) -> float:
        if self.mode == "full":
            return float(np.linalg.cond(self.matrices[0]))
        return float(max(np.linalg.cond(m) for m in self.matrices))

    def to_dict(self) -> dict:
        return {"mode": self.mode, "matrices": [m.tolist() for m in self.matrices]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "ConfusionModel":
        try:
            return cls(data["mode"], data["matrices"])
        except KeyError as exc:
            raise InputError(f"confusion model missing field {exc}") from exc

    def dump(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path) -> "ConfusionModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _frequencies(table: ShotTable, n: int) -> np.ndarray:
    p = np.zeros(1 << n)
    for b, c in table.counts.items():
        p[bits_to_int(b)] += c
    if p.sum() <= 0:
        raise InputError(f"shot table {table.circuit_id} is empty")
    return p / p.sum()


def calibrate_spam(backend, n_qubits: int, shots: int, mode: str = "per_qubit",
                   seed: int | None = None) -> ConfusionModel:
    """Estimate the confusion model from basis-state preparations.

    ``per_qubit`` uses the all-zeros and all-ones states; ``full`` prepares
    all 2^n basis states.
    """
    if shots <= 0:
        raise InputError("calibration needs a positive shot count")
    seeds = np.random.SeedSequence(seed).generate_state(2 if mode == "per_qubit" else 1 << n_qubits)

    def run(bits, s):
        return backend.prepare_basis(bits, shots, int(s))

    if mode == "per_qubit":
        p0 = _frequencies(run("0" * n_qubits, seeds[0]), n_qubits)
        p1 = _frequencies(run("1" * n_qubits, seeds[1]), n_qubits)
        idx = np.arange(1 << n_qubits)
        mats = []
        for q in range(n_qubits):
            bit = (idx >> q) & 1
            a = p0[bit == 1].sum()  # read 1 having prepared 0
            b = p1[bit == 0].sum()
            mats.append([[1 - a, b], [a, 1 - b]])
        return ConfusionModel("per_qubit", mats)
    if mode == "full":
        if n_qubits > MAX_FULL_QUBITS:
            raise InputError(f"full calibration limited to {MAX_FULL_QUBITS} qubits")
        cols = [_frequencies(run(int_to_bits(k, n_qubits), seeds[k]), n_qubits) for k in range(1 << n_qubits)]
        return ConfusionModel("full", [np.array(cols).T])
    raise InputError(f"unknown calibration mode {mode!r}")


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto ``{p >= 0, sum p = 1}``."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def _apply_inverse(p: np.ndarray, model: ConfusionModel) -> np.ndarray:
    if model.mode == "full":
        return np.linalg.solve(model.matrices[0], p)
    n = model.n_qubits
    t = p.reshape((2,) * n) if n else p
    for q, m in enumerate(model.matrices):
        axis = n - 1 - q  # C order puts qubit n-1 on axis 0
        t = np.moveaxis(np.tensordot(np.linalg.inv(m), t, axes=([1], [axis])), 0, axis)
    return t.reshape(-1)


def spam_correct_distribution(table: ShotTable, model: ConfusionModel) -> np.ndarray:
    """Corrected probabilities over all 2^n outcomes (little-endian index)."""
    n = table.n_bits
    if n != model.n_qubits:
        raise InputError(f"model covers {model.n_qubits} qubits, table has {n} bits")
    cond = model.condition_number()
    if not math.isfinite(cond) or cond > CONDITION_BOUND:
        raise NumericalError(f"confusion model is ill-conditioned (cond {cond:.3g})")
    return project_simplex(_apply_inverse(_frequencies(table, n), model))


def spam_correct(table: ShotTable, model: ConfusionModel) -> ShotTable:
    """Readout-corrected table; weights are real and keep the original total.

    Raises:
        NumericalError: if the model's condition number exceeds 1e6.
        InputError: on a size mismatch.
    """
    p = spam_correct_distribution(table, model)
    total = table.total
    counts = {int_to_bits(k, table.n_bits): float(v * total) for k, v in enumerate(p) if v > 1e-15}
    return ShotTable(table.circuit_id, counts, table.shots, table.seed)


@dataclass(frozen=True)
class ParityTarget:
    """Keep an outcome only if ``(-1)^(parity of bits) == expected``."""

    bits: tuple[int, ...]
    expected: int

    def __post_init__(self):
        if not self.bits:
            raise InputError("parity target needs at least one bit")
        if self.expected not in (1, -1):
            raise InputError("expected parity sign must be +1 or -1")

    def mask(self) -> int:
        return sum(1 << b for b in set(self.bits))

    def accepts(self, outcome: int) -> bool:
        return (-1 if bin(outcome & self.mask()).count("1") % 2 else 1) == self.expected


def targets_from_plan(plan: MeasurementPlan) -> dict[str, list[ParityTarget]]:
    """Parity targets for each circuit from its attached symmetries.

    A symmetry mapped to the identity carries no information and is skipped.
    """
    out: dict[str, list[ParityTarget]] = {}
    for e in plan:
        ts = []
        for sym, rmap in zip(e.symmetries, e.symmetry_map):
            if rmap.bits:
                ts.append(ParityTarget(rmap.bits, sym.sign * rmap.sign))
            elif sym.sign * rmap.sign != 1:
                raise InputError(f"symmetry {sym.word} is identically {rmap.sign}, target wants {sym.sign}")
        out[e.circuit_id] = ts
    return out


def pmsv_postselect(table: ShotTable, targets: Sequence[ParityTarget]) -> tuple[ShotTable, float]:
    """Drop outcomes violating any parity target.

    Returns:
        ``(filtered, discard_fraction)`` with discard fraction
        ``1 - filtered.total / table.total``.
    """
    if not targets or not table.counts:
        return table, 0.0
    n = table.n_bits
    for t in targets:
        if max(t.bits) >= n:
            raise InputError(f"parity target bit {max(t.bits)} outside {n}-bit table")
    kept = {b: c for b, c in table.counts.items() if all(t.accepts(bits_to_int(b)) for t in targets)}
    total = table.total
    kept_total = float(sum(kept.values()))
    frac = 1.0 - kept_total / total if total > 0 else 0.0
    shots = int(round(table.shots * kept_total / total)) if total > 0 else 0
    return ShotTable(table.circuit_id, kept, shots, table.seed), frac


def _tables_list(plan: MeasurementPlan, tables) -> list[ShotTable]:
    if isinstance(tables, Mapping):
        try:
            return [tables[e.circuit_id] for e in plan]
        except KeyError as exc:
            raise InputError(f"missing shot table for circuit {exc}") from exc
    if len(tables) < len(plan):
        raise InputError("fewer shot tables than measurement circuits")
    return list(tables)


def mitigated_expectation(plan: MeasurementPlan, tables, coefficients, model: ConfusionModel | None = None,
                          targets: Mapping[str, Sequence[ParityTarget]] | None = None,
                          flags: str = "spam+pmsv", order: str = "spam_first",
                          constant: float = 0.0) -> tuple[float, float, float]:
    """Expectation with optional readout correction and post-selection.

    Args:
        flags: One of ``raw`` (alias ``none``), ``spam``, ``pmsv``, ``spam+pmsv``.
        order: ``spam_first`` (default) or ``pmsv_first`` when both are on.

    Returns:
        ``(value, stddev, discard_fraction)``; the discard fraction pools all
        circuits.
    """
    flags = "raw" if flags == "none" else flags
    if flags not in VARIANTS:
        raise InputError(f"unknown mitigation {flags!r}")
    if order not in ("spam_first", "pmsv_first"):
        raise InputError(f"unknown correction order {order!r}")
    use_spam, use_pmsv = "spam" in flags, "pmsv" in flags
    if use_spam and model is None:
        raise InputError("SPAM correction requested without a confusion model")
    if targets is None:
        targets = targets_from_plan(plan) if use_pmsv else {}
    out, before, after = [], 0.0, 0.0
    for e, t in zip(plan, _tables_list(plan, tables)):
        ts = targets.get(e.circuit_id, ())
        tot = t.total
        if use_spam and (order == "spam_first" or not use_pmsv):
            t = spam_correct(t, model)
        if use_pmsv:
            t, frac = pmsv_postselect(t, ts)
            before += tot
            after += tot * (1 - frac)
            if use_spam and order == "pmsv_first":
                t = spam_correct(t, model)
        out.append(t)
    value, std = estimate_expectation(plan, out, coefficients, constant)
    discard = 1.0 - after / before if use_pmsv and before > 0 else 0.0
    return value, std, discard


def all_variants(plan, tables, coefficients, model, targets=None, order="spam_first",
                 constant: float = 0.0) -> dict[str, tuple[float, float, float]]:
    """Every mitigation variant on the same shot tables."""
    out = {}
    for flag in VARIANTS:
        if "spam" in flag and model is None:
            continue
        out[flag] = mitigated_expectation(plan, tables, coefficients, model, targets, flag, order, constant)
    return out
