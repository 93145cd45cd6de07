"""Experiment orchestration and run-directory persistence."""
from __future__ import annotations

import json
import platform
import shutil
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__, kernels
from ..errors import ValidationError
from ..mitigation import ConfusionModel, calibrate_spam
from ..pauli import PauliSum
from ..simulator import ShotsBackend, StatevectorBackend, exact_expectation, run_statevector
from ..symmetry import SymmetryOperator, load_symmetries
from ..variational import (
    AnsatzSpec,
    OptimizationTrace,
    TransQseCost,
    TransQseProblem,
    VqeCost,
    combine_transqse,
    rotosolve,
    sgd,
)
from .config import ExperimentConfig
from .fixtures import HARTREE_TO_KJMOL
from .ingest import file_kind, load_pauli_sum, read_json, validate_fermion_hamiltonian
from .pipeline import reduce_operators, reduction_from_dict, transqse_operators


def unit_factor(unit: str) -> float:
    """Multiplier taking energies in ``unit`` to kJ/mol."""
    return HARTREE_TO_KJMOL if unit.lower() == "hartree" else 1.0


@dataclass
class PreparedProblem:
    operators: dict[str, PauliSum]
    ansatz: AnsatzSpec
    pmsv_symmetries: list[SymmetryOperator]
    unit: str


def _symmetries(cfg: ExperimentConfig, value) -> list[SymmetryOperator]:
    if value is None:
        return []
    if isinstance(value, str):
        return load_symmetries(cfg.path(value))
    return [SymmetryOperator.from_string(s["pauli"], int(s.get("sign", 1))) for s in value]


def prepare(cfg: ExperimentConfig) -> PreparedProblem:
    """Load the Hamiltonian, reduce it and build the ansatz."""
    path = cfg.path("hamiltonian")
    data = read_json(path)
    kind = file_kind(data)
    if kind == "fermion_hamiltonian":
        ham, errors = validate_fermion_hamiltonian(data)
        if errors:
            raise ValidationError(errors[0].message, f"{path}:{errors[0].location}")
        unit = ham.unit
        if cfg.problem == "transqse":
            ops = transqse_operators(ham, cfg.cells)
        else:
            ops = {"h": ham.qubit_operator()}
    elif kind == "pauli_sum":
        if cfg.problem == "transqse":
            raise ValidationError("transqse needs a fermion Hamiltonian file", "hamiltonian")
        ops = {"h": load_pauli_sum(path)}
        unit = str(data.get("unit", "hartree"))
    else:
        raise ValidationError("expected a Hamiltonian document", str(path))
    reduction = reduction_from_dict(cfg.reduction, lambda p: load_symmetries(cfg.path(p)))
    reduced = reduce_operators(ops, reduction)
    pmsv = _symmetries(cfg, cfg.pmsv_symmetries) if cfg.pmsv_symmetries is not None else reduced.pmsv_symmetries
    spec = cfg.ansatz
    if isinstance(spec, str):
        spec = read_json(cfg.path("ansatz"))
    spec = dict(spec)
    if spec.get("initial_occupation") == "auto":
        spec["initial_occupation"] = reduced.initial_occupation
    ansatz = AnsatzSpec.from_dict(spec)
    return PreparedProblem(reduced.operators, ansatz, pmsv, unit)


@dataclass
class ExperimentResult:
    trace: OptimizationTrace
    final_theta: list[float]
    energy: float
    delta_e_kjmol: float
    stddev_kjmol: float
    e_hf_kjmol: float
    record: dict

    def to_dict(self) -> dict:
        return self.record


def _reference_energy(prob: PreparedProblem, cfg: ExperimentConfig) -> float:
    """Exact energy of the ansatz at zero parameters (the mean-field reference)."""
    psi = run_statevector(prob.ansatz.circuit(), np.zeros(prob.ansatz.n_params))
    vals = {k: exact_expectation(psi, op) for k, op in prob.operators.items()}
    if cfg.problem == "transqse":
        return combine_transqse(vals["h"], vals["h_lambda"], vals["lambda_op"], taylor_order=cfg.taylor_order)[0]
    return vals["h"]


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> ExperimentResult:
    prob = prepare(cfg)
    root = np.random.SeedSequence(cfg.seed)
    cal_seq, run_seq = root.spawn(2)
    cal_seed = int(cal_seq.generate_state(1)[0])
    run_seed = int(run_seq.generate_state(1)[0])
    model = None
    if cfg.backend == "shots":
        backend = ShotsBackend(cfg.noise_model, cfg.shots, run_seed)
        cal = cfg.calibration or {}
        cal_backend = ShotsBackend(cfg.noise_model, cfg.shots, cal_seed)
        model = calibrate_spam(cal_backend, prob.ansatz.n_qubits, int(cal.get("shots", cfg.shots)),
                               cal.get("mode", "per_qubit"), cal_seed)
    else:
        backend = StatevectorBackend()
    common = dict(mitigation=cfg.mitigation, symmetries=prob.pmsv_symmetries, model=model,
                  strategy=cfg.strategy, order=cfg.order)
    if cfg.problem == "transqse":
        problem = TransQseProblem(prob.operators["h"], prob.operators["h_lambda"], prob.operators["lambda_op"],
                                  prob.ansatz, cfg.taylor_order)
        cost = TransQseCost(problem, backend, **common)
    else:
        cost = VqeCost(prob.operators["h"], prob.ansatz, backend, **common)
    theta0 = cfg.theta0 if cfg.theta0 is not None else [1e-5] * prob.ansatz.n_params
    if len(theta0) != prob.ansatz.n_params:
        raise ValidationError(f"theta0 has {len(theta0)} entries, ansatz has {prob.ansatz.n_params}", "theta0")
    opt = dict(cfg.optimizer)
    name = opt.pop("name")
    if name == "rotosolve":
        trace = rotosolve(cost, theta0, omega=2.0, **opt)
    else:
        trace = sgd(cost, theta0, **opt)

    factor = unit_factor(prob.unit)
    e_hf = cfg.e_hf_reference if cfg.e_hf_reference is not None else _reference_energy(prob, cfg) * factor
    final = trace.final
    ev = final.evaluation
    plan = cost.estimator.plan
    record = {
        "name": cfg.name,
        "problem": cfg.problem,
        "backend": cfg.backend,
        "mitigation": cfg.mitigation,
        "unit": prob.unit,
        "final_theta": list(final.params),
        "energy": ev.value,
        "energy_kjmol": ev.value * factor,
        "e_hf_reference_kjmol": e_hf,
        "delta_e_kjmol": ev.value * factor - e_hf,
        "stddev_kjmol": ev.stddev * factor,
        "discard_fraction": ev.discard_fraction,
        "variants_kjmol": {k: {"delta_e": v[0] * factor - e_hf, "stddev": v[1] * factor, "discard_fraction": v[2]}
                           for k, v in sorted(ev.variants.items())},
        "converged": trace.converged,
        "n_steps": len(trace.steps),
        "n_circuits": len(plan) if plan is not None else 0,
        "n_qubits": prob.ansatz.n_qubits,
        "config_hash": cfg.config_hash(),
        "seeds": {"root": cfg.seed, "calibration": cal_seed if cfg.backend == "shots" else None,
                  "sampling": run_seed if cfg.backend == "shots" else None},
        "environment": {"package": __version__, "python": platform.python_version(),
                        "numpy": np.__version__, "kernels": kernels.BACKEND},
    }
    result = ExperimentResult(trace, list(final.params), ev.value, record["delta_e_kjmol"],
                              record["stddev_kjmol"], e_hf, record)
    if out_dir is not None:
        write_run_dir(Path(out_dir), cfg, result, plan, model)
    return result


def _dump(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_run_dir(out: Path, cfg: ExperimentConfig, result: ExperimentResult, plan=None,
                  model: ConfusionModel | None = None) -> None:
    """Persist everything needed to re-run bit-identically.

    Referenced input files are copied under ``inputs/`` and the stored config
    points at the copies.
    """
    out.mkdir(parents=True, exist_ok=True)
    inputs = out / "inputs"
    inputs.mkdir(exist_ok=True)
    raw = cfg.canonical()

    def localize(value):
        src = cfg.path(value)
        shutil.copyfile(src, inputs / src.name)
        return f"inputs/{src.name}"

    for key in ("hamiltonian", "pmsv_symmetries", "ansatz"):
        if isinstance(raw.get(key), str):
            raw[key] = localize(raw[key])
    if raw.get("reduction") and isinstance(raw["reduction"].get("symmetries"), str):
        raw["reduction"]["symmetries"] = localize(raw["reduction"]["symmetries"])
    _dump(out / "config.json", raw)
    _dump(out / "seeds.json", {"root": cfg.seed, **result.record["seeds"],
                               "per_step": [s.evaluation.seeds for s in result.trace.steps]})
    result.trace.to_csv(out / "trace.csv")
    _dump(out / "result.json", result.record)
    if plan is not None:
        _dump(out / "plan.json", plan.to_dict())
    if model is not None:
        _dump(out / "confusion.json", model.to_dict())
