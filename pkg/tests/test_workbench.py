import filecmp
import json

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from pbcvqe.errors import InputError, ValidationError
from pbcvqe.simulator import exact_expectation, run_statevector
from pbcvqe.variational import combine_transqse
from pbcvqe.workbench.config import ExperimentConfig, packaged_data_dir
from pbcvqe.workbench.fixtures import (HARTREE_TO_KJMOL, IRON_DELTA_E_KJMOL, IRON_THETA_STAR, corrupt_corpus,
                                       write_fixtures)
from pbcvqe.workbench.ingest import (file_kind, read_json, validate_fermion_hamiltonian, validate_pauli_sum)
from pbcvqe.workbench.report import convergence_rows, load_run, make_report
from pbcvqe.workbench.runner import prepare, run_experiment
from pbcvqe.workbench.tables import analytic_p00, reproduce_table

DATA = packaged_data_dir()


def refined_optimum(f, lo=-1.0, hi=1.0, n=20001):
    """Dense grid followed by a bounded scalar refinement around the best node."""
    grid = np.linspace(lo, hi, n)
    i = int(np.argmin([f(t) for t in grid]))
    step = grid[1] - grid[0]
    res = minimize_scalar(f, bounds=(grid[i] - step, grid[i] + step), method="bounded",
                          options={"xatol": 1e-12})
    return res.x, res.fun


# fixtures and ingestion

def test_packaged_data_regenerates_identically(tmp_path):
    write_fixtures(tmp_path)
    names = sorted(p.name for p in DATA.iterdir() if p.is_file())
    match, mismatch, errors = filecmp.cmpfiles(DATA, tmp_path, names, shallow=False)
    assert not mismatch and not errors
    corrupt = sorted(p.name for p in (DATA / "corrupt").iterdir())
    _, mismatch, errors = filecmp.cmpfiles(DATA / "corrupt", tmp_path / "corrupt", corrupt, shallow=False)
    assert not mismatch and not errors


@pytest.mark.parametrize("name", sorted(corrupt_corpus()))
def test_corrupt_corpus_rejected(name):
    path = DATA / "corrupt" / f"{name}.json"
    try:
        data = read_json(path)
    except ValidationError:
        assert name == "parse_error"
        return
    if file_kind(data) == "pauli_sum":
        _, errors = validate_pauli_sum(data)
    else:
        _, errors = validate_fermion_hamiltonian(data)
    assert errors


def test_momentum_violation_names_rows():
    _, errors = validate_fermion_hamiltonian(read_json(DATA / "corrupt" / "momentum_violation.json"))
    locations = " ".join(e.location for e in errors)
    assert "two_body[4]" in locations and "two_body[5]" in locations


@pytest.mark.parametrize("name", ["hchain_8mode.json", "k2_model_4mode.json"])
def test_shipped_fermion_fixtures_valid(name):
    ham, errors = validate_fermion_hamiltonian(read_json(DATA / name))
    assert not errors and ham is not None


def test_shipped_pauli_fixture_valid():
    op, errors = validate_pauli_sum(read_json(DATA / "iron_bcc_tapered.json"))
    assert not errors and len(op) == 5


# config

def test_config_defaults():
    cfg = ExperimentConfig.load("iron_bcc_vqe")
    assert cfg.shots == 24000
    assert cfg.order == "spam_first"
    assert cfg.mitigation == "none"


def test_config_overrides_apply():
    cfg = ExperimentConfig.load("iron_bcc_vqe", {"shots": 1000, "seed": None, "backend": "shots"})
    assert cfg.shots == 1000 and cfg.backend == "shots" and cfg.seed == 2021


@pytest.mark.parametrize("patch,field", [
    ({"backend": "qpu"}, "backend"),
    ({"mitigation": "zne"}, "mitigation"),
    ({"shots": 0}, "shots"),
    ({"shots": True}, "shots"),
    ({"seed": -1}, "seed"),
    ({"taylor_order": 2}, "taylor_order"),
    ({"optimizer": {"name": "adam"}}, "optimizer"),
    ({"optimizer": {"name": "sgd", "max_sweeps": 3}}, "optimizer"),
    ({"hamiltonian": "missing.json"}, "hamiltonian"),
    ({"noise": {"readout_p01": 2.0}}, "noise"),
    ({"colour": "red"}, "$"),
])
def test_config_validation_errors(patch, field):
    raw = read_json(DATA / "iron_bcc_vqe.json")
    raw.update(patch)
    with pytest.raises(ValidationError) as exc:
        ExperimentConfig.from_dict(raw, DATA)
    assert exc.value.location == field


def test_config_hash_tracks_file_content(tmp_path):
    raw = read_json(DATA / "iron_bcc_vqe.json")
    for name in ("iron_bcc_tapered.json", "pmsv_zz_symmetry.json", "yx_ansatz.json"):
        (tmp_path / name).write_bytes((DATA / name).read_bytes())
    a = ExperimentConfig.from_dict(raw, tmp_path).config_hash()
    assert a == ExperimentConfig.load("iron_bcc_vqe").config_hash()
    with open(tmp_path / "iron_bcc_tapered.json", "a") as fh:
        fh.write(" ")
    assert ExperimentConfig.from_dict(raw, tmp_path).config_hash() != a


# pipeline and end-to-end runs

def test_chain_reduction_operators():
    prob = prepare(ExperimentConfig.load("hchain_transqse"))
    h = prob.operators["h"]
    coeffs = {w.to_string(): round(c.real, 6) for w, c in h.items()}
    assert coeffs == {"II": -0.78465, "ZI": -1.007675, "IZ": -1.007675, "ZZ": 0.2, "XX": 0.09419, "YY": -0.09419}
    assert prob.ansatz.initial_occupation == "00"
    assert [(s.word.to_string(), s.sign) for s in prob.pmsv_symmetries] == [("ZZ", 1)]


def test_iron_statevector_run_reaches_refined_optimum(tmp_path):
    cfg = ExperimentConfig.load("iron_bcc_vqe")
    res = run_experiment(cfg, tmp_path / "run")
    h = prepare(cfg).operators["h"]
    circ = prepare(cfg).ansatz.circuit()
    theta, e = refined_optimum(lambda t: exact_expectation(run_statevector(circ, [t]), h))
    assert res.final_theta[0] == pytest.approx(theta, abs=1e-8)
    assert res.energy == pytest.approx(e, abs=1e-12)
    assert theta == pytest.approx(IRON_THETA_STAR, abs=1e-8)
    assert res.delta_e_kjmol == pytest.approx(IRON_DELTA_E_KJMOL, abs=1e-3)


def test_chain_statevector_run_reaches_refined_optimum():
    cfg = ExperimentConfig.load("hchain_transqse")
    prob = prepare(cfg)
    res = run_experiment(cfg)
    circ = prob.ansatz.circuit()

    def energy(t):
        psi = run_statevector(circ, [t])
        h0, h1, s1 = (exact_expectation(psi, prob.operators[k]) for k in ("h", "h_lambda", "lambda_op"))
        return combine_transqse(h0, h1, s1)[0]

    theta, e = refined_optimum(energy, -0.5, 0.5)
    assert res.final_theta[0] == pytest.approx(theta, abs=1e-6)
    assert res.energy == pytest.approx(e, abs=1e-10)
    assert theta == pytest.approx(-0.0928, abs=1e-4)
    assert res.delta_e_kjmol == pytest.approx(-46.03, abs=0.01)


def test_noisy_iron_run_is_deterministic(tmp_path):
    cfg = ExperimentConfig.load("iron_bcc_vqe_noisy", {"shots": 4000})
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    files = sorted(p.relative_to(tmp_path / "a").as_posix() for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert {"config.json", "seeds.json", "trace.csv", "result.json", "plan.json", "confusion.json"} <= set(files)
    _, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", files, shallow=False)
    assert not mismatch and not errors


def test_rerun_from_run_directory_config(tmp_path):
    cfg = ExperimentConfig.load("iron_bcc_vqe_noisy", {"shots": 4000})
    first = run_experiment(cfg, tmp_path / "a")
    again = ExperimentConfig.load(tmp_path / "a" / "config.json")
    second = run_experiment(again, tmp_path / "b")
    assert second.record["config_hash"] == first.record["config_hash"]
    assert (tmp_path / "a" / "trace.csv").read_bytes() == (tmp_path / "b" / "trace.csv").read_bytes()


def test_noisy_run_records_all_variants(tmp_path):
    res = run_experiment(ExperimentConfig.load("iron_bcc_vqe_noisy", {"shots": 4000}), tmp_path)
    assert set(res.record["variants_kjmol"]) == {"raw", "spam", "pmsv", "spam+pmsv"}
    assert res.record["n_circuits"] == 2
    assert 0 <= res.record["discard_fraction"] < 0.1


# report

def test_report_outputs(tmp_path):
    run_experiment(ExperimentConfig.load("iron_bcc_vqe_noisy", {"shots": 4000}), tmp_path / "run")
    csv_path, svg_path = make_report(tmp_path / "run", tmp_path / "rep1")
    result, rows = load_run(tmp_path / "run")
    conv = convergence_rows(result, rows)
    assert conv[-1]["delta_e_kjmol"] == pytest.approx(result["delta_e_kjmol"])
    header = csv_path.read_text().splitlines()[0].split(",")
    assert header[:2] == ["step", "theta_0"]
    assert "delta_e_spam+pmsv_kjmol" in header
    assert svg_path.read_text().lstrip().startswith("<?xml")
    _, svg2 = make_report(tmp_path / "run", tmp_path / "rep2")
    assert svg_path.read_bytes() == svg2.read_bytes()


def test_report_missing_run_dir(tmp_path):
    with pytest.raises(InputError):
        load_run(tmp_path / "nope")


def test_statevector_iron_delta_from_hf_reference():
    res = run_experiment(ExperimentConfig.load("iron_bcc_vqe"))
    assert res.e_hf_kjmol == pytest.approx(-HARTREE_TO_KJMOL)


# tables

@pytest.mark.parametrize("flag,published", [("IV", 0.9910), ("V", 0.7447)])
def test_table_reproduction(flag, published):
    rep = reproduce_table(flag, shots=10**6, seed=0)
    r = rep.row("circuit_1", "00")
    assert r.published == published
    assert r.exact == pytest.approx(analytic_p00(rep.theta), abs=1e-12)
    assert abs(r.exact - published) <= 1e-3
    assert abs(r.sampled - published) <= 1e-3
    assert rep.row("circuit_1", "00").sampled + rep.row("circuit_1", "11").sampled == pytest.approx(1.0, abs=1e-15)


def test_table_unknown_flag():
    with pytest.raises(InputError):
        reproduce_table("VI")


def test_table_report_serializes():
    rep = reproduce_table("IV", shots=1000, seed=1)
    doc = json.loads(json.dumps(rep.to_dict()))
    assert doc["table"] == "IV" and len(doc["rows"]) == len(rep.rows)
    assert rep.lines()[0].startswith("Table IV")
