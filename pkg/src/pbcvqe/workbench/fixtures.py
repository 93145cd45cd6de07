"""Builders for the shipped synthetic fixtures.

Run ``python -m pbcvqe.workbench.fixtures DIR`` to regenerate the data files.
The coefficients are synthetic; they are chosen so that the reduced problems
have the same shape (term counts, optimal angles, energy scale) as the
published hydrogen-chain and iron examples.
"""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path

from ..fermion import FermionHamiltonianData, KPointMesh, chain_mode, chain_orbital_table
from ..pauli import PauliSum
from ..symmetry import SymmetryOperator, dump_symmetries

HARTREE_TO_KJMOL = 2625.4996394799

# two cells, two spatial orbitals per cell; orbital 0 occupied, orbital 1 empty
HCHAIN_EPS = (-0.6, 1.41535)
HCHAIN_ONSITE_U = 0.4
HCHAIN_PAIR_HOP = 0.18838
HCHAIN_CONSTANT = -1.0
HCHAIN_FIXED_BITS = {2: 0, 3: 0, 4: 1, 5: 1}
HCHAIN_REFERENCE = "11001100"

IRON_THETA_STAR = -0.53038
IRON_DELTA_E_KJMOL = -221.0
IRON_E_HF = -1.0

# symmetries of the contracted 4-qubit chain as printed in the source
EQ10_SYMMETRIES = [("ZIZI", -1), ("IZIZ", -1), ("IZZI", 1)]

PUBLISHED_REFERENCE = {
    "note": "not reproducible: integrals unpublished; values are reference metadata only",
    "table_I_ecorr_kjmol": {
        "BCC": {"CASCI": -236.4, "CCSD": -235.2, "VQE_all": -236.0, "VQE_one": -220.5},
        "FCC": {"CASCI": -281.1, "CCSD": -281.1, "VQE_all": -281.1, "VQE_one": -271.5},
    },
    "hchain_statevector_optimum": {"theta": -0.0928, "delta_e_kjmol": -46.03, "gradient_kjmol": 13},
    "table_IV": {"theta": -0.09283, "noiseless": {"circuit_1": {"00": 0.9910, "11": 0.0090},
                                                 "circuit_2": {"00": 0.4094, "10": 0.5906}},
                 "delta_e_kjmol": {"raw": 24.4, "pmsv": -7.3, "spam": -26.0, "spam+pmsv": -26.3,
                                   "noiseless": -41.7}},
    "table_V": {"theta": -0.53038, "noiseless": {"circuit_1": {"00": 0.7447, "11": 0.2553},
                                                "circuit_2": {"00": 0.0621, "10": 0.9369}},
                "delta_e_kjmol": {"raw": -187.5, "pmsv": -196.3, "spam": -208.8, "spam+pmsv": -213.2,
                                  "noiseless": -221.0}},
}


def _mode(cell, orb, spin):
    return chain_mode(cell, orb, spin, 2)


def hchain_data() -> FermionHamiltonianData:
    """Translation-invariant two-cell chain in a localized (Wannier-like) basis."""
    one = {}
    for cell in range(2):
        for orb, eps in enumerate(HCHAIN_EPS):
            for spin in (0, 1):
                m = _mode(cell, orb, spin)
                one[(m, m)] = eps
    two = {}
    for cell in range(2):
        for orb in range(2):
            a, b = _mode(cell, orb, 0), _mode(cell, orb, 1)
            two[(a, a, b, b)] = HCHAIN_ONSITE_U
            two[(b, b, a, a)] = HCHAIN_ONSITE_U
    for src, dst in ((0, 1), (1, 0)):
        p, q, r, s = _mode(dst, 1, 0), _mode(src, 0, 0), _mode(dst, 1, 1), _mode(src, 0, 1)
        for key in ((p, q, r, s), (r, s, p, q), (q, p, s, r), (s, r, q, p)):
            two[key] = HCHAIN_PAIR_HOP
    return FermionHamiltonianData(8, KPointMesh(2, 1, 1), chain_orbital_table(2, 2), one, two,
                                  HCHAIN_CONSTANT, "hartree", "localized")


def iron_coefficients() -> dict[str, float]:
    """Coefficients of the 4-term tapered iron-style operator.

    With the ansatz ``exp(-i t Y0 X1)|00>`` the energy is
    ``c0 + 2 cz cos 2t + (cxx - cyy) sin 2t``; the numbers put its minimum
    at ``IRON_THETA_STAR`` with ``IRON_DELTA_E_KJMOL`` below ``E(0)``.
    """
    phi = 2 * IRON_THETA_STAR + math.pi
    r = -IRON_DELTA_E_KJMOL / HARTREE_TO_KJMOL / (1 + math.cos(phi))
    a, b = r * math.cos(phi), r * math.sin(phi)
    return {"II": IRON_E_HF - a, "ZI": a / 2, "IZ": a / 2, "XX": b / 2, "YY": -b / 2}


def iron_operator() -> PauliSum:
    return PauliSum.from_labels({k: round(v, 10) for k, v in iron_coefficients().items()})


def fermion_hamiltonian_to_dict(data: FermionHamiltonianData) -> dict:
    def cplx(c):
        c = complex(c)
        return [c.real, c.imag]

    return {
        "n_modes": data.n_modes,
        "unit": data.unit,
        "basis": data.basis,
        "constant": data.constant,
        "mesh": list(data.mesh.dims),
        "orbital_table": [[list(o.k), o.p, o.sigma.name.lower()] for o in data.orbital_table],
        "one_body": [[p, q, *cplx(c)] for (p, q), c in sorted(data.one_body.items())],
        "two_body": [[p, q, r, s, *cplx(c)] for (p, q, r, s), c in sorted(data.two_body.items())],
    }


YX_ANSATZ = {"initial_occupation": "00", "generators": [{"pauli": "YX", "param": 0}]}


def example_configs() -> dict[str, dict]:
    iron = {
        "name": "iron_bcc_vqe",
        "problem": "vqe",
        "hamiltonian": "iron_bcc_tapered.json",
        "pmsv_symmetries": "pmsv_zz_symmetry.json",
        "ansatz": "yx_ansatz.json",
        "theta0": [1e-5],
        "e_hf_reference": IRON_E_HF * HARTREE_TO_KJMOL,
        "optimizer": {"name": "rotosolve", "max_sweeps": 10, "tol": 1e-3},
        "backend": "statevector",
        "seed": 2021,
    }
    iron_noisy = dict(iron, name="iron_bcc_vqe_noisy", backend="shots", shots=24000, mitigation="spam+pmsv",
                      noise={"readout_p01": 0.02, "readout_p10": 0.03,
                             "depolarizing_1q": 0.001, "depolarizing_2q": 0.01})
    iron_sgd = dict(iron, name="iron_bcc_sgd", optimizer={"name": "sgd", "learning_rate": 1.0, "steps": 50,
                                                          "tol": 1e-7})
    chain = {
        "name": "hchain_transqse",
        "problem": "transqse",
        "hamiltonian": "hchain_8mode.json",
        "reduction": {
            "fixed_bits": {str(q): b for q, b in HCHAIN_FIXED_BITS.items()},
            "symmetries": "eq10_symmetries.json",
            "taper": [0, 1],
            "reference": HCHAIN_REFERENCE,
        },
        "ansatz": {"initial_occupation": "auto", "generators": [{"pauli": "YX", "param": 0}]},
        "theta0": [1e-5],
        "taylor_order": 0,
        # the ratio is not a single sinusoid, so a Rotosolve fixed point sits off the minimum
        "optimizer": {"name": "sgd", "learning_rate": 0.2, "steps": 200, "tol": 1e-9},
        "backend": "statevector",
        "seed": 2021,
    }
    chain_noisy = dict(chain, name="hchain_transqse_noisy", backend="shots", shots=24000, mitigation="spam+pmsv",
                       noise=dict(iron_noisy["noise"]),
                       optimizer={"name": "rotosolve", "max_sweeps": 10, "tol": 1e-3})
    return {c["name"]: c for c in (iron, iron_noisy, iron_sgd, chain, chain_noisy)}


# (A, I, B, J, t) rows of the two published amplitude tables; orbitals are (k, p, spin)
_AMP_KEYS = [
    ((1, 7, "d"), (0, 7, "d"), (1, 6, "d"), (0, 6, "d")),
    ((1, 8, "u"), (0, 8, "u"), (1, 6, "d"), (0, 6, "d")),
    ((1, 8, "u"), (0, 8, "u"), (1, 7, "d"), (0, 6, "d")),
    ((1, 9, "u"), (0, 8, "u"), (1, 6, "d"), (0, 6, "d")),
    ((1, 9, "u"), (0, 8, "u"), (1, 7, "d"), (0, 6, "d")),
    ((1, 8, "u"), (0, 8, "u"), (1, 6, "d"), (0, 7, "d")),
    ((1, 8, "u"), (0, 8, "u"), (1, 7, "d"), (0, 7, "d")),
    ((1, 9, "u"), (0, 8, "u"), (1, 6, "d"), (0, 7, "d")),
    ((1, 9, "u"), (0, 8, "u"), (1, 7, "d"), (0, 7, "d")),
    ((1, 8, "u"), (0, 9, "u"), (1, 6, "d"), (0, 6, "d")),
    ((1, 8, "u"), (0, 9, "u"), (1, 7, "d"), (0, 6, "d")),
    ((1, 9, "u"), (0, 9, "u"), (1, 6, "d"), (0, 6, "d")),
    ((1, 9, "u"), (0, 9, "u"), (1, 7, "d"), (0, 6, "d")),
    ((1, 8, "u"), (0, 9, "u"), (1, 6, "d"), (0, 7, "d")),
    ((1, 8, "u"), (0, 9, "u"), (1, 7, "d"), (0, 7, "d")),
    ((1, 9, "u"), (0, 9, "u"), (1, 6, "d"), (0, 7, "d")),
    ((1, 9, "u"), (0, 9, "u"), (1, 7, "d"), (0, 7, "d")),
    ((1, 9, "u"), (0, 9, "u"), (1, 8, "u"), (0, 8, "u")),
]
BCC_AMPLITUDES = [-0.0060, 0.0160, -0.0001, 0.0001, -0.0528, 0.0004, 0.0206, -0.0709, -0.0003,
                  0.0008, -0.0420, 0.0311, -0.0002, -0.4892, -0.0002, -0.0003, 0.0058, -0.0630]
FCC_AMPLITUDES = [-0.0088, -0.0121, -0.0047, -0.0023, 0.0040, -0.0113, 0.0221, -0.0445, -0.0217,
                  0.0069, 0.0050, -0.0320, -0.0083, -0.5839, -0.1017, -0.0053, 0.0009, -0.0499]


def amplitude_csv(values, title: str) -> str:
    lines = [f"# {title}", "kA,pA,sA,kI,pI,sI,kB,pB,sB,kJ,pJ,sJ,re,im"]
    for key, t in zip(_AMP_KEYS, values):
        cells = [str(v) for orb in key for v in orb]
        lines.append(",".join(cells + [f"{t:.4f}", "0"]))
    return "\n".join(lines)


def k2_model() -> dict:
    """Small valid momentum-basis document: one orbital per spin at two k-points."""
    orbitals = [[[k, 0, 0], 0, s] for k in (0, 1) for s in ("up", "down")]
    # modes: 0 (0,up) 1 (0,down) 2 (1,up) 3 (1,down)
    one = [[0, 0, -0.5, 0.0], [1, 1, -0.5, 0.0], [2, 2, 0.2, 0.0], [3, 3, 0.2, 0.0]]
    two = [[2, 0, 1, 3, 0.05, 0.0], [0, 2, 3, 1, 0.05, 0.0],
           [1, 3, 2, 0, 0.05, 0.0], [3, 1, 0, 2, 0.05, 0.0]]
    return {"n_modes": 4, "unit": "hartree", "basis": "momentum", "constant": 0.0, "mesh": [2, 1, 1],
            "orbital_table": orbitals, "one_body": one, "two_body": two}


def corrupt_corpus() -> dict[str, object]:
    """One broken document per validation error class."""
    import copy

    def mutate(fn):
        d = copy.deepcopy(k2_model())
        fn(d)
        return d

    return {
        "parse_error": '{"n_modes": 4, "mesh": [2, 1, 1], "one_body": [[0, 0, -0.5, 0.0],]',
        "momentum_violation": mutate(lambda d: d["two_body"].extend([[2, 0, 1, 1, 0.01, 0.0], [0, 2, 1, 1, 0.01, 0.0]])),
        "hermiticity_violation": mutate(lambda d: d["one_body"].extend([[0, 2, 0.1, 0.0], [2, 0, 0.101, 0.0]])),
        "index_out_of_range": mutate(lambda d: d["one_body"].append([0, 7, 0.1, 0.0])),
        "bad_row_shape": mutate(lambda d: d["two_body"].append([0, 1, 2, 0.1])),
        "bad_n_modes": mutate(lambda d: d.update(n_modes=0)),
        "bad_spin_label": mutate(lambda d: d["orbital_table"].__setitem__(0, [[0, 0, 0], 0, "sideways"])),
        "k_outside_mesh": mutate(lambda d: d["orbital_table"].__setitem__(3, [[5, 0, 0], 0, "down"])),
        "duplicate_entry": mutate(lambda d: d["one_body"].append([0, 0, -0.5, 0.0])),
        "non_numeric_value": mutate(lambda d: d["one_body"].append([1, 0, "x", 0.0])),
        "pauli_non_hermitian": {"n_qubits": 2, "terms": [{"pauli": "XX", "coeff": [0.1, 0.2]}]},
        "pauli_bad_label": {"n_qubits": 2, "terms": [{"pauli": "XQ", "coeff": [0.1, 0.0]}]},
        "pauli_length_mismatch": {"n_qubits": 2, "terms": [{"pauli": "XYZ", "coeff": [0.1, 0.0]}]},
    }


def _write(path: Path, payload) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2)
    path.write_text(text.rstrip("\n") + "\n", encoding="utf-8")


def write_fixtures(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "hchain_8mode.json", fermion_hamiltonian_to_dict(hchain_data()))
    iron = iron_operator().to_dict()
    iron["unit"] = "hartree"
    _write(out / "iron_bcc_tapered.json", iron)
    _write(out / "eq10_symmetries.json", dump_symmetries(SymmetryOperator.from_string(w, s) for w, s in EQ10_SYMMETRIES))
    _write(out / "pmsv_zz_symmetry.json", dump_symmetries([SymmetryOperator.from_string("ZZ", 1)]))
    _write(out / "published_reference.json", PUBLISHED_REFERENCE)
    _write(out / "yx_ansatz.json", YX_ANSATZ)
    for name, cfg in example_configs().items():
        _write(out / f"{name}.json", cfg)
    _write(out / "table2_bcc.csv", amplitude_csv(BCC_AMPLITUDES, "iron BCC, 2 k-points, nonzero doubles"))
    _write(out / "table3_fcc.csv", amplitude_csv(FCC_AMPLITUDES, "iron FCC, 2 k-points, nonzero doubles"))
    _write(out / "k2_model_4mode.json", k2_model())
    (out / "corrupt").mkdir(exist_ok=True)
    for name, doc in corrupt_corpus().items():
        _write(out / "corrupt" / f"{name}.json", doc)


if __name__ == "__main__":
    write_fixtures(Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data"))
