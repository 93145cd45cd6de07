import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pbcvqe.clifford import conjugate, conjugate_circuit
from pbcvqe.errors import InputError
from pbcvqe.measurement import (
    CommutingSet,
    ResultMap,
    ShotTable,
    attach_symmetries,
    build_plan,
    estimate_expectation,
    partition_commuting,
    synthesize_measurement,
)
from pbcvqe.pauli import PauliSum, PauliWord, commutes, qubitwise_commutes
from pbcvqe.symmetry import SymmetryOperator

from conftest import random_hermitian_sum
from helpers import random_circuit, sampled_estimate

W = PauliWord.from_string
HCHAIN_WORDS = [W(s) for s in ("ZI", "IZ", "ZZ", "XX", "YY")]
IRON_WORDS = [W(s) for s in ("ZI", "IZ", "XX", "YY")]


def _labels(cset):
    return [w.to_string() for w in cset.members]


def test_published_groupings():
    assert len(partition_commuting(HCHAIN_WORDS)) == 2
    assert len(partition_commuting(IRON_WORDS)) == 2
    assert [_labels(s) for s in partition_commuting(IRON_WORDS)] == [["ZI", "IZ"], ["XX", "YY"]]


def test_all_z_words_form_one_set():
    words = [PauliWord(5, 0, z) for z in range(1, 32)]
    assert len(partition_commuting(words)) == 1


def test_qubitwise_is_never_coarser(rng):
    for _ in range(20):
        words = random_hermitian_sum(rng, 4, 15).without_identity().words()
        g = partition_commuting(words, "general")
        q = partition_commuting(words, "qubitwise")
        assert len(q) >= len(g)
        assert all(qubitwise_commutes(a, b) for s in q for a in s.members for b in s.members)


@given(st.integers(0, 10**6))
def test_partition_is_complete_and_valid(seed):
    rng = np.random.default_rng(seed)
    words = random_hermitian_sum(rng, 4, 12).without_identity().words()
    sets = partition_commuting(words)
    flat = [w for s in sets for w in s.members]
    assert sorted(flat) == sorted(words)
    assert all(commutes(a, b) for s in sets for a in s.members for b in s.members)
    assert partition_commuting(words) == sets


def test_partition_excludes_identity():
    sets = partition_commuting([PauliWord.identity(2), W("ZI")])
    assert [_labels(s) for s in sets] == [["ZI"]]


def test_attach_examples():
    zz = SymmetryOperator.from_string("ZZ", 1)
    diag = attach_symmetries([CommutingSet([W("ZI"), W("IZ"), W("ZZ")])], [zz])
    assert diag[0].attached_symmetries == [zz]
    single = attach_symmetries([CommutingSet([W("XI")])], [zz])
    assert single[0].attached_symmetries == []


def test_zz_symmetry_attaches_to_both_chain_sets():
    plan = build_plan(HCHAIN_WORDS, [SymmetryOperator.from_string("ZZ", 1)])
    assert len(plan) == 2
    assert all(len(e.symmetries) == 1 for e in plan)


def test_diagonal_set_needs_no_circuit():
    e = synthesize_measurement(CommutingSet([W("ZI"), W("IZ"), W("ZZ")]))
    assert e.circuit == []
    assert e.result_map[W("ZI")] == ResultMap((0,), 1)
    assert e.result_map[W("IZ")] == ResultMap((1,), 1)
    assert e.result_map[W("ZZ")] == ResultMap((0, 1), 1)


def test_single_x_gets_basis_change():
    e = synthesize_measurement(CommutingSet([W("X")]))
    phase, img = conjugate_circuit(W("X"), e.circuit)
    assert img == W("Z") and phase == 1
    assert e.result_map[W("X")] == ResultMap((0,), 1)


def test_xx_yy_circuit_and_signs():
    plan = build_plan(HCHAIN_WORDS, [SymmetryOperator.from_string("ZZ", 1)])
    e = plan[1]
    assert e.circuit == [("CX", 0, 1), ("H", 0)]
    assert e.result_map[W("XX")] == ResultMap((0,), 1)
    assert e.result_map[W("YY")] == ResultMap((0, 1), -1)
    assert e.symmetry_map[0] == ResultMap((1,), 1)


def test_conjugation_rules():
    assert conjugate(W("X"), ("H", 0)) == (1, W("Z"))
    assert conjugate(W("X"), ("S", 0)) == (1, W("Y"))
    assert conjugate(W("X"), ("SDG", 0)) == (-1, W("Y"))
    assert conjugate(W("XI"), ("CX", 0, 1)) == (1, W("XX"))
    assert conjugate(W("IZ"), ("CX", 0, 1)) == (1, W("ZZ"))


def _assert_sound(entry):
    for w, rmap in entry.result_map.items():
        phase, img = conjugate_circuit(w, entry.circuit)
        assert img.x == 0
        assert tuple(q for q in range(img.n_qubits) if (img.z >> q) & 1) == rmap.bits
        assert phase == rmap.sign


def test_random_plans_are_stabilizer_sound(rng):
    for _ in range(100):
        h = random_hermitian_sum(rng, 4, 20).without_identity()
        for e in build_plan(h):
            _assert_sound(e)


def test_random_plans_sample_correctly(rng):
    worst = 0.0
    for i in range(100):
        h = random_hermitian_sum(rng, 4, 10)
        prep = random_circuit(rng, 4)
        value, std, exact = sampled_estimate(h, prep, 4000, i)
        worst = max(worst, abs(value - exact) / max(std, 1e-12))
    assert worst < 5


def test_estimate_table_iv_values():
    plan = build_plan([W("ZI"), W("ZZ")])
    table = ShotTable("c0", {"00": 9910, "11": 90})
    z0, _ = estimate_expectation(plan, [table], {W("ZI"): 1.0})
    zz, sd = estimate_expectation(plan, [table], {W("ZZ"): 1.0})
    assert z0 == pytest.approx(0.982)
    assert zz == pytest.approx(1.0) and sd == 0.0


def test_estimate_adds_constant_and_checks_tables():
    h = PauliSum.from_labels({"II": -0.5, "ZI": 2.0})
    plan = build_plan(h)
    value, _ = estimate_expectation(plan, {"c0": ShotTable("c0", {"10": 10})}, h)
    assert value == pytest.approx(-2.5)
    with pytest.raises(InputError):
        estimate_expectation(plan, {}, h)
    with pytest.raises(InputError):
        estimate_expectation(plan, [ShotTable("c0", {})], h)


def test_standard_error_formula():
    plan = build_plan([W("Z")])
    table = ShotTable("c0", {"0": 3, "1": 1})
    v, sd = estimate_expectation(plan, [table], {W("Z"): 1.0})
    samples = np.array([1, 1, 1, -1])
    assert v == pytest.approx(samples.mean())
    assert sd == pytest.approx(samples.std(ddof=1) / 2)


def test_shot_table_round_trip(tmp_path):
    t = ShotTable("c1", {"01": 5, "10": 7}, shots=12, seed=99)
    path = tmp_path / "t.json"
    t.dump(path)
    back = ShotTable.load(path)
    assert back == t and back.total == 12 and back.n_bits == 2
    assert json.loads(path.read_text())["seed"] == 99


def test_plan_export_lists_gates_and_maps():
    d = build_plan(IRON_WORDS, [SymmetryOperator.from_string("ZZ", 1)]).to_dict()
    assert [c["circuit_id"] for c in d["circuits"]] == ["c0", "c1"]
    assert d["circuits"][1]["circuit"] == [["CX", 0, 1], ["H", 0]]
