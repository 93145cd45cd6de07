"""Acceptance checks, one test per primary criterion.

Each test records a ``PASS``/``FAIL`` line with its runtime; the lines are
printed as they finish and again in the terminal summary.
"""
import math
import time
from contextlib import contextmanager

import numpy as np
from scipy.optimize import minimize_scalar

from conftest import random_hermitian_sum
from pbcvqe.fermion import translation_operator
from pbcvqe.measurement import ShotTable, bits_to_int, build_plan, int_to_bits
from pbcvqe.mitigation import ConfusionModel, ParityTarget, pmsv_postselect, spam_correct_distribution
from pbcvqe.pauli import PauliSum, dense_matrix, sum_commutator
from pbcvqe.simulator import NoiseModel, StatevectorBackend, exact_expectation, run_statevector, sample
from pbcvqe.symmetry import SymmetryOperator, sector_spectrum, taper
from pbcvqe.variational import (TransQseCost, TransQseProblem, VqeCost, parameter_shift_gradient, rotosolve,
                                sgd)
from pbcvqe.workbench.config import ExperimentConfig
from pbcvqe.workbench.fixtures import hchain_data, iron_operator
from pbcvqe.workbench.runner import prepare, run_experiment
from pbcvqe.workbench.tables import TABLE_THETA, reproduce_table, yx_circuit

RESULTS: list[str] = []
S = SymmetryOperator.from_string
ZZ = [S("ZZ", 1)]


@contextmanager
def criterion(name: str, budget: float):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - start
        if ok and dt > budget:
            ok = False
            name += f" [over {budget:g} s budget]"
        line = f"{'PASS' if ok else 'FAIL'}  {name}  ({dt:.2f} s)"
        RESULTS.append(line)
        print(line)
    assert ok, f"runtime {dt:.2f} s exceeds {budget} s"


def refined_optimum(f, lo, hi, n=20001):
    grid = np.linspace(lo, hi, n)
    i = int(np.argmin([f(t) for t in grid]))
    step = grid[1] - grid[0]
    res = minimize_scalar(f, bounds=(grid[i] - step, grid[i] + step), method="bounded",
                          options={"xatol": 1e-12})
    return res.x, res.fun


def _table_checks(flag):
    rep = reproduce_table(flag, shots=10**6, seed=0)
    r00, r11 = rep.row("circuit_1", "00"), rep.row("circuit_1", "11")
    assert abs(r00.exact - math.cos(rep.theta) ** 2) < 1e-12
    assert abs(r00.exact - r00.published) <= 1e-3
    assert abs(r00.sampled - r00.published) <= 1e-3
    assert r00.sampled + r11.sampled == 1.0
    # the default 24000-shot estimate lies within 3 binomial sigma of the exact value
    p = r00.exact
    t = sample(yx_circuit("z"), [rep.theta], 24000, NoiseModel.noiseless(), 2021)
    sigma = math.sqrt(p * (1 - p) / 24000)
    assert abs(t.probabilities()["00"] - p) <= 3 * sigma
    assert set(t.counts) <= {"00", "11"}


def test_c01_table_iv_reproduction():
    with criterion("C1 Table IV noiseless P(00) at theta=-0.09283 within 1e-3; 24000 shots within 3 sigma", 1.0):
        _table_checks("IV")


def test_c02_table_v_reproduction():
    with criterion("C2 Table V noiseless P(00) at theta=-0.53038 within 1e-3; P(00)+P(11)=1", 1.0):
        _table_checks("V")


def test_c03_partition_counts():
    with criterion("C3 partition counts: H-chain 2 sets, iron 2 sets", 1.0):
        chain = prepare(ExperimentConfig.load("hchain_transqse"))
        words = [w for w in chain.operators["h"].words() if not w.is_identity()]
        assert len(words) == 5
        assert len(build_plan(words, chain.pmsv_symmetries, "general")) == 2
        iron = [w for w in iron_operator().words() if not w.is_identity()]
        assert len(iron) == 4
        assert len(build_plan(iron, ZZ, "general")) == 2


def test_c04_tapering_spectra():
    signs = [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    with criterion("C4 tapered spectra equal dense sector spectra, 30 random 4-qubit cases, 1e-10", 10.0):
        for seed in range(30):
            rng = np.random.default_rng(seed)
            a, b = signs[seed % 4]
            syms = [S("ZIZI", a), S("IZIZ", b)]
            h = random_hermitian_sum(rng, 4, 20)
            for s in syms:
                p = PauliSum.from_word(s.word)
                h = 0.5 * (h + p * h * p)
            out, _ = taper(h.chop(1e-12), syms)
            assert out.n_qubits == 2
            np.testing.assert_allclose(np.linalg.eigvalsh(dense_matrix(out)), sector_spectrum(h, syms),
                                       atol=1e-10)


def test_c05_pmsv_oracle():
    with criterion("C5 PMSV equals conditional distribution, idempotent, zero noiseless discard", 5.0):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = int(rng.integers(1, 5))
            counts = {int_to_bits(k, n): int(c) for k, c in enumerate(rng.integers(0, 40, 1 << n)) if c}
            if not counts:
                continue
            targets = [ParityTarget(tuple(sorted(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False))),
                                    int(rng.choice([-1, 1])))
                       for _ in range(int(rng.integers(1, 3)))]
            table = ShotTable("c0", counts)
            out, frac = pmsv_postselect(table, targets)
            keep = {b: c for b, c in counts.items() if all(t.accepts(bits_to_int(b)) for t in targets)}
            assert out.counts == keep
            assert frac == 1 - sum(keep.values()) / table.total
            again, frac2 = pmsv_postselect(out, targets)
            assert again.counts == out.counts and frac2 == 0.0
        target = [ParityTarget((0, 1), 1)]
        for theta in TABLE_THETA.values():
            t = sample(yx_circuit("z"), [theta], 24000, NoiseModel.noiseless(), 3)
            assert pmsv_postselect(t, target)[1] == 0.0


def test_c06_spam_round_trip():
    with criterion("C6 SPAM round trip within TV 0.01 at 1e5 shots over 20 seeds", 30.0):
        worst = 0.0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            n = 2
            model = ConfusionModel.from_flips(rng.uniform(0.01, 0.08, n), rng.uniform(0.01, 0.08, n), n)
            truth = rng.dirichlet(np.ones(1 << n))
            observed = model.dense() @ truth
            counts = rng.multinomial(10**5, observed / observed.sum())
            table = ShotTable("c0", {int_to_bits(k, n): int(c) for k, c in enumerate(counts) if c}, 10**5, seed)
            p = spam_correct_distribution(table, model)
            worst = max(worst, 0.5 * np.abs(p - truth).sum())
        assert worst <= 0.01, worst


def test_c07_mitigation_ordering():
    with criterion("C7 |spam+pmsv - exact| <= |raw - exact| in >= 95 of 100 seeded iron runs", 120.0):
        h = iron_operator()
        prob = prepare(ExperimentConfig.load("iron_bcc_vqe_noisy"))
        circ = prob.ansatz.circuit()
        wins = 0
        for seed in range(100):
            res = run_experiment(ExperimentConfig.load("iron_bcc_vqe_noisy", {"seed": seed}))
            exact = exact_expectation(run_statevector(circ, res.final_theta), h)
            v = res.trace.final.evaluation.variants
            wins += abs(v["spam+pmsv"][0] - exact) <= abs(v["raw"][0] - exact)
        assert wins >= 95, wins


def test_c08_optimizers():
    with criterion("C8 Rotosolve one-sweep sinusoids 1e-9; shift rule vs finite difference 1e-6; "
                   "Rotosolve and SGD agree 1e-3 in theta", 30.0):
        for f, want in ((lambda t: math.cos(t[0]), -1.0), (lambda t: 2 * math.sin(t[0] + 0.3) + 1, -1.0)):
            trace = rotosolve(f, [0.0], max_sweeps=1)
            assert abs(trace.final.evaluation.value - want) <= 1e-9
        cost = VqeCost(iron_operator(), prob_yx(), StatevectorBackend())
        theta_star, e_star = refined_optimum(lambda t: cost([t]).value, -1.5, 1.5)
        one = rotosolve(cost, [0.7], max_sweeps=1, omega=2.0)
        # a scalar search pins theta only to ~1e-8 at a flat minimum, so compare energies
        # and require the exact shift-rule gradient to vanish
        assert abs(one.final.params[0] - theta_star) <= 1e-7
        assert abs(one.final.evaluation.value - e_star) <= 1e-9
        assert abs(parameter_shift_gradient(cost, one.final.params)[0]) <= 1e-9
        for theta in np.linspace(-1.2, 1.2, 9):
            g = parameter_shift_gradient(cost, [theta])[0]
            fd = (cost([theta + 1e-6]).value - cost([theta - 1e-6]).value) / 2e-6
            assert abs(g - fd) <= 1e-6
        a = rotosolve(cost, [1e-5], omega=2.0).final.params[0]
        b = sgd(cost, [1e-5], learning_rate=0.2, steps=300, tol=1e-10).final.params[0]
        assert abs(a - b) <= 1e-3


def prob_yx():
    return prepare(ExperimentConfig.load("iron_bcc_vqe")).ansatz


def test_c09_transqse_consistency():
    with criterion("C9 exact and first-order TransQSE within 2 s1^2 |h0+h1| on [-0.3, 0.3]; [H, Lambda] = 0", 10.0):
        ham = hchain_data()
        h = ham.qubit_operator()
        lam = translation_operator(2, ham.n_modes // 2)
        assert sum_commutator(h, lam).chop(1e-12).is_empty()
        prob = prepare(ExperimentConfig.load("hchain_transqse"))
        ops = prob.operators
        exact = TransQseCost(TransQseProblem(ops["h"], ops["h_lambda"], ops["lambda_op"], prob.ansatz, 0),
                             StatevectorBackend())
        first = TransQseCost(TransQseProblem(ops["h"], ops["h_lambda"], ops["lambda_op"], prob.ansatz, 1),
                             StatevectorBackend())
        for theta in np.linspace(-0.3, 0.3, 61):
            p = exact.parts([theta])
            bound = 2 * p["s1"] ** 2 * abs(p["h0"] + p["h1"])
            assert abs(exact([theta]).value - first([theta]).value) <= bound + 1e-12


NOT_REPRODUCIBLE = ("absolute energies and Delta E values of the published energy table and convergence "
                    "figures, and the +/-3-5 kJ/mol hardware agreements, are not reproducible here: they "
                    "need unpublished electronic integrals and a proprietary device noise profile")


def test_c10_noiseless_end_to_end():
    print(f"NOT REPRODUCIBLE: {NOT_REPRODUCIBLE}")
    with criterion("C10 (substitute) noiseless end-to-end runs reach the refined dense-grid optimum within 1e-8",
                   30.0):
        cfg = ExperimentConfig.load("iron_bcc_vqe")
        prob = prepare(cfg)
        circ = prob.ansatz.circuit()
        res = run_experiment(cfg)
        theta, _ = refined_optimum(lambda t: exact_expectation(run_statevector(circ, [t]), prob.operators["h"]),
                                   -1.5, 1.5)
        assert abs(res.final_theta[0] - theta) <= 1e-8
        cfg = ExperimentConfig.load("hchain_transqse")
        prob = prepare(cfg)
        cost = TransQseCost(TransQseProblem(prob.operators["h"], prob.operators["h_lambda"],
                                            prob.operators["lambda_op"], prob.ansatz, 0), StatevectorBackend())
        res = run_experiment(cfg)
        theta, _ = refined_optimum(lambda t: cost([t]).value, -0.5, 0.5)
        assert abs(res.final_theta[0] - theta) <= 1e-8
