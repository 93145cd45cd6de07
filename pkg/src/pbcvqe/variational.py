"""VQE and TransQSE cost functions, Rotosolve and parameter-shift SGD."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ConditioningError, InputError
from .measurement import MeasurementPlan, build_plan
from .mitigation import VARIANTS, ConfusionModel, mitigated_expectation, targets_from_plan
from .pauli import PauliSum, PauliWord
from .simulator import Circuit, exact_expectation, run_statevector
from .symmetry import SymmetryOperator

CONDITIONING_FLOOR = 0.1


@dataclass
class AnsatzSpec:
    """Reference occupation followed by Pauli exponentials ``exp(-i theta_k P)``.

    Attributes:
        initial_occupation: Bitstring, qubit 0 leftmost; ``1`` gets an X gate.
        generators: ``(word, parameter index)`` pairs applied in order.
    """

    initial_occupation: str
    generators: list[tuple[PauliWord, int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.initial_occupation or set(self.initial_occupation) - {"0", "1"}:
            raise InputError(f"bad initial occupation {self.initial_occupation!r}")
        n = self.n_qubits
        idx = sorted({p for _, p in self.generators})
        if idx != list(range(len(idx))):
            raise InputError(f"parameter indices must be contiguous from 0, got {idx}")
        for w, _ in self.generators:
            if w.n_qubits != n:
                raise InputError(f"generator {w} does not act on {n} qubits")
            if w.is_identity():
                raise InputError("identity generator only adds a global phase")

    @property
    def n_qubits(self) -> int:
        return len(self.initial_occupation)

    @property
    def n_params(self) -> int:
        return len({p for _, p in self.generators})

    def circuit(self) -> Circuit:
        c = Circuit(self.n_qubits)
        for q, b in enumerate(self.initial_occupation):
            if b == "1":
                c.x(q)
        for w, p in self.generators:
            c.pauli_exp(w, p)
        return c

    def to_dict(self) -> dict:
        return {"initial_occupation": self.initial_occupation,
                "generators": [{"pauli": w.to_string(), "param": p} for w, p in self.generators]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "AnsatzSpec":
        try:
            gens = [(PauliWord.from_string(g["pauli"]), int(g["param"])) for g in data.get("generators", [])]
            return cls(str(data["initial_occupation"]), gens)
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed ansatz: {exc}") from exc


@dataclass
class Evaluation:
    """One cost evaluation.

    ``variants`` maps each mitigation name to ``(value, stddev, discard)``.
    """

    value: float
    stddev: float = 0.0
    discard_fraction: float = 0.0
    variants: dict = field(default_factory=dict)
    seeds: list = field(default_factory=list)

    @classmethod
    def coerce(cls, result) -> "Evaluation":
        if isinstance(result, Evaluation):
            return result
        if isinstance(result, tuple):
            return cls(float(result[0]), float(result[1]) if len(result) > 1 else 0.0)
        return cls(float(result))


def _flag(mitigation: str) -> str:
    flag = "raw" if mitigation in ("none", None) else mitigation
    if flag not in VARIANTS:
        raise InputError(f"unknown mitigation {mitigation!r}")
    return flag


class Estimator:
    """Measures a list of operators on an ansatz state with one shared plan.

    All operators are grouped together, so each circuit is sampled once per
    evaluation and every operator reads the same shot tables.
    """

    def __init__(self, ops: Sequence[PauliSum], ansatz: AnsatzSpec, backend,
                 symmetries: Sequence[SymmetryOperator] = (), model: ConfusionModel | None = None,
                 strategy: str = "general", mitigation: str = "none", order: str = "spam_first"):
        for op in ops:
            if op.n_qubits != ansatz.n_qubits:
                raise InputError(f"operator on {op.n_qubits} qubits, ansatz on {ansatz.n_qubits}")
            if not op.is_hermitian(1e-10):
                raise InputError("cost operators must be Hermitian")
        self.ops = [op.real() for op in ops]
        self.ansatz = ansatz
        self.backend = backend
        self.flag = _flag(mitigation)
        self.model = model
        self.order = order
        words = []
        for op in self.ops:
            words.extend(w for w in op.words() if w not in words)
        self.plan: MeasurementPlan | None = None
        if not backend.exact:
            self.plan = build_plan(words, symmetries, strategy)
            self.targets = targets_from_plan(self.plan)
        if "spam" in self.flag and model is None and not backend.exact:
            raise InputError("SPAM mitigation needs a confusion model")
        self._circuit = ansatz.circuit()

    def sample_tables(self, theta):
        tables, seeds = [], []
        for e in self.plan:
            c = self._circuit.copy().clifford(e.circuit).measure_all()
            t = self.backend.run(c, theta, circuit_id=e.circuit_id)
            tables.append(t)
            seeds.append(t.seed)
        return tables, seeds

    def evaluate(self, theta) -> tuple[list[dict], list[int]]:
        """Per operator, a map variant -> (value, stddev, discard)."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if len(theta) != self.ansatz.n_params:
            raise InputError(f"expected {self.ansatz.n_params} parameters, got {len(theta)}")
        if self.backend.exact:
            psi = run_statevector(self._circuit, theta)
            out = []
            for op in self.ops:
                v = exact_expectation(psi, op)
                out.append({f: (v, 0.0, 0.0) for f in VARIANTS})
            return out, []
        tables, seeds = self.sample_tables(theta)
        flags = [f for f in VARIANTS if "spam" not in f or self.model is not None]
        out = [{f: mitigated_expectation(self.plan, tables, op, self.model, self.targets, f, self.order)
                for f in flags}
               for op in self.ops]
        return out, seeds


def vqe_energy(theta, h: PauliSum, ansatz: AnsatzSpec, backend, mitigation: str = "none",
               symmetries: Sequence[SymmetryOperator] = (), model: ConfusionModel | None = None,
               strategy: str = "general") -> tuple[float, float]:
    """Ansatz energy ``<psi(theta)|h|psi(theta)>`` and its standard deviation."""
    ev = VqeCost(h, ansatz, backend, mitigation, symmetries, model, strategy)(theta)
    return ev.value, ev.stddev


class VqeCost:
    """Callable VQE cost that reuses its measurement plan."""

    def __init__(self, h: PauliSum, ansatz: AnsatzSpec, backend, mitigation: str = "none",
                 symmetries: Sequence[SymmetryOperator] = (), model: ConfusionModel | None = None,
                 strategy: str = "general", order: str = "spam_first"):
        self.estimator = Estimator([h], ansatz, backend, symmetries, model, strategy, mitigation, order)
        self.flag = self.estimator.flag

    def __call__(self, theta) -> Evaluation:
        (res,), seeds = self.estimator.evaluate(theta)
        v, s, d = res[self.flag]
        return Evaluation(v, s, d, res, seeds)


@dataclass
class TransQseProblem:
    """Two-configuration TransQSE subspace problem on the reduced qubits.

    ``h``, ``h_lambda`` and ``lambda_op`` give h0, h1 and s1 as expectations
    on the ansatz state.  ``taylor_order`` 0 selects the exact ratio, 1 the
    first-order expansion.
    """

    h: PauliSum
    h_lambda: PauliSum
    lambda_op: PauliSum
    ansatz: AnsatzSpec
    taylor_order: int = 0

    def __post_init__(self):
        if self.taylor_order not in (0, 1):
            raise InputError("taylor_order must be 0 (exact) or 1 (first order)")
        n = self.ansatz.n_qubits
        for name in ("h", "h_lambda", "lambda_op"):
            op = getattr(self, name)
            if op.n_qubits != n:
                raise InputError(f"{name} acts on {op.n_qubits} qubits, ansatz on {n}")
            if not op.is_hermitian(1e-10):
                raise InputError(f"{name} must be Hermitian")


def combine_transqse(h0, h1, s1, sd=(0.0, 0.0, 0.0), taylor_order: int = 0) -> tuple[float, float]:
    """TransQSE energy from its three expectations with delta-method error.

    Raises:
        ConditioningError: if the exact form has ``|1 + s1| < 0.1``.
    """
    num = h0 + h1
    if taylor_order == 0:
        den = 1.0 + s1
        if abs(den) < CONDITIONING_FLOOR:
            raise ConditioningError(f"1 + s1 = {den:.3g} is too close to zero")
        value = num / den
        grads = (1.0 / den, 1.0 / den, -num / den ** 2)
    else:
        value = num * (1.0 - s1)
        grads = (1.0 - s1, 1.0 - s1, -num)
    std = math.sqrt(sum((g * s) ** 2 for g, s in zip(grads, sd)))
    return value, std


class TransQseCost:
    def __init__(self, problem: TransQseProblem, backend, mitigation: str = "none",
                 symmetries: Sequence[SymmetryOperator] = (), model: ConfusionModel | None = None,
                 strategy: str = "general", order: str = "spam_first"):
        self.problem = problem
        self.estimator = Estimator([problem.h, problem.h_lambda, problem.lambda_op], problem.ansatz,
                                   backend, symmetries, model, strategy, mitigation, order)
        self.flag = self.estimator.flag

    def parts(self, theta) -> dict:
        res, _ = self.estimator.evaluate(theta)
        return {k: r[self.flag][0] for k, r in zip(("h0", "h1", "s1"), res)}

    def gradient(self, theta, shift: float = math.pi / 4) -> np.ndarray:
        """Shift-rule derivatives of h0, h1 and s1 combined by the quotient rule.

        Each component is a sinusoid in every parameter, so this is exact on
        the statevector backend, unlike shifting the ratio itself.
        """
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        c = self.parts(theta)
        num, s1 = c["h0"] + c["h1"], c["s1"]
        grad = np.zeros_like(theta)
        for d in range(len(theta)):
            tp, tm = theta.copy(), theta.copy()
            tp[d] += shift
            tm[d] -= shift
            cp, cm = self.parts(tp), self.parts(tm)
            scale = 1.0 / (math.sin(2 * shift))
            dnum = scale * ((cp["h0"] + cp["h1"]) - (cm["h0"] + cm["h1"]))
            ds1 = scale * (cp["s1"] - cm["s1"])
            if self.problem.taylor_order == 0:
                grad[d] = dnum / (1.0 + s1) - num * ds1 / (1.0 + s1) ** 2
            else:
                grad[d] = dnum * (1.0 - s1) - num * ds1
        return grad

    def __call__(self, theta) -> Evaluation:
        res, seeds = self.estimator.evaluate(theta)
        variants = {}
        for f in res[0]:
            (h0, e0, d0), (h1, e1, d1), (s1, e2, d2) = (r[f] for r in res)
            v, s = combine_transqse(h0, h1, s1, (e0, e1, e2), self.problem.taylor_order)
            variants[f] = (v, s, max(d0, d1, d2))
        v, s, d = variants[self.flag]
        return Evaluation(v, s, d, variants, seeds)


def transqse_energy(theta, problem: TransQseProblem, backend, mitigation: str = "none",
                    symmetries: Sequence[SymmetryOperator] = (), model: ConfusionModel | None = None,
                    strategy: str = "general") -> tuple[float, float]:
    ev = TransQseCost(problem, backend, mitigation, symmetries, model, strategy)(theta)
    return ev.value, ev.stddev


@dataclass
class TraceStep:
    step: int
    params: tuple[float, ...]
    evaluation: Evaluation


@dataclass
class OptimizationTrace:
    steps: list[TraceStep] = field(default_factory=list)
    converged: bool = False

    def record(self, params, ev: Evaluation) -> None:
        self.steps.append(TraceStep(len(self.steps), tuple(float(p) for p in np.atleast_1d(params)), ev))

    @property
    def best(self) -> TraceStep:
        return min(self.steps, key=lambda s: s.evaluation.value)

    @property
    def final(self) -> TraceStep:
        return self.steps[-1]

    def rows(self) -> list[dict]:
        out = []
        for s in self.steps:
            ev = s.evaluation
            row = {"step": s.step}
            row.update({f"theta_{i}": p for i, p in enumerate(s.params)})
            for f in VARIANTS:
                row["e_" + f.replace("+", "_")] = ev.variants.get(f, (ev.value,) if f == "raw" else (None,))[0]
            row["value"] = ev.value
            row["stddev"] = ev.stddev
            row["discard_fraction"] = ev.discard_fraction
            row["seed"] = ";".join(str(x) for x in ev.seeds)
            out.append(row)
        return out

    def to_csv(self, path) -> None:
        rows = self.rows()
        if not rows:
            Path(path).write_text("")
            return
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


def _wrap(theta: float, omega: float) -> float:
    """Map into (-pi/omega, pi/omega]."""
    period = 2 * math.pi / omega
    t = math.fmod(theta + math.pi / omega, period)
    if t <= 0:
        t += period
    return t - math.pi / omega


def sinusoid_minimizer(theta: float, e0: float, e_plus: float, e_minus: float, omega: float = 1.0) -> float:
    """Minimizer of ``C + A sin(omega t + phi)`` fitted through ``theta`` and ``theta +- pi/(2 omega)``."""
    step = theta - math.pi / (2 * omega) - math.atan2(2 * e0 - e_plus - e_minus, e_plus - e_minus) / omega
    return _wrap(step, omega)


def rotosolve(cost: Callable, theta0, max_sweeps: int = 10, tol: float = 1e-3,
              omega: float = 1.0) -> OptimizationTrace:
    """Coordinate-wise closed-form sinusoid minimization.

    Args:
        cost: Maps a parameter vector to a float, ``(value, stddev)`` or
            :class:`Evaluation`.
        theta0: Initial parameters.
        max_sweeps: Upper bound on full coordinate sweeps.
        tol: Stop once a sweep lowers the energy by less than this.
        omega: Angular frequency of each coordinate; 2 for ``exp(-i theta P)``.
    """
    theta = np.atleast_1d(np.asarray(theta0, dtype=float)).copy()
    trace = OptimizationTrace()
    ev = Evaluation.coerce(cost(theta))
    trace.record(theta, ev)
    shift = math.pi / (2 * omega)
    for _ in range(max_sweeps):
        start = ev.value
        for d in range(len(theta)):
            tp, tm = theta.copy(), theta.copy()
            tp[d] += shift
            tm[d] -= shift
            e_plus = Evaluation.coerce(cost(tp)).value
            e_minus = Evaluation.coerce(cost(tm)).value
            theta[d] = sinusoid_minimizer(theta[d], ev.value, e_plus, e_minus, omega)
            ev = Evaluation.coerce(cost(theta))
            trace.record(theta, ev)
        if abs(start - ev.value) < tol:
            trace.converged = True
            break
    return trace


def parameter_shift_gradient(cost: Callable, theta, shift: float = math.pi / 4, omega: float = 2.0) -> np.ndarray:
    """Two-point shift rule; with the defaults, ``E(t + pi/4) - E(t - pi/4)``."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    scale = omega / (2 * math.sin(omega * shift))
    grad = np.zeros_like(theta)
    for d in range(len(theta)):
        tp, tm = theta.copy(), theta.copy()
        tp[d] += shift
        tm[d] -= shift
        grad[d] = scale * (Evaluation.coerce(cost(tp)).value - Evaluation.coerce(cost(tm)).value)
    return grad


def sgd(cost: Callable, theta0, learning_rate: float = 1.0, steps: int = 50,
        grad: Callable | None = None, tol: float | None = None) -> OptimizationTrace:
    """Gradient descent with parameter-shift gradients.

    A cost exposing ``gradient(theta)`` supplies its own derivative.

    Stops early when ``tol`` is given and the step size falls below it.
    """
    if grad is None:
        grad = getattr(cost, "gradient", None) or (lambda t: parameter_shift_gradient(cost, t))
    theta = np.atleast_1d(np.asarray(theta0, dtype=float)).copy()
    trace = OptimizationTrace()
    trace.record(theta, Evaluation.coerce(cost(theta)))
    for _ in range(steps):
        step = learning_rate * np.asarray(grad(theta), dtype=float)
        theta = theta - step
        trace.record(theta, Evaluation.coerce(cost(theta)))
        if tol is not None and np.max(np.abs(step)) < tol:
            trace.converged = True
            break
    return trace
