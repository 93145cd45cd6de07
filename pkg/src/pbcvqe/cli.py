"""Command-line entry point.

Exit status: 0 success, 1 validation failure, 2 runtime error, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import InputError, PbcError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2, 64
DEFAULT_SHOTS = 24000


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--config", type=str, help="experiment config file or packaged config name")
    g.add_argument("--seed", type=int, help="root random seed")
    g.add_argument("--shots", type=int, help=f"shots per circuit (default {DEFAULT_SHOTS})")
    g.add_argument("--backend", choices=("statevector", "shots"))
    g.add_argument("--mitigation", choices=("none", "spam", "pmsv", "spam+pmsv"))
    g.add_argument("--strategy", choices=("general", "qubitwise"))
    g.add_argument("--out", type=str, help="output directory")
    return p


def _dump(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _overrides(args) -> dict:
    return {k: getattr(args, k) for k in ("seed", "shots", "backend", "mitigation", "strategy")}


def _load_config(args, **extra):
    from .workbench.config import ExperimentConfig

    if not args.config:
        raise InputError("--config is required for this command")
    return ExperimentConfig.load(args.config, {**_overrides(args), **extra})


# ---------------------------------------------------------------- ham validate

def cmd_ham_validate(args) -> int:
    from .workbench.ingest import file_kind, read_json, summarize, validate_fermion_hamiltonian, validate_pauli_sum

    data = read_json(args.path)
    kind = file_kind(data)
    if kind == "fermion_hamiltonian":
        ham, errors = validate_fermion_hamiltonian(data)
    elif kind == "pauli_sum":
        ham, errors = validate_pauli_sum(data)
    else:
        raise ValidationError("not a Hamiltonian document", args.path)
    if errors:
        for e in errors:
            print(f"{args.path}:{e.location}: {e.message}", file=sys.stderr)
        return EXIT_INVALID
    if kind == "fermion_hamiltonian":
        for line in summarize(ham).lines():
            print(line)
    else:
        print(f"pauli sum: {ham.n_qubits} qubits, {len(ham)} terms")
    print(f"{args.path}: valid")
    return EXIT_OK


# ---------------------------------------------------------------- taper / partition

def _reduced_from_args(args):
    """(operators, pmsv symmetries, extra record) from --config or a Pauli-sum file."""
    from .symmetry import load_symmetries
    from .workbench.ingest import load_pauli_sum
    from .workbench.pipeline import Reduction, reduce_operators

    if args.config:
        from .workbench.runner import prepare

        prob = prepare(_load_config(args))
        return prob.operators, prob.pmsv_symmetries, {"initial_occupation": prob.ansatz.initial_occupation}
    if not args.hamiltonian:
        raise InputError("give a Pauli-sum file or --config")
    op = load_pauli_sum(args.hamiltonian)
    syms = load_symmetries(args.symmetries) if getattr(args, "symmetries", None) else []
    if getattr(args, "command", "") == "taper":
        red = reduce_operators({"h": op}, Reduction(symmetries=syms, reference=args.reference))
        return red.operators, red.pmsv_symmetries, {
            "initial_occupation": red.initial_occupation,
            "tapering_map": red.tapering_map.to_dict() if red.tapering_map else None}
    return {"h": op}, syms, {}


def cmd_taper(args) -> int:
    from .workbench.pipeline import flatten_symmetries

    ops, pmsv, extra = _reduced_from_args(args)
    for name, op in ops.items():
        print(f"[{name}] {op.n_qubits} qubits, {len(op)} terms")
        for w, c in sorted(op.items(), key=lambda kv: kv[0].to_string()):
            print(f"  {w.to_string()}  {c.real:+.10f}")
    if pmsv:
        print("post-selection symmetries: " + ", ".join(f"{s.sign:+d}*{s.word.to_string()}" for s in pmsv))
    if args.out:
        payload = {"operators": {k: op.to_dict() for k, op in ops.items()},
                   "pmsv_symmetries": flatten_symmetries(pmsv), **extra}
        _dump(Path(args.out) / "tapered.json", payload)
    return EXIT_OK


def cmd_partition(args) -> int:
    from .measurement import build_plan

    ops, pmsv, _ = _reduced_from_args(args)
    strategy = args.strategy or "general"
    words = []
    for op in ops.values():
        for w in op.words():
            if not w.is_identity() and w not in words:
                words.append(w)
    plan = build_plan(words, pmsv, strategy)
    print(f"{len(plan)} {strategy}-commuting sets")
    for e in plan:
        members = " ".join(w.to_string() for w in e.members)
        syms = " ".join(f"{s.sign:+d}*{s.word.to_string()}" for s in e.symmetries)
        print(f"  {e.circuit_id}: {members}" + (f"  | symmetries {syms}" if syms else ""))
    if args.out:
        _dump(Path(args.out) / "plan.json", plan.to_dict())
    return EXIT_OK


# ---------------------------------------------------------------- spam calibrate

def cmd_spam_calibrate(args) -> int:
    from .mitigation import calibrate_spam
    from .simulator import NoiseModel, ShotsBackend

    shots = args.shots or DEFAULT_SHOTS
    seed = 0 if args.seed is None else args.seed
    if args.config:
        cfg = _load_config(args)
        noise = cfg.noise_model
        n_qubits = args.qubits
        if n_qubits is None:
            from .workbench.runner import prepare

            n_qubits = prepare(cfg).ansatz.n_qubits
    else:
        noise = NoiseModel()
        n_qubits = args.qubits or 2
    model = calibrate_spam(ShotsBackend(noise, shots, seed), n_qubits, shots, args.mode, seed)
    print(f"{args.mode} confusion model, {n_qubits} qubits, {shots} shots, seed {seed}")
    for q, m in enumerate(model.matrices):
        print(f"  block {q}: " + np.array2string(np.asarray(m), precision=5, separator=", ").replace("\n", ""))
    print(f"condition number {model.condition_number():.4f}")
    if args.out:
        _dump(Path(args.out) / "confusion.json", model.to_dict())
    return EXIT_OK


# ---------------------------------------------------------------- run

def cmd_run(args) -> int:
    from .workbench.runner import run_experiment

    extra = {"problem": args.problem} if args.problem else {}
    cfg = _load_config(args, **extra)
    out = Path(args.out) if args.out else Path("runs") / cfg.name
    res = run_experiment(cfg, out)
    rec = res.record
    print(f"{rec['name']}: {rec['problem']} on {rec['backend']}, mitigation {rec['mitigation']}")
    print(f"  final theta      {', '.join(f'{t:.6f}' for t in res.final_theta)}")
    print(f"  Delta E          {res.delta_e_kjmol:.3f} +/- {res.stddev_kjmol:.3f} kJ/mol")
    print(f"  discard fraction {rec['discard_fraction']:.4f}")
    if rec["backend"] == "shots":
        for k, v in rec["variants_kjmol"].items():
            print(f"  {k:<10} {v['delta_e']:9.3f} +/- {v['stddev']:.3f}")
    print(f"  steps {rec['n_steps']}, circuits {rec['n_circuits']}, written to {out}")
    return EXIT_OK


# ---------------------------------------------------------------- pmsv filter

def _targets_from_plan_file(path, circuit_id):
    from .mitigation import ParityTarget
    from .workbench.ingest import read_json

    plan = read_json(path)
    for c in plan.get("circuits", []):
        if c.get("circuit_id") == circuit_id:
            return [ParityTarget(tuple(s["bits"]), int(s["sign"]) * int(s["map_sign"]))
                    for s in c.get("symmetries", []) if s["bits"]]
    raise ValidationError(f"plan has no circuit {circuit_id!r}", str(path))


def cmd_pmsv_filter(args) -> int:
    from .measurement import ShotTable
    from .mitigation import ParityTarget, pmsv_postselect
    from .workbench.ingest import read_json

    try:
        table = ShotTable.from_dict(read_json(args.table))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad shot table ({exc})", args.table) from None
    if args.plan:
        targets = _targets_from_plan_file(args.plan, table.circuit_id)
    elif args.target:
        targets = []
        for t in args.target:
            bits, _, sign = t.partition(":")
            targets.append(ParityTarget(tuple(int(b) for b in bits.split(",")), int(sign or 1)))
    else:
        raise InputError("give --plan or at least one --target BITS[:SIGN]")
    filtered, frac = pmsv_postselect(table, targets)
    print(f"{table.circuit_id}: kept {filtered.total:g} of {table.total:g}, discard fraction {frac:.6f}")
    if args.out:
        _dump(Path(args.out) / f"{table.circuit_id}_pmsv.json", filtered.to_dict())
    else:
        print(json.dumps(filtered.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------- report / tables

def cmd_report(args) -> int:
    from .workbench.report import make_report

    csv_path, svg_path = make_report(args.run_dir, args.out)
    print(f"wrote {csv_path}")
    print(f"wrote {svg_path}")
    return EXIT_OK


def cmd_tables(args) -> int:
    from .workbench.tables import DEFAULT_SHOTS as TABLE_SHOTS, reproduce_table

    rep = reproduce_table(args.table, args.shots or TABLE_SHOTS, 0 if args.seed is None else args.seed)
    for line in rep.lines():
        print(line)
    if args.out:
        _dump(Path(args.out) / f"table_{rep.table}.json", rep.to_dict())
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="pbcvqe", description="Variational simulation of periodic-system model Hamiltonians.")
    from . import __version__

    parser.add_argument("--version", action="version", version=f"pbcvqe {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ham = sub.add_parser("ham", help="Hamiltonian files")
    ham_sub = ham.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = ham_sub.add_parser("validate", parents=[common], help="validate a Hamiltonian file")
    p.add_argument("path")
    p.set_defaults(func=cmd_ham_validate)

    p = sub.add_parser("taper", parents=[common], help="contract and taper a Hamiltonian")
    p.add_argument("hamiltonian", nargs="?", help="Pauli-sum file (ignored with --config)")
    p.add_argument("--symmetries", help="symmetry file used for tapering")
    p.add_argument("--reference", help="reference occupation fixing the sector, qubit 0 leftmost")
    p.set_defaults(func=cmd_taper)

    p = sub.add_parser("partition", parents=[common], help="group terms into measurement circuits")
    p.add_argument("hamiltonian", nargs="?", help="Pauli-sum file (ignored with --config)")
    p.add_argument("--symmetries", help="symmetries to attach for post-selection")
    p.set_defaults(func=cmd_partition)

    spam = sub.add_parser("spam", help="readout error calibration")
    spam_sub = spam.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = spam_sub.add_parser("calibrate", parents=[common], help="estimate a confusion model")
    p.add_argument("--qubits", type=int)
    p.add_argument("--mode", choices=("per_qubit", "full"), default="per_qubit")
    p.set_defaults(func=cmd_spam_calibrate)

    p = sub.add_parser("run", parents=[common], help="run an experiment from a config")
    p.add_argument("problem", nargs="?", choices=("vqe", "transqse"))
    p.set_defaults(func=cmd_run)

    pmsv = sub.add_parser("pmsv", help="symmetry post-selection")
    pmsv_sub = pmsv.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = pmsv_sub.add_parser("filter", parents=[common], help="post-select a shot table")
    p.add_argument("table")
    p.add_argument("--plan", help="measurement plan supplying the parity targets")
    p.add_argument("--target", action="append", help="parity target BITS[:SIGN], e.g. 1:+1 or 0,1:-1")
    p.set_defaults(func=cmd_pmsv_filter)

    p = sub.add_parser("report", parents=[common], help="CSV and convergence plot for a run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("tables", parents=[common], help="reproduce the noiseless probability tables")
    p.add_argument("table", choices=("IV", "V"))
    p.set_defaults(func=cmd_tables)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.shots is not None and args.shots <= 0:
        parser.error("--shots must be positive")
    try:
        return args.func(args)
    except (ValidationError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PbcError, OSError, ArithmeticError) as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
