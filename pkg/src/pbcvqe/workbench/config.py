"""Experiment configuration files."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from ..errors import ValidationError
from ..simulator import NoiseModel
from .ingest import read_json

DEFAULT_SHOTS = 24000
MITIGATIONS = ("none", "spam", "pmsv", "spam+pmsv")
BACKENDS = ("statevector", "shots")
PROBLEMS = ("vqe", "transqse")
OPTIMIZERS = ("rotosolve", "sgd")

_DEFAULTS: dict[str, Any] = {
    "name": "experiment",
    "problem": "vqe",
    "hamiltonian": None,
    "reduction": None,
    "pmsv_symmetries": None,
    "ansatz": None,
    "theta0": None,
    "e_hf_reference": None,
    "taylor_order": 0,
    "optimizer": {"name": "rotosolve", "max_sweeps": 10, "tol": 1e-3},
    "backend": "statevector",
    "shots": DEFAULT_SHOTS,
    "seed": 0,
    "noise": {},
    "mitigation": "none",
    "order": "spam_first",
    "strategy": "general",
    "calibration": {"mode": "per_qubit", "shots": DEFAULT_SHOTS},
    "cells": 2,
}

_OPTIMIZER_KEYS = {"rotosolve": {"name", "max_sweeps", "tol"},
                   "sgd": {"name", "learning_rate", "steps", "tol"}}


def packaged_data_dir() -> Path:
    return Path(str(resources.files("pbcvqe") / "data"))


def resolve_config_path(name) -> Path:
    """A file path, or the stem of a packaged example config."""
    p = Path(name)
    if p.exists():
        return p
    for cand in (packaged_data_dir() / f"{name}.json", packaged_data_dir() / str(name)):
        if cand.exists():
            return cand
    raise ValidationError("config file not found", str(name))


@dataclass
class ExperimentConfig:
    raw: dict
    base_dir: Path = field(default_factory=Path.cwd)

    def __getattr__(self, key):
        raw = self.__dict__.get("raw", {})
        if key in raw:
            return raw[key]
        raise AttributeError(key)

    def path(self, key_or_value) -> Path | None:
        value = self.raw.get(key_or_value, key_or_value)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else (self.base_dir / p)

    @property
    def noise_model(self) -> NoiseModel:
        try:
            return NoiseModel.from_dict(self.raw["noise"] or {})
        except Exception as exc:
            raise ValidationError(str(exc), "noise") from None

    def canonical(self) -> dict:
        return copy.deepcopy(self.raw)

    def to_json(self) -> str:
        return json.dumps(self.raw, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Mapping, base_dir: Path | None = None,
                  overrides: Mapping[str, Any] | None = None) -> "ExperimentConfig":
        if not isinstance(data, Mapping):
            raise ValidationError("config must be an object", "$")
        unknown = set(data) - set(_DEFAULTS)
        if unknown:
            raise ValidationError(f"unknown config keys {sorted(unknown)}", "$")
        raw = copy.deepcopy(_DEFAULTS)
        raw.update(copy.deepcopy(dict(data)))
        for k, v in (overrides or {}).items():
            if v is not None:
                raw[k] = v
        cfg = cls(raw, base_dir or Path.cwd())
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path, overrides: Mapping[str, Any] | None = None) -> "ExperimentConfig":
        path = resolve_config_path(path)
        return cls.from_dict(read_json(path), path.resolve().parent, overrides)

    def validate(self) -> None:
        r = self.raw
        if r["problem"] not in PROBLEMS:
            raise ValidationError(f"problem must be one of {PROBLEMS}", "problem")
        if r["backend"] not in BACKENDS:
            raise ValidationError(f"backend must be one of {BACKENDS}", "backend")
        if r["mitigation"] not in MITIGATIONS:
            raise ValidationError(f"mitigation must be one of {MITIGATIONS}", "mitigation")
        if r["strategy"] not in ("general", "qubitwise"):
            raise ValidationError("strategy must be general or qubitwise", "strategy")
        if r["order"] not in ("spam_first", "pmsv_first"):
            raise ValidationError("order must be spam_first or pmsv_first", "order")
        if isinstance(r["shots"], bool) or not isinstance(r["shots"], int) or r["shots"] <= 0:
            raise ValidationError("shots must be a positive integer", "shots")
        if r["seed"] is not None and (isinstance(r["seed"], bool) or not isinstance(r["seed"], int) or r["seed"] < 0):
            raise ValidationError("seed must be a non-negative integer", "seed")
        if r["taylor_order"] not in (0, 1):
            raise ValidationError("taylor_order must be 0 or 1", "taylor_order")
        opt = r["optimizer"]
        if not isinstance(opt, Mapping) or opt.get("name") not in OPTIMIZERS:
            raise ValidationError(f"optimizer.name must be one of {OPTIMIZERS}", "optimizer")
        extra = set(opt) - _OPTIMIZER_KEYS[opt["name"]]
        if extra:
            raise ValidationError(f"unknown optimizer keys {sorted(extra)}", "optimizer")
        if r["hamiltonian"] is None:
            raise ValidationError("hamiltonian file is required", "hamiltonian")
        for key in ("hamiltonian", "pmsv_symmetries"):
            if isinstance(r[key], str) and not self.path(key).exists():
                raise ValidationError(f"referenced file {r[key]} does not exist", key)
        if isinstance(r["ansatz"], str) and not self.path("ansatz").exists():
            raise ValidationError(f"referenced file {r['ansatz']} does not exist", "ansatz")
        if r["ansatz"] is None:
            raise ValidationError("ansatz is required", "ansatz")
        cal = r["calibration"] or {}
        if cal.get("mode", "per_qubit") not in ("per_qubit", "full"):
            raise ValidationError("calibration.mode must be per_qubit or full", "calibration")
        _ = self.noise_model

    def _file_refs(self) -> list[tuple[tuple[str, ...], Path]]:
        out = []
        for key in ("hamiltonian", "pmsv_symmetries", "ansatz"):
            if isinstance(self.raw.get(key), str):
                out.append(((key,), self.path(key)))
        red = self.raw.get("reduction") or {}
        if isinstance(red.get("symmetries"), str):
            out.append((("reduction", "symmetries"), self.path(red["symmetries"])))
        return out

    def referenced_files(self) -> list[Path]:
        return [p for _, p in self._file_refs()]

    def config_hash(self) -> str:
        """SHA-256 of the effective config with file references replaced by content digests."""
        raw = self.canonical()
        for keys, p in self._file_refs():
            target = raw
            for k in keys[:-1]:
                target = target[k]
            target[keys[-1]] = "sha256:" + hashlib.sha256(p.read_bytes()).hexdigest()
        return hashlib.sha256(json.dumps(raw, sort_keys=True).encode()).hexdigest()
