"""Convergence tables and plots from a run directory."""
from __future__ import annotations

import csv
import json
from pathlib import Path

from ..errors import InputError
from .runner import unit_factor

_VARIANT_COLUMNS = (("e_raw", "raw"), ("e_spam", "spam"), ("e_pmsv", "pmsv"), ("e_spam_pmsv", "spam+pmsv"))


def _float(v):
    return None if v in ("", None) else float(v)


def load_run(run_dir) -> tuple[dict, list[dict]]:
    run_dir = Path(run_dir)
    try:
        result = json.loads((run_dir / "result.json").read_text(encoding="utf-8"))
        with open(run_dir / "trace.csv", newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except FileNotFoundError as exc:
        raise InputError(f"{run_dir} is not a run directory ({Path(exc.filename).name} missing)") from None
    return result, rows


def convergence_rows(result: dict, rows: list[dict]) -> list[dict]:
    """Trace rows with energies converted to Delta E in kJ/mol."""
    factor = unit_factor(result.get("unit", "hartree"))
    e_hf = float(result["e_hf_reference_kjmol"])
    out = []
    for r in rows:
        row = {"step": int(r["step"])}
        row.update({k: float(v) for k, v in r.items() if k.startswith("theta_")})
        for col, name in _VARIANT_COLUMNS:
            v = _float(r.get(col))
            row[f"delta_e_{name}_kjmol"] = None if v is None else v * factor - e_hf
        row["delta_e_kjmol"] = float(r["value"]) * factor - e_hf
        row["stddev_kjmol"] = float(r["stddev"]) * factor
        row["discard_fraction"] = float(r["discard_fraction"])
        out.append(row)
    return out


def write_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["step"])
        w.writeheader()
        w.writerows(rows)


def write_svg(rows: list[dict], path, title: str = "") -> None:
    """Energy against step; byte-stable for identical input."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "pbcvqe", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4))
        steps = [r["step"] for r in rows]
        for _, name in _VARIANT_COLUMNS:
            key = f"delta_e_{name}_kjmol"
            ys = [r[key] for r in rows]
            if all(y is not None for y in ys):
                ax.plot(steps, ys, marker="o", label=name)
        ax.errorbar(steps, [r["delta_e_kjmol"] for r in rows], yerr=[r["stddev_kjmol"] for r in rows],
                    fmt="none", ecolor="black", capsize=3, label="selected +/- stddev")
        ax.set_xlabel("step")
        ax.set_ylabel("Delta E (kJ/mol)")
        if title:
            ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def make_report(run_dir, out_dir=None) -> tuple[Path, Path]:
    """Write ``report.csv`` and ``convergence.svg``; returns their paths."""
    result, rows = load_run(run_dir)
    out = Path(out_dir or run_dir)
    out.mkdir(parents=True, exist_ok=True)
    conv = convergence_rows(result, rows)
    csv_path, svg_path = out / "report.csv", out / "convergence.svg"
    write_csv(conv, csv_path)
    write_svg(conv, svg_path, str(result.get("name", "")))
    return csv_path, svg_path
