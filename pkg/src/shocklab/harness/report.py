"""Plain-text summary of a run directory.

The summary only reads the CSV artifacts, so it can be regenerated at any
time.  Missing artifacts are listed as gaps; they never make the report fail.
"""
from __future__ import annotations

import math
from pathlib import Path

from .io import read_columns, read_csv, read_keyvalue


ARTIFACTS = {
    "endstates": ("endstates.csv",),
    "profile": ("profile.csv", "profile_checks.csv"),
    "simulate": ("monitors.csv",),
    "contract": ("contract_summary.csv", "trace.csv", "ledger.csv"),
    "sweep": ("sweep.csv", "sweep_X.csv", "sweep_gaps.csv"),
    "poincare": ("poincare.csv", "poincare_argmax.csv"),
    "inequalities": ("phi_bounds.csv", "local_expansions.csv"),
}


def _pf(flag) -> str:
    return "PASS" if flag else "FAIL"


def _fmt(x) -> str:
    if isinstance(x, bool):
        return _pf(x)
    if isinstance(x, float):
        return f"{x:.6g}" if math.isfinite(x) else str(x)
    return "" if x is None else str(x)


def _table(header, rows) -> list[str]:
    out = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    out += ["| " + " | ".join(_fmt(x) for x in row) + " |" for row in rows]
    return out


# {{{ sections

def _endstates(d: Path):
    kv = read_keyvalue(d / "endstates.csv")
    return ["## End states", ""] + [f"- {k}: {_fmt(v)}" for k, v in kv.items()]


def _profile(d: Path):
    lines = ["## Profile", "", "- plot data: profile.csv (xi, v, u, h, dv)"]
    if (d / "profile_checks.csv").exists():
        kv = read_keyvalue(d / "profile_checks.csv")
        lines += [f"- {k}: {_fmt(v)}" for k, v in kv.items()]
    return lines


def _simulate(d: Path):
    cols = read_columns(d / "monitors.csv")
    lines = ["## Simulation", "", "- plot data: monitors.csv"]
    if cols.get("t"):
        lines.append(f"- final time: {_fmt(cols['t'][-1])}")
        lines.append(f"- min v over run: {_fmt(min(cols['min_v']))}")
    return lines


def _contract(d: Path):
    kv = read_keyvalue(d / "contract_summary.csv")
    lines = ["## Contraction", ""]
    lines.append(f"- verdict: {_pf(kv.get('verdict'))}")
    lines.append(f"- wre monotone: {_pf(kv.get('wre_monotone'))}")
    lines.append(f"- shifted dissipation combination nonpositive: "
                 f"{_pf(kv.get('combination_nonpositive'))}")
    for k in ("R_max_normalized", "f_ratio", "delta0_empirical", "max_identity_residual",
              "raw_increases", "wre0", "wreT", "X_T", "steps"):
        if k in kv:
            lines.append(f"- {k}: {_fmt(kv[k])}")
    lines.append("- plot data: trace.csv (wre vs t; X vs t with the sigma t reference)")
    if (d / "ledger.csv").exists():
        header, rows = read_csv(d / "ledger.csv")
        lines += ["", "### Estimate ledger", ""] + _table(header, rows)
    return lines


def _sweep(d: Path):
    header, rows = read_csv(d / "sweep.csv")
    lines = ["## Vanishing viscosity sweep", "", "### Per-viscosity drift ratios", ""]
    lines += _table(header, rows)
    if (d / "sweep_gaps.csv").exists():
        gcols = read_columns(d / "sweep_gaps.csv")
        gaps = [g for g in gcols.get("l1_gap", [])]
        dec = all(isinstance(g, float) for g in gaps) and all(
            b < a for a, b in zip(gaps, gaps[1:]))
        lines += ["", "- L1 gaps: " + ", ".join(_fmt(g) for g in gaps),
                  f"- gaps strictly decreasing: {_pf(dec and len(gaps) > 0)}"]
    lines.append("- plot data: sweep_X.csv (nu, t, X_nu, static shift)")
    return lines


def _poincare(d: Path):
    header, rows = read_csv(d / "poincare.csv")
    lines = ["## Poincare search", ""] + _table(header, rows)
    lines.append("- plot data: poincare_argmax.csv (y, W)")
    return lines


def _inequalities(d: Path):
    lines = ["## Relative functional inequalities", ""]
    kv = read_keyvalue(d / "phi_bounds.csv")
    lines += [f"- {k}: {_fmt(v)}" for k, v in kv.items()]
    if (d / "local_expansions.csv").exists():
        header, rows = read_csv(d / "local_expansions.csv")
        lines += ["", "### Local expansions", ""] + _table(header, rows)
    return lines


SECTIONS = {"endstates": _endstates, "profile": _profile, "simulate": _simulate,
            "contract": _contract, "sweep": _sweep, "poincare": _poincare,
            "inequalities": _inequalities}

# }}}


def emit_report(directory, figures: bool = False) -> Path:
    """Write ``summary.md`` into ``directory`` and return its path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    lines = ["# shocklab run summary", ""]
    gaps = []
    found = False
    for kind, files in ARTIFACTS.items():
        present = [f for f in files if (d / f).exists()]
        if not present:
            continue
        found = True
        gaps += [f for f in files if f not in present]
        if (d / files[0]).exists():
            try:
                lines += SECTIONS[kind](d) + [""]
            except (OSError, ValueError, KeyError, IndexError, StopIteration) as exc:
                gaps.append(f"{files[0]} (unreadable: {exc})")
    if not found:
        lines += ["No run artifacts were found in this directory.", ""]
        gaps = [f for files in ARTIFACTS.values() for f in files]
    if figures and found:
        from ..plotting import have_matplotlib, render_figures
        if have_matplotlib():
            made = render_figures(d)
            lines += ["## Figures", ""] + [f"- {p.name}" for p in made] + [""]
        else:
            lines += ["## Figures", "", "- matplotlib is not installed; CSV files are plot-ready", ""]
    lines += ["## Gaps", ""]
    lines += [f"- missing: {g}" for g in gaps] if gaps else ["- none"]
    out = d / "summary.md"
    out.write_text("\n".join(lines) + "\n")
    return out
