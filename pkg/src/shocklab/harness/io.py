"""CSV writing and reading for run directories.

Floats are written with ``repr`` so that reading a file back gives the exact
same doubles.  Every file has a header row and LF line endings.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path


def _cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return ""
    if hasattr(x, "item"):            # numpy scalars
        return _cell(x.item())
    return str(x)


def _parse(s: str):
    if s == "":
        return None
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(x) for x in row])
    return path


def read_csv(path) -> tuple[list[str], list[list]]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[_parse(s) for s in row] for row in r]
    return header, rows


def read_columns(path) -> dict:
    header, rows = read_csv(path)
    return {h: [row[i] for row in rows] for i, h in enumerate(header)}


def write_keyvalue(path, pairs) -> Path:
    """Two-column ``key,value`` table."""
    return write_csv(path, ["key", "value"], list(pairs))


def read_keyvalue(path) -> dict:
    _, rows = read_csv(path)
    return {row[0]: row[1] for row in rows}


def finite_or_none(x):
    return x if isinstance(x, (int, float)) and math.isfinite(x) else None
