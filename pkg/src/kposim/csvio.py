"""Deterministic CSV emission for experiment datasets.

Layout: '#'-prefixed metadata lines (sorted key = value pairs, full
round-trip float precision), one column-name row, then data rows. No
timestamps or environment state, so re-running a configuration writes a
byte-identical file.
"""

from __future__ import annotations

import os
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = ["format_number", "write_csv", "read_csv"]


def format_number(x) -> str:
    """17 significant digits: enough to round-trip any float exactly."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path: str, meta: Mapping, columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    lines = []
    for key in sorted(meta):
        val = meta[key]
        sval = format_number(val) if isinstance(val, (int, float, np.floating, np.integer)) else str(val)
        lines.append(f"# {key} = {sval}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_number(x) for x in row))
    payload = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(payload)
    return path


def read_csv(path: str) -> tuple[dict, list[str], np.ndarray]:
    """Parse a dataset back into (metadata, column names, value array)."""
    meta: dict = {}
    columns: list[str] = []
    data: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    meta[key.strip()] = val.strip()
                continue
            if not columns:
                columns = line.split(",")
                continue
            data.append([float(x) for x in line.split(",")])
    values = np.array(data) if data else np.empty((0, len(columns)))
    return meta, columns, values
