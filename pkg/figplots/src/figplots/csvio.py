"""Reader for the experiment CSV interchange format.

Files carry '#'-prefixed `key = value` metadata lines, a column-name row,
then numeric rows. The embedded `experiment` key is what render() checks
against the requested figure, so a stray file cannot be plotted as the
wrong panel.
"""

from __future__ import annotations

import numpy as np

__all__ = ["SchemaError", "Dataset", "read_dataset"]


class SchemaError(Exception):
    """Dataset is missing a required column or belongs to another figure."""


class Dataset:
    def __init__(self, path: str, meta: dict, columns: list[str], values: np.ndarray):
        self.path = path
        self.meta = meta
        self.columns = columns
        self.values = values

    def col(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise SchemaError(f"{self.path}: missing column {name!r} (has {self.columns})")
        return self.values[:, self.columns.index(name)]

    def param(self, key: str, default=None) -> str | None:
        return self.meta.get(f"param.{key}", default)


def read_dataset(path: str) -> Dataset:
    meta: dict = {}
    columns: list[str] = []
    rows: list[list[float]] = []
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
            rows.append([float(x) for x in line.split(",")])
    values = np.array(rows) if rows else np.empty((0, len(columns)))
    return Dataset(path, meta, columns, values)
