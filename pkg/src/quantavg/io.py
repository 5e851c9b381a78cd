"""CSV ingestion and emission.

Input files are RFC-4180 CSV with a header row. Floats are written with
repr precision so a written dataset reloads bit-identically.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import ConfigError, DataError


@dataclass(frozen=True)
class ColumnSchema:
    """Which columns carry the response and predictors, plus a transform.

    Columns may be named (header labels) or 0-based integer indices.
    transform="log" applies the natural log to every predictor and
    requires strictly positive values.
    """

    response: str | int
    predictors: tuple[str | int, ...]
    transform: str = "none"

    def __post_init__(self):
        if self.transform not in ("none", "log"):
            raise ConfigError(f"unknown transform {self.transform!r}")
        if len(self.predictors) < 1:
            raise ConfigError("schema needs at least one predictor")


def schema_from_json(path) -> ColumnSchema:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read schema file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc
    try:
        return ColumnSchema(response=raw["response"],
                            predictors=tuple(raw["predictors"]),
                            transform=raw.get("transform", "none"))
    except KeyError as exc:
        raise ConfigError(f"schema file missing key {exc}") from exc


def _resolve(header: list[str], col: str | int, path) -> int:
    if isinstance(col, int):
        if not 0 <= col < len(header):
            raise DataError(f"{path}: column index {col} out of range")
        return col
    try:
        return header.index(col)
    except ValueError:
        raise DataError(f"{path}: no column named {col!r}") from None


def load_csv(path, schema: ColumnSchema) -> Dataset:
    """Read a CSV into a Dataset, applying the schema's transform.

    Missing or unparseable cells raise DataError naming the row and
    column; so do nonpositive predictor values under the log transform.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = list(reader)
    if not rows:
        raise DataError(f"{path}: no data rows")
    yi = _resolve(header, schema.response, path)
    xi = [_resolve(header, c, path) for c in schema.predictors]
    names = tuple(header[i] for i in xi)

    def cell(row_idx, row, col_idx):
        name = header[col_idx]
        if col_idx >= len(row) or row[col_idx].strip() == "":
            raise DataError(f"{path}: missing cell at row {row_idx + 2}, "
                            f"column {name}")
        try:
            return float(row[col_idx])
        except ValueError:
            raise DataError(f"{path}: unparseable cell at row {row_idx + 2}, "
                            f"column {name}: {row[col_idx]!r}") from None

    y = np.array([cell(i, row, yi) for i, row in enumerate(rows)])
    X = np.array([[cell(i, row, j) for j in xi] for i, row in enumerate(rows)])
    if schema.transform == "log":
        bad = np.argwhere(X <= 0.0)
        if bad.size:
            i, j = bad[0]
            raise DataError(
                f"{path}: log transform needs positive values; row {i + 2}, "
                f"column {names[j]} has {X[i, j]!r}")
        X = np.log(X)
    return Dataset(X, y, columns=names)


def write_dataset_csv(path, data: Dataset, response_name: str = "y") -> None:
    names = data.columns or tuple(f"x{j + 1}" for j in range(data.p))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([response_name, *names])
        for i in range(data.n):
            writer.writerow([repr(float(data.y[i])),
                             *(repr(float(v)) for v in data.X[i])])
