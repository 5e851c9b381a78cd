"""Aligned-text and CSV report emission.

Every report is written twice: a human-readable aligned table and a
machine-readable CSV twin. Emission is deterministic, so identical
results produce byte-identical files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError

_METRIC_COLUMNS = ("c", "ic", "cf", "mpe_in", "mpe_out", "mee_in", "mee_out")


@dataclass(frozen=True)
class ReportTable:
    title: str
    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    note: str = ""


def _cell(value, digits=3) -> str:
    if value is None:
        return "--"
    if isinstance(value, tuple):
        return f"{value[0]:.{digits}f} ({value[1]:.{digits}f})"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def format_text(table: ReportTable) -> str:
    widths = [len(c) for c in table.columns]
    for row in table.rows:
        for k, cell in enumerate(row):
            widths[k] = max(widths[k], len(cell))
    lines = [table.title, ""]
    lines.append("  ".join(c.ljust(widths[k]) for k, c in enumerate(table.columns)))
    lines.append("  ".join("-" * w for w in widths))
    for row in table.rows:
        lines.append("  ".join(cell.ljust(widths[k]) for k, cell in enumerate(row)))
    if table.note:
        lines.extend(["", table.note])
    lines.append("")
    return "\n".join(lines)


def emit_report(tables, out_dir, basename: str) -> list[Path]:
    """Write aligned text plus a CSV per table; returns the paths."""
    tables = list(tables)
    if not tables:
        raise ValueError("nothing to report")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out_dir}: {exc}") from exc
    paths = []
    text_path = out_dir / f"{basename}.txt"
    try:
        with open(text_path, "w", encoding="utf-8") as fh:
            for t in tables:
                fh.write(format_text(t))
                fh.write("\n")
    except OSError as exc:
        raise DataError(f"cannot write {text_path}: {exc}") from exc
    paths.append(text_path)
    for k, t in enumerate(tables):
        suffix = "" if len(tables) == 1 else f"_{k + 1}"
        csv_path = out_dir / f"{basename}{suffix}.csv"
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(t.columns)
            writer.writerows(t.rows)
        paths.append(csv_path)
    return paths


def simulation_table(result) -> ReportTable:
    """Paper-style summary: one row per method, mean (sd) per metric."""
    spec = result.spec
    rows = []
    for row in result.summary():
        cells = [row["method"]]
        for name in _METRIC_COLUMNS:
            cells.append(_cell(row[name]))
        rows.append(tuple(cells))
    note = (f"example {spec.example}, n_tr={spec.n_tr}, n_te={spec.n_te}, "
            f"error={spec.error}, tau={spec.tau}, "
            f"replications={len(result.replications)}, seed={spec.seed}, "
            f"failures={result.failures}")
    return ReportTable(
        title="Monte Carlo summary: mean (sd) per metric",
        columns=("method", "C", "IC", "CF", "mpe_in", "mpe_out",
                 "mee_in", "mee_out"),
        rows=tuple(rows),
        note=note,
    )
