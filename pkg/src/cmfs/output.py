"""Serialization of tabular results as aligned text, CSV, or JSON.

All three formats open with the same provenance header: toolkit version,
command, resolved configuration and dataset fingerprint. Tables print
numbers with six decimals; CSV and JSON keep full float precision.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from typing import Any

from cmfs import __version__

FORMATS = ("table", "delimited", "structured")


def fingerprint(name: str, raw: bytes, n_rows: int, n_features: int, n_classes: int) -> dict:
    return {
        "name": name,
        "rows": n_rows,
        "features": n_features,
        "classes": n_classes,
        "sha256": hashlib.sha256(raw).hexdigest(),
    }


@dataclass
class Document:
    command: str
    config: dict
    datasets: list[dict]
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def header(self) -> dict:
        return {
            "toolkit": "cmfs",
            "version": __version__,
            "command": self.command,
            "config": self.config,
            "datasets": self.datasets,
        }


def _header_lines(doc: Document) -> list[str]:
    lines = [
        f"# cmfs {__version__}",
        f"# command: {doc.command}",
        "# config: " + json.dumps(doc.config, sort_keys=True, separators=(",", ":")),
    ]
    for ds in doc.datasets:
        lines.append("# dataset: " + " ".join(f"{k}={ds[k]}" for k in ("name", "rows", "features", "classes", "sha256") if k in ds))
    lines.extend(f"# {note}" for note in doc.notes)
    return lines


def _cell_text(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.6f}"
    if value is None:
        return "-"
    return str(value)


def render_table(doc: Document) -> str:
    cells = [[_cell_text(v) for v in row] for row in doc.rows]
    widths = [len(c) for c in doc.columns]
    for row in cells:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    numeric = [
        all(isinstance(row[j], (int, float)) and not isinstance(row[j], bool) for row in doc.rows) and bool(doc.rows)
        for j in range(len(doc.columns))
    ]

    def line(values):
        parts = [v.rjust(w) if num else v.ljust(w) for v, w, num in zip(values, widths, numeric)]
        return "  ".join(parts).rstrip()

    out = _header_lines(doc)
    out.append(line(doc.columns))
    out.append("  ".join("-" * w for w in widths))
    out.extend(line(row) for row in cells)
    for key, value in doc.summary.items():
        out.append(f"# {key}: {_summary_text(value)}")
    return "\n".join(out) + "\n"


def _summary_text(value: Any) -> str:
    if isinstance(value, dict):
        return ", ".join(f"{k}={_cell_text(v)}" for k, v in value.items())
    return _cell_text(value)


def _full(value: Any) -> Any:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return value


def render_delimited(doc: Document) -> str:
    buf = io.StringIO()
    buf.write("\n".join(_header_lines(doc)) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(doc.columns)
    for row in doc.rows:
        writer.writerow([_full(v) for v in row])
    return buf.getvalue()


def render_structured(doc: Document) -> str:
    payload = {
        "header": doc.header(),
        "notes": doc.notes,
        "columns": doc.columns,
        "records": [dict(zip(doc.columns, row)) for row in doc.rows],
        "summary": doc.summary,
    }
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def render(doc: Document, fmt: str) -> str:
    if fmt == "table":
        return render_table(doc)
    if fmt == "delimited":
        return render_delimited(doc)
    if fmt == "structured":
        return render_structured(doc)
    raise ValueError(f"unknown format {fmt!r}")
