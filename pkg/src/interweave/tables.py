"""Output tables: RFC 4180 CSV with a commented provenance preamble."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence


def format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return repr(value)
    if value is None:
        return ""
    return str(value)


@dataclass
class OutputTable:
    """Column names, rows and a provenance mapping written as ``# key=value``."""

    columns: Sequence[str]
    rows: list = field(default_factory=list)
    provenance: Mapping[str, Any] = field(default_factory=dict)

    def add(self, *row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} cells, expected {len(self.columns)}")
        self.rows.append(row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key in sorted(self.provenance):
            buf.write(f"# {key}={self.provenance[key]}\n")
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format_cell(v) for v in row])
        return buf.getvalue()

    def write(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(self.to_csv())


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    """Parse a table written by :class:`OutputTable` back into strings."""
    prov = {}
    with open(path, newline="", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("# ") and not body:
            key, _, value = line[2:].partition("=")
            prov[key] = value
        else:
            body.append(line)
    parsed = list(csv.reader(body))
    return prov, parsed[0], parsed[1:]


def dump_json(record: Mapping[str, Any]) -> str:
    """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(record, sort_keys=True, indent=2, allow_nan=True) + "\n"
