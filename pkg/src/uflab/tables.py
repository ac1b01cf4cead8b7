"""Fixed-schema result tables with stable CSV/JSON rendering."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np


class SchemaError(KeyError):
    """A table lacks a column that was asked for."""

    def __str__(self):
        return str(self.args[0]) if self.args else "schema error"


def format_value(value) -> str:
    """Rates and means to 6 significant digits, integers in full."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value) + 0.0, ".6g")  # + 0.0 folds -0 into 0
    return str(value)


def _json_value(value):
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    # round-trip through the CSV text so both formats carry the same digits
    return float(format_value(value))


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def append(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        try:
            k = self.columns.index(name)
        except ValueError:
            raise SchemaError(f"no column {name!r}; have {', '.join(self.columns)}") from None
        return [row[k] for row in self.rows]

    def records(self) -> list[dict]:
        return [dict(zip(self.columns, row)) for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_value(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [{c: _json_value(v) for c, v in zip(self.columns, row)} for row in self.rows]
        return json.dumps({"columns": list(self.columns), "rows": rows}, indent=1) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")


def _parse_cell(text: str):
    if text == "":
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_csv(text: str) -> Table:
    """Inverse of :meth:`Table.to_csv`, with numeric cells converted."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty table: no header row") from None
    table = Table(tuple(header))
    for row in reader:
        table.append(*(_parse_cell(c) for c in row))
    return table


def parse_json(text: str) -> Table:
    data = json.loads(text)
    table = Table(tuple(data["columns"]))
    for row in data["rows"]:
        table.append(*(row[c] for c in table.columns))
    return table
