"""Loading and validation of beckflow CLI run directories.

A run record is one output directory: CSV tables with a schema comment line,
plus the metadata.json sidecar echoing the resolved configuration.  These
scripts never recompute science; every plotted number is a CSV cell.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

SCHEMA = "beckflow.v1"


class RecordError(Exception):
    """Unusable run directory: missing files, wrong schema, missing columns."""


@dataclass(frozen=True)
class Table:
    name: str
    columns: list[str]
    rows: list[list[str]]

    def column(self, name: str) -> list[str]:
        if name not in self.columns:
            raise RecordError(
                f"table {self.name!r} is missing column {name!r} "
                f"(has {', '.join(self.columns)})"
            )
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]

    def floats(self, name: str) -> list[float]:
        return [float(v) for v in self.column(name)]


@dataclass(frozen=True)
class RunRecord:
    path: Path
    command: str
    config: dict
    label: str

    def table(self, name: str) -> Table:
        path = self.path / f"{name}.csv"
        if not path.is_file():
            raise RecordError(f"{self.path} has no table {name!r}")
        lines = path.read_text().splitlines()
        if not lines or not lines[0].startswith(f"# schema={SCHEMA}"):
            raise RecordError(f"{path} does not carry schema {SCHEMA}")
        parsed = list(csv.reader(lines[1:]))
        if not parsed:
            raise RecordError(f"{path} has no header row")
        columns, rows = parsed[0], parsed[1:]
        if not rows:
            raise RecordError(f"table {name!r} in {self.path} is empty")
        return Table(name=name, columns=columns, rows=rows)


def load_record(run_dir) -> RunRecord:
    path = Path(run_dir)
    meta_path = path / "metadata.json"
    if not meta_path.is_file():
        raise RecordError(f"{path} is not a run directory (no metadata.json)")
    meta = json.loads(meta_path.read_text())
    if meta.get("schema") != SCHEMA:
        raise RecordError(
            f"{path} has schema {meta.get('schema')!r}, expected {SCHEMA!r}"
        )
    if "config" not in meta:
        raise RecordError(f"{path} metadata carries no config echo")
    return RunRecord(
        path=path,
        command=meta.get("command", "?"),
        config=meta["config"],
        label=path.name,
    )


def dump_cells(table: Table, columns: list[str]) -> str:
    """Plain-text listing of exactly the cells a figure consumed."""
    out = [f"table {table.name}: columns {', '.join(columns)}"]
    for col in columns:
        out.append(f"  {col} = {', '.join(table.column(col))}")
    return "\n".join(out)
