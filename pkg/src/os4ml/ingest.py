"""CSV ingestion: parse uploads into a columnar table and detect column types.

Detection applies four rules in fixed order; the first match wins:

1. binary   -- non-missing values are a subset of {"0","1"}, or case-
               insensitively a subset of {"true","false"} or {"yes","no"}
2. number   -- every non-missing value is a finite decimal (integer,
               fraction, or scientific notation)
3. category -- distinct count <= min(100, max(10, ceil(0.1 * non_missing)))
4. text     -- everything else

Missing means empty after trimming surrounding whitespace; sentinel strings
like "NA" are NOT treated as missing.
"""

from __future__ import annotations

import csv
import io
import math
import re
import uuid
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    CsvSchemaError,
    EmptyDatasetError,
    EncodingError,
    IngestionError,
    ShapeError,
    UndetectableColumnError,
)
from .objectstore import ObjectStore, utc_now_iso

# finite decimal only: rejects inf/nan/hex/underscores that float() would accept
_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")

_BINARY_SETS = ({"0", "1"}, {"true", "false"}, {"yes", "no"})


class SemanticType(str, Enum):
    BINARY = "binary"
    NUMBER = "number"
    CATEGORY = "category"
    TEXT = "text"


@dataclass
class Table:
    """Ordered column name -> cells; missing cells are None."""

    columns: dict[str, list[str | None]]
    row_count: int

    def column_names(self) -> list[str]:
        return list(self.columns.keys())

    def select(self, names: list[str]) -> "Table":
        return Table({n: self.columns[n] for n in names}, self.row_count)

    def take_rows(self, indices: list[int]) -> "Table":
        cols = {n: [cells[i] for i in indices] for n, cells in self.columns.items()}
        return Table(cols, len(indices))


@dataclass
class ColumnSchema:
    name: str
    detected_type: SemanticType
    num_missing: int
    distinct_count: int
    stats: dict | None

    def to_payload(self) -> dict:
        return {
            "name": self.name,
            "detected_type": self.detected_type.value,
            "num_missing": self.num_missing,
            "distinct_count": self.distinct_count,
            "stats": self.stats,
        }


@dataclass
class Databag:
    id: str
    name: str
    raw_artifact: str
    columns: list[ColumnSchema]
    row_count: int
    created_at: str = field(default_factory=utc_now_iso)

    def column(self, name: str) -> ColumnSchema:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(name)

    def to_payload(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "raw_artifact": self.raw_artifact,
            "columns": [c.to_payload() for c in self.columns],
            "row_count": self.row_count,
            "created_at": self.created_at,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "Databag":
        columns = [
            ColumnSchema(
                name=c["name"],
                detected_type=SemanticType(c["detected_type"]),
                num_missing=c["num_missing"],
                distinct_count=c["distinct_count"],
                stats=c["stats"],
            )
            for c in payload["columns"]
        ]
        return cls(
            id=payload["id"],
            name=payload["name"],
            raw_artifact=payload["raw_artifact"],
            columns=columns,
            row_count=payload["row_count"],
            created_at=payload["created_at"],
        )


def parse_csv(data: bytes) -> Table:
    """Parse RFC 4180 CSV (UTF-8, single header row) into a Table.

    Cells are trimmed; empty-after-trim becomes missing (None). Row numbers
    in errors count records starting at 1 for the header.
    """
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"input is not valid UTF-8: {exc}") from exc

    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise EmptyDatasetError("no header row") from None

    names = [h.strip() for h in header]
    if any(not n for n in names):
        raise CsvSchemaError("empty column name in header")
    dupes = {n for n in names if names.count(n) > 1}
    if dupes:
        raise CsvSchemaError(f"duplicate header fields: {sorted(dupes)}")

    columns: dict[str, list[str | None]] = {n: [] for n in names}
    row_count = 0
    for row_idx, row in enumerate(reader, start=2):
        if len(row) != len(names):
            raise ShapeError(
                f"row {row_idx} has {len(row)} fields, expected {len(names)}", row=row_idx
            )
        for name, raw in zip(names, row):
            cell = raw.strip()
            columns[name].append(cell if cell else None)
        row_count += 1

    if row_count == 0:
        raise EmptyDatasetError("no data rows after the header")
    return Table(columns, row_count)


def _is_number(value: str) -> bool:
    return bool(_NUMBER_RE.match(value))


def category_threshold(non_missing: int) -> int:
    return min(100, max(10, math.ceil(0.1 * non_missing)))


def detect_type(cells: list[str | None]) -> SemanticType:
    """Classify a column's cells; pure function of the multiset of values."""
    present = [c for c in cells if c is not None]
    if not present:
        raise UndetectableColumnError("all cells missing")

    lowered = {c.lower() for c in present}
    if any(lowered <= s for s in _BINARY_SETS):
        return SemanticType.BINARY
    if all(_is_number(c) for c in present):
        return SemanticType.NUMBER
    distinct = len(set(present))
    if distinct <= category_threshold(len(present)):
        return SemanticType.CATEGORY
    return SemanticType.TEXT


def column_stats(cells: list[str | None], detected: SemanticType) -> dict | None:
    """Summary stats: mean/std/min/max for number, vocab frequencies otherwise."""
    present = [c for c in cells if c is not None]
    if detected == SemanticType.NUMBER:
        values = [float(c) for c in present]
        n = len(values)
        mean = sum(values) / n
        var = sum((v - mean) ** 2 for v in values) / n
        return {
            "mean": mean,
            "std": math.sqrt(var),
            "min": min(values),
            "max": max(values),
        }
    if detected in (SemanticType.CATEGORY, SemanticType.BINARY):
        freqs: dict[str, int] = {}
        for c in present:
            freqs[c] = freqs.get(c, 0) + 1
        return {"vocabulary": freqs}
    return None


def build_schema(table: Table) -> list[ColumnSchema]:
    schemas = []
    for name, cells in table.columns.items():
        try:
            detected = detect_type(cells)
        except UndetectableColumnError:
            raise IngestionError(f"column {name!r} has no non-missing values") from None
        present = [c for c in cells if c is not None]
        schemas.append(
            ColumnSchema(
                name=name,
                detected_type=detected,
                num_missing=len(cells) - len(present),
                distinct_count=len(set(present)),
                stats=column_stats(cells, detected),
            )
        )
    return schemas


def build_databag(name: str, data: bytes, store: ObjectStore) -> Databag:
    """Ingest raw CSV bytes: store them and derive the per-column schema."""
    table = parse_csv(data)
    schemas = build_schema(table)
    artifact = store.put("datasets", data, "text/csv")
    return Databag(
        id=uuid.uuid4().hex,
        name=name,
        raw_artifact=artifact.digest,
        columns=schemas,
        row_count=table.row_count,
    )
