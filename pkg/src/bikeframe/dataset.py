"""Delimited dataset files: the 37-column design schema and the results
schema.

Files are comma-separated UTF-8 with LF line endings and a mandatory
header. Floats serialize via ``repr`` (shortest exact round-trip, well
inside 17 significant digits); missing values are empty cells, never
zero. Column order on write is canonical, but readers accept any order
with the exact column name set.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

from . import materials
from .errors import ParseError, SchemaError
from .geometry import FLAG_FIELDS, PARAM_COLUMNS, FrameParams
from .loadcases import PERFORMANCE_FIELDS, STATUSES, VALIDITY_CLASSES, PerformanceRecord

logger = logging.getLogger(__name__)

DESIGN_COLUMNS = ("row_id",) + PARAM_COLUMNS
RESULT_COLUMNS = ("row_id",) + PERFORMANCE_FIELDS + ("status", "validity")

# Raw categories that are rewritten to Aluminum on ingestion.
_SUBSTITUTED = {"Carbon", "Bamboo", "Other"}


@dataclass
class DesignTable:
    """Ordered design rows with stable ids.

    ``material_substitutions`` counts ingested cells whose raw material
    category was rewritten to Aluminum.
    """

    ids: list[str] = field(default_factory=list)
    rows: list[FrameParams] = field(default_factory=list)
    material_substitutions: int = 0

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class ResultTable:
    """One performance record and validity class per design row, same order."""

    ids: list[str] = field(default_factory=list)
    records: list[PerformanceRecord] = field(default_factory=list)
    validity: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float) and math.isnan(value):
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _open_writer(path):
    handle = open(path, "w", encoding="utf-8", newline="")
    return handle, csv.writer(handle, lineterminator="\n")


def _check_header(path, header, expected) -> dict[str, int]:
    if header is None:
        raise SchemaError(f"{path}: empty file, header row is mandatory")
    got = set(header)
    want = set(expected)
    missing = sorted(want - got)
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(repr(c) for c in missing)}")
    extra = sorted(got - want)
    if extra:
        raise SchemaError(f"{path}: unknown column(s) {', '.join(repr(c) for c in extra)}")
    if len(header) != len(expected):
        raise SchemaError(f"{path}: duplicated column in header")
    return {name: header.index(name) for name in expected}


def _parse_float(path, rownum, column, cell) -> float:
    if cell == "":
        return math.nan
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"{path}: row {rownum}, column {column!r}: cannot parse {cell!r}") from None


def _parse_bool(path, rownum, column, cell) -> bool:
    low = cell.strip().lower()
    if low in ("true", "1"):
        return True
    if low in ("false", "0"):
        return False
    raise ParseError(f"{path}: row {rownum}, column {column!r}: expected boolean, got {cell!r}")


def write_designs(path, table: DesignTable) -> None:
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(DESIGN_COLUMNS)
        for row_id, params in zip(table.ids, table.rows):
            record = params.as_dict()
            writer.writerow([row_id] + [_fmt(record[c]) for c in PARAM_COLUMNS])


def read_designs(path) -> DesignTable:
    """Load a design file, substituting raw material categories on the fly."""
    table = DesignTable()
    seen: set[str] = set()
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        index = _check_header(path, header, DESIGN_COLUMNS)
        for rownum, cells in enumerate(reader, start=2):
            if len(cells) != len(DESIGN_COLUMNS):
                raise ParseError(f"{path}: row {rownum}: expected {len(DESIGN_COLUMNS)} cells, got {len(cells)}")
            row_id = cells[index["row_id"]]
            if row_id in seen:
                raise ParseError(f"{path}: row {rownum}: duplicate row_id {row_id!r}")
            seen.add(row_id)

            values: dict[str, object] = {}
            for column in PARAM_COLUMNS:
                cell = cells[index[column]]
                if column == "material":
                    try:
                        values[column] = materials.substitute_category(cell.strip())
                    except KeyError:
                        raise ParseError(
                            f"{path}: row {rownum}, column 'material': unknown category {cell!r}"
                        ) from None
                    if cell.strip() in _SUBSTITUTED:
                        table.material_substitutions += 1
                elif column in FLAG_FIELDS:
                    values[column] = _parse_bool(path, rownum, column, cell)
                else:
                    values[column] = _parse_float(path, rownum, column, cell)
            table.ids.append(row_id)
            table.rows.append(FrameParams(**values))
    if table.material_substitutions:
        logger.info("%s: substituted %d material cell(s) to Aluminum", path, table.material_substitutions)
    return table


def write_results(path, table: ResultTable) -> None:
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(RESULT_COLUMNS)
        for row_id, record, validity in zip(table.ids, table.records, table.validity):
            values = record.values()
            writer.writerow(
                [row_id]
                + [_fmt(values[c]) for c in PERFORMANCE_FIELDS]
                + [record.status, validity]
            )


def read_results(path) -> ResultTable:
    table = ResultTable()
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        index = _check_header(path, header, RESULT_COLUMNS)
        for rownum, cells in enumerate(reader, start=2):
            if len(cells) != len(RESULT_COLUMNS):
                raise ParseError(f"{path}: row {rownum}: expected {len(RESULT_COLUMNS)} cells, got {len(cells)}")
            status = cells[index["status"]]
            if status not in STATUSES:
                raise ParseError(f"{path}: row {rownum}, column 'status': unknown status {status!r}")
            validity = cells[index["validity"]]
            if validity not in VALIDITY_CLASSES:
                raise ParseError(f"{path}: row {rownum}, column 'validity': unknown class {validity!r}")
            perf = {
                name: _parse_float(path, rownum, name, cells[index[name]])
                for name in PERFORMANCE_FIELDS
            }
            table.ids.append(cells[index["row_id"]])
            table.records.append(PerformanceRecord(**perf, status=status))
            table.validity.append(validity)
    return table


def write_feasibility_report(path, ids, reports) -> None:
    """Per-row feasibility output: row_id, feasible flag, violation codes."""
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(("row_id", "feasible", "violations"))
        for row_id, report in zip(ids, reports):
            writer.writerow((row_id, _fmt(report.feasible), ";".join(report.violations)))


def write_convergence_table(path, rows) -> None:
    """Sweep output: one row per subdivision level with the ten values."""
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(("elements_per_tube",) + PERFORMANCE_FIELDS + ("status",))
        for n, record in rows:
            values = record.values()
            writer.writerow([n] + [_fmt(values[c]) for c in PERFORMANCE_FIELDS] + [record.status])
