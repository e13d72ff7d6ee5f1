"""Post-processing over result tables: non-dominated extraction, Pearson
correlations, validity breakdowns, and summary statistics.

All statistics operate on Ok-status rows only (listwise deletion), so the
NaN sentinels of failed designs never enter a computation. The default
objective set is the five-value subset used for performance-space
exploration: three absolute deflections minimized, the in-plane safety
factor maximized, and mass minimized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import ResultTable, _open_writer
from .errors import EmptyInput, InsufficientData
from .loadcases import PERFORMANCE_FIELDS, STATUS_OK, VALIDITY_CLASSES

MINIMIZE = "min"
MAXIMIZE = "max"
IDENTITY = "identity"
ABSOLUTE = "abs"

# Undefined correlation entries (zero-variance column) carry this sentinel;
# it never propagates beyond the affected cells.
UNDEFINED_CORRELATION = math.nan


@dataclass(frozen=True)
class Objective:
    """One performance field with an optimization direction and transform."""

    field: str
    direction: str = MINIMIZE
    transform: str = IDENTITY

    def __post_init__(self) -> None:
        if self.field not in PERFORMANCE_FIELDS:
            raise ValueError(f"unknown performance field {self.field!r}")
        if self.direction not in (MINIMIZE, MAXIMIZE):
            raise ValueError(f"direction must be {MINIMIZE!r} or {MAXIMIZE!r}")
        if self.transform not in (IDENTITY, ABSOLUTE):
            raise ValueError(f"transform must be {IDENTITY!r} or {ABSOLUTE!r}")

    @property
    def label(self) -> str:
        return f"abs_{self.field}" if self.transform == ABSOLUTE else self.field


@dataclass(frozen=True)
class ObjectiveSpec:
    """Ordered, unique objectives defining the analysis space."""

    objectives: tuple[Objective, ...]

    def __post_init__(self) -> None:
        names = [o.field for o in self.objectives]
        if len(set(names)) != len(names):
            raise ValueError("objective fields must be unique")
        if not names:
            raise ValueError("at least one objective required")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(o.label for o in self.objectives)

    def matrix(self, results: ResultTable) -> tuple[list[str], np.ndarray]:
        """Transformed objective values over Ok rows, in input order."""
        ids = []
        values = []
        for row_id, record in zip(results.ids, results.records):
            if record.status != STATUS_OK:
                continue
            row = []
            for objective in self.objectives:
                v = getattr(record, objective.field)
                row.append(abs(v) if objective.transform == ABSOLUTE else v)
            ids.append(row_id)
            values.append(row)
        return ids, np.array(values, dtype=float).reshape(len(ids), len(self.objectives))


def default_objective_spec() -> ObjectiveSpec:
    """The canonical five-objective subset of the ten performance values."""
    return ObjectiveSpec(
        objectives=(
            Objective("inplane_dropout_vertical_disp", MINIMIZE, ABSOLUTE),
            Objective("transverse_bb_lateral_disp", MINIMIZE, ABSOLUTE),
            Objective("eccentric_bb_twist", MINIMIZE, ABSOLUTE),
            Objective("inplane_safety_factor", MAXIMIZE, IDENTITY),
            Objective("mass", MINIMIZE, IDENTITY),
        )
    )


def pareto_front(results: ResultTable, spec: ObjectiveSpec | None = None) -> set[str]:
    """Row ids not dominated by any other Ok row.

    Domination is weak dominance with at least one strict improvement:
    ties on every objective leave both rows non-dominated. Rows with
    non-Ok status are excluded up front.
    """
    spec = spec or default_objective_spec()
    ids, X = spec.matrix(results)
    if not ids:
        raise EmptyInput("no Ok rows to analyze")
    signs = np.array([1.0 if o.direction == MINIMIZE else -1.0 for o in spec.objectives])
    Y = X * signs  # all-minimize orientation

    # In lexicographic order every potential dominator of a row precedes
    # it, so each candidate only needs checking against the running front.
    order = np.lexsort(Y.T[::-1])
    front_rows = np.empty((0, Y.shape[1]))
    front_ids: set[str] = set()
    for idx in order:
        y = Y[idx]
        dominated = np.any(np.all(front_rows <= y, axis=1) & np.any(front_rows < y, axis=1))
        if not dominated:
            front_rows = np.vstack([front_rows, y])
            front_ids.add(ids[idx])
    return front_ids


def pearson_matrix(results: ResultTable, spec: ObjectiveSpec | None = None) -> np.ndarray:
    """Pearson correlation over transformed objectives, Ok rows only.

    Zero-variance columns yield the UNDEFINED_CORRELATION sentinel in
    their off-diagonal cells; the diagonal is forced to exactly 1.
    """
    spec = spec or default_objective_spec()
    _, X = spec.matrix(results)
    if X.shape[0] < 2:
        raise InsufficientData(f"need >= 2 Ok rows, have {X.shape[0]}")
    centered = X - X.mean(axis=0)
    spread = np.sqrt((centered**2).sum(axis=0))
    cov = centered.T @ centered
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = cov / np.outer(spread, spread)
    corr = (corr + corr.T) / 2.0
    corr[spread == 0.0, :] = UNDEFINED_CORRELATION
    corr[:, spread == 0.0] = UNDEFINED_CORRELATION
    np.fill_diagonal(corr, 1.0)
    return corr


def validity_breakdown(results: ResultTable) -> dict[str, int]:
    """Row counts per validity class; always reports all five classes."""
    counts = {cls: 0 for cls in VALIDITY_CLASSES}
    for cls in results.validity:
        counts[cls] += 1
    return counts


def summary_stats(results: ResultTable, spec: ObjectiveSpec | None = None) -> dict[str, dict[str, float]]:
    """Per-objective min/max/mean/median over Ok rows (NaN when empty)."""
    spec = spec or default_objective_spec()
    _, X = spec.matrix(results)
    stats: dict[str, dict[str, float]] = {}
    for j, label in enumerate(spec.labels):
        column = X[:, j] if X.shape[0] else np.array([])
        if column.size:
            stats[label] = {
                "min": float(column.min()),
                "max": float(column.max()),
                "mean": float(column.mean()),
                "median": float(np.median(column)),
            }
        else:
            stats[label] = {k: math.nan for k in ("min", "max", "mean", "median")}
    return stats


@dataclass
class AnalysisReport:
    """Aggregate analysis products for one result table."""

    validity_counts: dict[str, int]
    objective_labels: tuple[str, ...]
    non_dominated_ids: tuple[str, ...]  # input order
    correlation: np.ndarray
    stats: dict[str, dict[str, float]]


def build_report(results: ResultTable, spec: ObjectiveSpec | None = None) -> AnalysisReport:
    """Assemble the full report; degenerate inputs produce empty/NaN parts
    rather than errors so a breakdown is always available."""
    spec = spec or default_objective_spec()
    k = len(spec.objectives)
    try:
        front = pareto_front(results, spec)
        ordered = tuple(r for r in results.ids if r in front)
    except EmptyInput:
        ordered = ()
    try:
        corr = pearson_matrix(results, spec)
    except InsufficientData:
        corr = np.full((k, k), math.nan)
    return AnalysisReport(
        validity_counts=validity_breakdown(results),
        objective_labels=spec.labels,
        non_dominated_ids=ordered,
        correlation=corr,
        stats=summary_stats(results, spec),
    )


def subset_rows(results: ResultTable, size: int, seed: int = 0) -> ResultTable:
    """Seeded uniform subsample without replacement, input order preserved."""
    if size >= len(results):
        return ResultTable(list(results.ids), list(results.records), list(results.validity))
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(len(results), size=size, replace=False))
    return ResultTable(
        ids=[results.ids[i] for i in keep],
        records=[results.records[i] for i in keep],
        validity=[results.validity[i] for i in keep],
    )


def _fmt_cell(x: float) -> str:
    return "" if math.isnan(x) else repr(float(x))


def write_report(report: AnalysisReport, out_dir) -> list[Path]:
    """Emit the report as four delimited files in out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "validity_breakdown.csv"
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(("class", "count"))
        for cls in VALIDITY_CLASSES:
            writer.writerow((cls, report.validity_counts[cls]))
    written.append(path)

    path = out / "pareto_ids.csv"
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(("row_id",))
        for row_id in report.non_dominated_ids:
            writer.writerow((row_id,))
    written.append(path)

    path = out / "correlation_matrix.csv"
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(("objective",) + report.objective_labels)
        for label, row in zip(report.objective_labels, report.correlation):
            writer.writerow((label,) + tuple(_fmt_cell(v) for v in row))
    written.append(path)

    path = out / "summary_stats.csv"
    handle, writer = _open_writer(path)
    with handle:
        writer.writerow(("objective", "min", "max", "mean", "median"))
        for label in report.objective_labels:
            s = report.stats[label]
            writer.writerow((label,) + tuple(_fmt_cell(s[k]) for k in ("min", "max", "mean", "median")))
    written.append(path)
    return written
