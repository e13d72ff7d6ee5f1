"""Discretization sweep: rerun a frame at increasing elements-per-tube.

Mirrors a mesh-resolution convergence study, translated to beam
subdivision. Rows that fail to solve are recorded with their failure
status instead of aborting the sweep.
"""

from __future__ import annotations

import dataclasses
import math

from .geometry import FrameParams
from .loadcases import (
    _CASE_FIELDS,
    LoadCase,
    PerformanceRecord,
    SimulationConfig,
    evaluate_frame,
)

DEFAULT_SUBDIVISIONS = (1, 2, 4, 8, 16, 32)


def _mask_to_case(record: PerformanceRecord, case: LoadCase) -> PerformanceRecord:
    """Blank every field not measured by the given case (mass is kept)."""
    keep = set(_CASE_FIELDS[case]) | {"mass"}
    updates = {name: math.nan for name in record.values() if name not in keep}
    return dataclasses.replace(record, **updates)


def convergence_study(
    params: FrameParams,
    case: LoadCase | None = None,
    subdivisions=DEFAULT_SUBDIVISIONS,
    config: SimulationConfig | None = None,
) -> list[tuple[int, PerformanceRecord]]:
    """Evaluate the frame at each subdivision level.

    Returns (elements_per_tube, record) rows in sweep order. With a
    specific ``case``, only that case's measured quantities (plus mass)
    are reported; ``case=None`` keeps all ten values.
    """
    subdivisions = [int(n) for n in subdivisions]
    if not subdivisions or any(n < 1 for n in subdivisions):
        raise ValueError("subdivisions must be positive integers")
    config = config or SimulationConfig()

    rows: list[tuple[int, PerformanceRecord]] = []
    for n in subdivisions:
        record = evaluate_frame(params, dataclasses.replace(config, elements_per_tube=n))
        if case is not None and record.is_ok:
            record = _mask_to_case(record, case)
        rows.append((n, record))
    return rows
