"""Design-vector generation: Sobol thickness resampling, the seeded
reference-perturbation generator, and batch evaluation.

The Sobol generator emits the standard unscrambled sequence in Gray-code
order from embedded Joe-Kuo direction numbers, skipping the all-zeros
index-0 point (which would pin every tube at minimum thickness in row
one). The first emitted point is therefore (0.5, ..., 0.5).
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import DesignTable, ResultTable
from .errors import DomainError
from .geometry import (
    DIAMETER_FIELDS,
    GEOMETRY_FIELDS,
    THICKNESS_FIELDS,
    FrameParams,
    reference_params,
)
from .loadcases import SimulationConfig, classify_validity, evaluate_frame
from .materials import MATERIALS

logger = logging.getLogger(__name__)

THICKNESS_MIN = 0.0005  # m
THICKNESS_MAX = 0.010  # m

SOBOL_BITS = 30

# Joe-Kuo primitive polynomials and initial direction numbers (s, a, m_i)
# for dimensions 2..10; dimension 1 is the van der Corput sequence.
_JOE_KUO = (
    (1, 0, (1,)),
    (2, 1, (1, 3)),
    (3, 1, (1, 3, 1)),
    (3, 2, (1, 1, 1)),
    (4, 1, (1, 1, 3, 3)),
    (4, 4, (1, 3, 5, 13)),
    (5, 2, (1, 1, 5, 5, 17)),
    (5, 4, (1, 1, 5, 5, 5)),
    (5, 7, (1, 1, 7, 11, 19)),
)

MAX_DIMENSION = len(_JOE_KUO) + 1


def _direction_vectors(dimension: int) -> np.ndarray:
    """Direction integers, shape (dimension, SOBOL_BITS), msb-aligned."""
    out = np.zeros((dimension, SOBOL_BITS), dtype=np.uint64)
    for i in range(SOBOL_BITS):
        out[0, i] = np.uint64(1) << np.uint64(SOBOL_BITS - 1 - i)
    for d in range(1, dimension):
        s, a, m = _JOE_KUO[d - 1]
        v = out[d]
        for i in range(min(s, SOBOL_BITS)):
            v[i] = np.uint64(m[i]) << np.uint64(SOBOL_BITS - 1 - i)
        for i in range(s, SOBOL_BITS):
            v[i] = v[i - s] ^ (v[i - s] >> np.uint64(s))
            for k in range(1, s):
                if (a >> (s - 1 - k)) & 1:
                    v[i] ^= v[i - k]
    return out


@dataclass
class SobolState:
    """Position in the sequence; equal (dimension, index) means equal output.

    ``index`` is the Gray-order position of the next point to emit and
    starts at 1 (index 0 is the skipped all-zeros point).
    """

    dimension: int = 7
    index: int = 1
    _vectors: np.ndarray = field(init=False, repr=False)
    _current: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not 1 <= self.dimension <= MAX_DIMENSION:
            raise DomainError(f"dimension must be in [1, {MAX_DIMENSION}]")
        if self.index < 1:
            raise DomainError("index must be >= 1 (index 0 is skipped)")
        self._vectors = _direction_vectors(self.dimension)
        # Reconstruct the lattice point at Gray position index-1.
        gray = (self.index - 1) ^ ((self.index - 1) >> 1)
        current = np.zeros(self.dimension, dtype=np.uint64)
        bit = 0
        while gray:
            if gray & 1:
                current ^= self._vectors[:, bit]
            gray >>= 1
            bit += 1
        self._current = current


def sobol_next(state: SobolState) -> np.ndarray:
    """Emit the next point in [0, 1)^d and advance the state."""
    flip = (state.index & -state.index).bit_length() - 1
    state._current = state._current ^ state._vectors[:, flip]
    state.index += 1
    return state._current.astype(float) / float(1 << SOBOL_BITS)


def sobol_points(count: int, state: SobolState | None = None) -> np.ndarray:
    """Convenience batch draw, shape (count, dimension)."""
    state = state or SobolState()
    return np.array([sobol_next(state) for _ in range(count)])


def scale_thickness(u: float) -> float:
    """Map u in [0, 1] log-uniformly onto [0.5 mm, 10 mm].

    The log scale biases draws toward thinner tubes; the endpoints map
    exactly onto the range bounds.
    """
    if not 0.0 <= u <= 1.0:
        raise DomainError(f"u = {u} outside [0, 1]")
    if u == 0.0:
        return THICKNESS_MIN
    if u == 1.0:
        return THICKNESS_MAX
    lo = math.log(THICKNESS_MIN)
    hi = math.log(THICKNESS_MAX)
    return math.exp(lo + u * (hi - lo))


def resample_thicknesses(table: DesignTable, state: SobolState | None = None) -> DesignTable:
    """Override the seven thickness fields of every row from the Sobol
    stream (one 7D point per row, in row order); all other fields are
    untouched."""
    state = state or SobolState(dimension=len(THICKNESS_FIELDS))
    if state.dimension != len(THICKNESS_FIELDS):
        raise DomainError(f"need a {len(THICKNESS_FIELDS)}D Sobol state")
    rows = []
    for params in table.rows:
        point = sobol_next(state)
        updates = {name: scale_thickness(u) for name, u in zip(THICKNESS_FIELDS, point)}
        rows.append(dataclasses.replace(params, **updates))
    return DesignTable(
        ids=list(table.ids), rows=rows, material_substitutions=table.material_substitutions
    )


# Per-field perturbation treatment for the seeded generator.
_ANGLE_JITTER_DEG = 4.0
_FRACTION_RANGE = (0.15, 0.60)
_LENGTH_SPAN = (0.85, 1.15)
_DIAMETER_SPAN = (0.80, 1.25)


def generate_designs(count: int, seed: int = 0) -> DesignTable:
    """Seeded designs around the canonical road-bike row.

    Geometry lengths scale within +/-15%, angles jitter within +/-4
    degrees, diameters within -20/+25%, bridge fractions and flags are
    redrawn, the material is drawn uniformly, and all seven thicknesses
    come from the Sobol pipeline. As on the reference frame, the
    chain-stay roots stay pinned to the bb-shell ends and the seat-stay
    anchor to the top-tube junction, so generated skeletons never carry
    near-degenerate stub segments.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = np.random.default_rng(seed)
    base = reference_params()
    table = DesignTable()
    for i in range(count):
        values = base.as_dict()
        for name in GEOMETRY_FIELDS:
            if name.endswith("_deg"):
                values[name] = values[name] + rng.uniform(-_ANGLE_JITTER_DEG, _ANGLE_JITTER_DEG)
            elif name.endswith("_fraction"):
                values[name] = rng.uniform(*_FRACTION_RANGE)
            else:
                values[name] = values[name] * rng.uniform(*_LENGTH_SPAN)
        values["chain_stay_bb_half_spacing"] = values["bb_shell_length"] / 2.0
        values["seat_stay_junction_offset"] = values["seat_tube_top_tube_offset"]
        for name in DIAMETER_FIELDS:
            values[name] = values[name] * rng.uniform(*_DIAMETER_SPAN)
        values["material"] = str(rng.choice(MATERIALS))
        values["has_chain_stay_bridge"] = bool(rng.random() < 0.5)
        values["has_seat_stay_bridge"] = bool(rng.random() < 0.7)
        table.ids.append(f"{i:05d}")
        table.rows.append(FrameParams(**values))
    return resample_thicknesses(table, SobolState(dimension=len(THICKNESS_FIELDS)))


def _evaluate_one(args) -> tuple:
    params, config = args
    record = evaluate_frame(params, config)
    return record, classify_validity(record, config.fos_threshold)


def run_batch(table: DesignTable, config: SimulationConfig | None = None, jobs: int = 1) -> ResultTable:
    """Evaluate every design row; per-design failures become statuses.

    Output order equals input order at every parallelism level; rerunning
    with the same inputs reproduces the table exactly.
    """
    config = config or SimulationConfig()
    tasks = [(params, config) for params in table.rows]
    counts: Counter = Counter()
    records = []
    validity = []

    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_evaluate_one, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        outcomes = []
        for i, task in enumerate(tasks, start=1):
            outcome = _evaluate_one(task)
            outcomes.append(outcome)
            counts[outcome[1]] += 1
            if i % 50 == 0:
                logger.info("evaluated %d/%d: %s", i, len(tasks), dict(counts))

    for record, cls in outcomes:
        records.append(record)
        validity.append(cls)
    logger.info("batch complete (%d rows): %s", len(tasks), dict(Counter(validity)))
    return ResultTable(ids=list(table.ids), records=records, validity=validity)
