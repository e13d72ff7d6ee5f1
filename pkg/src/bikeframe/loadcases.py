"""The three load cases, the ten-value performance record, and the
frame-evaluation pipeline.

Case recipes (head tube fully fixed in all three):

* in-plane   -- the total dropout force (default 2000 N) splits evenly
  upward between the two dropouts against an equal downward force at the
  bottom bracket.
* transverse -- lateral force (default 500 N) at the bottom bracket with
  dropout lateral translation blocked.
* eccentric  -- downward force (default 2000 N) plus a fore-aft-axis
  moment (default 140 N m = 2000 N at a 7 cm offset) at the bottom
  bracket, dropouts held vertically and laterally.

Pipeline failures never raise out of evaluate_frame: each design lands in
a status class, and non-Ok records carry NaN in every performance field
(serialized as empty cells, never zero).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import materials
from .errors import BuildFailure, DegenerateTube, MissingLabel, ParseError, SchemaError, SingularSystem
from .fea import BeamModel, assemble_and_solve, compute_mass, compute_stress_summary, discretize
from .geometry import FrameParams, build_skeleton, check_feasibility


class LoadCase(Enum):
    IN_PLANE = "InPlane"
    TRANSVERSE = "Transverse"
    ECCENTRIC = "Eccentric"


STATUS_OK = "Ok"
STATUS_GEOMETRIC_INFEASIBLE = "GeometricInfeasible"
STATUS_BUILD_FAILED = "BuildFailed"
STATUS_SIM_FAILED = "SimFailed"
STATUSES = (STATUS_OK, STATUS_GEOMETRIC_INFEASIBLE, STATUS_BUILD_FAILED, STATUS_SIM_FAILED)

VALIDITY_VALID = "Valid"
VALIDITY_STRUCTURAL_FAILURE = "StructuralFailure"
VALIDITY_CLASSES = (
    VALIDITY_VALID,
    VALIDITY_STRUCTURAL_FAILURE,
    STATUS_GEOMETRIC_INFEASIBLE,
    STATUS_BUILD_FAILED,
    STATUS_SIM_FAILED,
)

PERFORMANCE_FIELDS = (
    "inplane_bb_vertical_disp",
    "inplane_bb_lateral_disp",
    "inplane_dropout_vertical_disp",
    "inplane_dropout_lateral_disp",
    "inplane_safety_factor",
    "transverse_bb_lateral_disp",
    "eccentric_bb_vertical_disp",
    "eccentric_bb_twist",
    "eccentric_safety_factor",
    "mass",
)

_CASE_FIELDS = {
    LoadCase.IN_PLANE: PERFORMANCE_FIELDS[0:5],
    LoadCase.TRANSVERSE: PERFORMANCE_FIELDS[5:6],
    LoadCase.ECCENTRIC: PERFORMANCE_FIELDS[6:9],
}


@dataclass(frozen=True)
class PerformanceRecord:
    """Ten performance values (six displacements, one rotation, two safety
    factors, mass) plus the pipeline status."""

    inplane_bb_vertical_disp: float
    inplane_bb_lateral_disp: float
    inplane_dropout_vertical_disp: float
    inplane_dropout_lateral_disp: float
    inplane_safety_factor: float
    transverse_bb_lateral_disp: float
    eccentric_bb_vertical_disp: float
    eccentric_bb_twist: float
    eccentric_safety_factor: float
    mass: float
    status: str = STATUS_OK

    @classmethod
    def failed(cls, status: str) -> "PerformanceRecord":
        """Record for a design that never produced values (all fields NaN)."""
        return cls(*([math.nan] * len(PERFORMANCE_FIELDS)), status=status)

    @property
    def is_ok(self) -> bool:
        return self.status == STATUS_OK

    def values(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in PERFORMANCE_FIELDS}


@dataclass(frozen=True)
class SimulationConfig:
    """Run settings; defaults reproduce the canonical load magnitudes.

    ``modulus_scale`` is the material override hook: it multiplies both
    elastic and shear modulus before solving.
    """

    elements_per_tube: int = 16
    fos_threshold: float = 1.0
    inplane_force_N: float = 2000.0
    transverse_force_N: float = 500.0
    eccentric_force_N: float = 2000.0
    eccentric_moment_Nm: float = 140.0
    modulus_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.elements_per_tube < 1:
            raise ValueError("elements_per_tube must be >= 1")
        for name in (
            "fos_threshold",
            "inplane_force_N",
            "transverse_force_N",
            "eccentric_force_N",
            "eccentric_moment_Nm",
            "modulus_scale",
        ):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")


_CONFIG_TYPES = {
    "elements_per_tube": int,
    "fos_threshold": float,
    "inplane_force_N": float,
    "transverse_force_N": float,
    "eccentric_force_N": float,
    "eccentric_moment_Nm": float,
    "modulus_scale": float,
}


def load_config(path) -> SimulationConfig:
    """Read a flat ``key = value`` config file; missing keys keep defaults.

    Blank lines and ``#`` comments are ignored. Unknown keys are a
    SchemaError; unparseable or non-positive values a ParseError.
    """
    values: dict[str, object] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _CONFIG_TYPES:
                raise SchemaError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                values[key] = _CONFIG_TYPES[key](value.strip())
            except ValueError:
                raise ParseError(f"{path}:{lineno}: cannot parse value for {key!r}") from None
    try:
        return SimulationConfig(**values)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None


def apply_load_case(model: BeamModel, case: LoadCase, config: SimulationConfig) -> BeamModel:
    """Return the model with one case's constraints and loads installed.

    Requires the "head_tube", "bb", and dropout tags created by
    discretize; raises MissingLabel otherwise.
    """
    for role in ("head_tube", "bb", "dropout_left", "dropout_right"):
        if role not in model.tags:
            raise MissingLabel(f"model has no {role!r} node tag")

    constraints = np.zeros((model.n_nodes, 6), dtype=bool)
    loads = np.zeros((model.n_nodes, 6))
    constraints[model.tags["head_tube"], :] = True
    bb = int(model.tags["bb"][0])
    left = int(model.tags["dropout_left"][0])
    right = int(model.tags["dropout_right"][0])

    if case is LoadCase.IN_PLANE:
        loads[left, 1] += config.inplane_force_N / 2.0
        loads[right, 1] += config.inplane_force_N / 2.0
        loads[bb, 1] -= config.inplane_force_N
    elif case is LoadCase.TRANSVERSE:
        constraints[[left, right], 2] = True
        loads[bb, 2] += config.transverse_force_N
    elif case is LoadCase.ECCENTRIC:
        constraints[[left, right], 1] = True
        constraints[[left, right], 2] = True
        loads[bb, 1] -= config.eccentric_force_N
        loads[bb, 3] += config.eccentric_moment_Nm
    else:  # pragma: no cover - enum is closed
        raise ValueError(case)

    return model.with_case(constraints, loads)


def _scaled_material(params: FrameParams, config: SimulationConfig) -> materials.MaterialProperties:
    mat = materials.lookup(params.material)
    if config.modulus_scale != 1.0:
        mat = dataclasses.replace(
            mat,
            elastic_modulus=mat.elastic_modulus * config.modulus_scale,
            shear_modulus=mat.shear_modulus * config.modulus_scale,
        )
    return mat


def evaluate_frame(params: FrameParams, config: SimulationConfig | None = None) -> PerformanceRecord:
    """Run the full pipeline for one design: checks, build, three solves.

    Never raises for a finite design vector; the status field records the
    first pipeline stage that failed. Dropout displacements average the
    left and right dropout values; the twist is the fore-aft-axis rotation
    at the bottom bracket.
    """
    config = config or SimulationConfig()
    if not check_feasibility(params).feasible:
        return PerformanceRecord.failed(STATUS_GEOMETRIC_INFEASIBLE)
    try:
        skeleton = build_skeleton(params)
    except BuildFailure:
        return PerformanceRecord.failed(STATUS_BUILD_FAILED)

    material = _scaled_material(params, config)
    try:
        model = discretize(skeleton, params, config.elements_per_tube, material=material)
    except (DegenerateTube, OverflowError):
        # OverflowError: absurd-but-finite sections (od ~ 1e200) overflow
        # the closed forms; that is simulation failure, not a crash.
        return PerformanceRecord.failed(STATUS_SIM_FAILED)

    bb = int(model.tags["bb"][0])
    left = int(model.tags["dropout_left"][0])
    right = int(model.tags["dropout_right"][0])
    out: dict[str, float] = {}
    try:
        for case in LoadCase:
            loaded = apply_load_case(model, case, config)
            solution = assemble_and_solve(loaded)
            disp = solution.displacements
            if case is LoadCase.IN_PLANE:
                out["inplane_bb_vertical_disp"] = float(disp[bb, 1])
                out["inplane_bb_lateral_disp"] = float(disp[bb, 2])
                out["inplane_dropout_vertical_disp"] = float((disp[left, 1] + disp[right, 1]) / 2.0)
                out["inplane_dropout_lateral_disp"] = float((disp[left, 2] + disp[right, 2]) / 2.0)
                out["inplane_safety_factor"] = compute_stress_summary(
                    loaded, solution, material.yield_strength
                ).safety_factor
            elif case is LoadCase.TRANSVERSE:
                out["transverse_bb_lateral_disp"] = float(disp[bb, 2])
            else:
                out["eccentric_bb_vertical_disp"] = float(disp[bb, 1])
                out["eccentric_bb_twist"] = float(solution.rotations[bb, 0])
                out["eccentric_safety_factor"] = compute_stress_summary(
                    loaded, solution, material.yield_strength
                ).safety_factor
        out["mass"] = compute_mass(skeleton, params, material.density)
    except (SingularSystem, MissingLabel, OverflowError):
        return PerformanceRecord.failed(STATUS_SIM_FAILED)

    return PerformanceRecord(**out, status=STATUS_OK)


def classify_validity(record: PerformanceRecord, fos_threshold: float = 1.0) -> str:
    """Valid iff the record is Ok and both safety factors meet the threshold
    (>= semantics at the boundary); non-Ok statuses pass through."""
    if not record.is_ok:
        return record.status
    if (
        record.inplane_safety_factor >= fos_threshold
        and record.eccentric_safety_factor >= fos_threshold
    ):
        return VALIDITY_VALID
    return VALIDITY_STRUCTURAL_FAILURE
