"""Parametric diamond-frame geometry: design vector, skeleton construction,
and geometric feasibility checks.

Coordinate convention: x forward (toward the head tube), y up, z lateral
right, with the bottom-bracket center at the origin. All internal units are
SI (meters); angles cross the API boundary in degrees and are converted to
radians here.

The 37-value design vector breaks down as 18 geometry relations, 9 tube
outer diameters, 7 wall thicknesses, 1 material category, and 2 bridge
flags. Bridges reuse the wall thickness of their parent stays because the
parameter budget carries no thickness slots for them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple

import numpy as np

from .errors import BuildFailure, DomainError

GEOMETRY_FIELDS = (
    "stack",
    "reach",
    "head_tube_angle_deg",
    "head_tube_length",
    "seat_tube_angle_deg",
    "seat_tube_length",
    "seat_tube_top_tube_offset",
    "head_tube_upper_offset",
    "head_tube_lower_offset",
    "chain_stay_length",
    "bb_drop",
    "rear_axle_spacing",
    "chain_stay_bb_half_spacing",
    "seat_stay_junction_offset",
    "seat_stay_half_spacing",
    "bb_shell_length",
    "chain_stay_bridge_fraction",
    "seat_stay_bridge_fraction",
)

DIAMETER_FIELDS = (
    "top_tube_od",
    "down_tube_od",
    "seat_tube_od",
    "head_tube_od",
    "bb_shell_od",
    "chain_stay_od",
    "seat_stay_od",
    "chain_stay_bridge_od",
    "seat_stay_bridge_od",
)

THICKNESS_FIELDS = (
    "top_tube_t",
    "down_tube_t",
    "seat_tube_t",
    "head_tube_t",
    "bb_shell_t",
    "chain_stay_t",
    "seat_stay_t",
)

FLAG_FIELDS = ("has_chain_stay_bridge", "has_seat_stay_bridge")

# Canonical column order of the design-file schema.
PARAM_COLUMNS = GEOMETRY_FIELDS + DIAMETER_FIELDS + THICKNESS_FIELDS + ("material",) + FLAG_FIELDS

# The nine section ids; each names an (outer diameter, wall thickness) pair.
SECTION_KINDS = (
    "top_tube",
    "down_tube",
    "seat_tube",
    "head_tube",
    "bb_shell",
    "chain_stay",
    "seat_stay",
    "chain_stay_bridge",
    "seat_stay_bridge",
)

# Feasibility violation codes.
NON_POSITIVE_DIMENSION = "NonPositiveDimension"
ANGLE_OUT_OF_RANGE = "AngleOutOfRange"
STAY_INTERSECTION_FAILURE = "StayIntersectionFailure"
THICKNESS_EXCEEDS_RADIUS = "ThicknessExceedsRadius"
DEGENERATE_TUBE = "DegenerateTube"
BUILD_FAILURE = "BuildFailure"

VIOLATION_CODES = (
    NON_POSITIVE_DIMENSION,
    ANGLE_OUT_OF_RANGE,
    STAY_INTERSECTION_FAILURE,
    THICKNESS_EXCEEDS_RADIUS,
    DEGENERATE_TUBE,
    BUILD_FAILURE,
)

# Tubes shorter than this cannot be meshed and count as degenerate.
MIN_TUBE_LENGTH = 1e-6
# Stations closer than this along a tube axis collapse into one node.
_STATION_EPS = 1e-9


@dataclass(frozen=True)
class FrameParams:
    """The 37-value design vector. Field order is the canonical file schema."""

    stack: float
    reach: float
    head_tube_angle_deg: float
    head_tube_length: float
    seat_tube_angle_deg: float
    seat_tube_length: float
    seat_tube_top_tube_offset: float
    head_tube_upper_offset: float
    head_tube_lower_offset: float
    chain_stay_length: float
    bb_drop: float
    rear_axle_spacing: float
    chain_stay_bb_half_spacing: float
    seat_stay_junction_offset: float
    seat_stay_half_spacing: float
    bb_shell_length: float
    chain_stay_bridge_fraction: float
    seat_stay_bridge_fraction: float
    top_tube_od: float
    down_tube_od: float
    seat_tube_od: float
    head_tube_od: float
    bb_shell_od: float
    chain_stay_od: float
    seat_stay_od: float
    chain_stay_bridge_od: float
    seat_stay_bridge_od: float
    top_tube_t: float
    down_tube_t: float
    seat_tube_t: float
    head_tube_t: float
    bb_shell_t: float
    chain_stay_t: float
    seat_stay_t: float
    material: str
    has_chain_stay_bridge: bool
    has_seat_stay_bridge: bool

    def section(self, kind: str) -> tuple[float, float]:
        """Return (outer diameter, wall thickness) for a section id.

        Bridge sections reuse the thickness of their parent stay.
        """
        if kind == "chain_stay_bridge":
            return self.chain_stay_bridge_od, self.chain_stay_t
        if kind == "seat_stay_bridge":
            return self.seat_stay_bridge_od, self.seat_stay_t
        if kind not in SECTION_KINDS:
            raise KeyError(f"unknown section kind {kind!r}")
        return getattr(self, kind + "_od"), getattr(self, kind + "_t")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def reference_params() -> FrameParams:
    """Canonical road-bike fixture (56 cm steel frame, seat-stay bridge only).

    This is the documented reference row: perturbation-based design
    generation starts from it and tests use it as the known-good frame.
    The chain-stay roots sit exactly at the bb-shell ends and the seat-stay
    anchor coincides with the top-tube junction, as on a conventional
    frame, so the skeleton contains no sub-millimeter stub segments.
    """
    return FrameParams(
        stack=0.565,
        reach=0.389,
        head_tube_angle_deg=73.0,
        head_tube_length=0.155,
        seat_tube_angle_deg=73.5,
        seat_tube_length=0.560,
        seat_tube_top_tube_offset=0.030,
        head_tube_upper_offset=0.030,
        head_tube_lower_offset=0.040,
        chain_stay_length=0.410,
        bb_drop=0.070,
        rear_axle_spacing=0.130,
        chain_stay_bb_half_spacing=0.034,
        seat_stay_junction_offset=0.030,
        seat_stay_half_spacing=0.016,
        bb_shell_length=0.068,
        chain_stay_bridge_fraction=0.20,
        seat_stay_bridge_fraction=0.25,
        top_tube_od=0.0286,
        down_tube_od=0.0349,
        seat_tube_od=0.0286,
        head_tube_od=0.0365,
        bb_shell_od=0.0400,
        chain_stay_od=0.0220,
        seat_stay_od=0.0160,
        chain_stay_bridge_od=0.0140,
        seat_stay_bridge_od=0.0140,
        top_tube_t=0.0009,
        down_tube_t=0.0009,
        seat_tube_t=0.0009,
        head_tube_t=0.0011,
        bb_shell_t=0.0025,
        chain_stay_t=0.0009,
        seat_stay_t=0.0008,
        material="Steel",
        has_chain_stay_bridge=False,
        has_seat_stay_bridge=True,
    )


class SectionProperties(NamedTuple):
    """Closed-form annulus section properties."""

    area: float  # m^2
    i_bend: float  # m^4, identical about both transverse axes
    j_torsion: float  # m^4, polar = 2 * i_bend for the annulus


def tube_section_properties(od: float, t: float) -> SectionProperties:
    """Annulus properties for a constant-section tube.

    Requires 0 < t < od/2 so the inner radius stays positive; the solid-rod
    limit t = od/2 is permitted and degenerates to a disk.
    """
    if not (0.0 < t <= od / 2.0):
        raise DomainError(f"wall thickness {t} outside (0, od/2] for od={od}")
    ro = od / 2.0
    ri = ro - t
    area = math.pi * (ro * ro - ri * ri)
    i_bend = math.pi * (od**4 - (2.0 * ri) ** 4) / 64.0
    return SectionProperties(area=area, i_bend=i_bend, j_torsion=2.0 * i_bend)


class Tube(NamedTuple):
    """A straight skeleton member between two labeled nodes.

    ``section`` selects the (od, t) pair; ``kind`` names the structural
    role. They coincide for every member of the diamond topology.
    """

    start: str
    end: str
    section: str
    kind: str


@dataclass
class FrameSkeleton:
    """Derived 3D wireframe: labeled junction nodes plus tube segments."""

    nodes: dict[str, np.ndarray]
    tubes: list[Tube]

    def tube_length(self, tube: Tube) -> float:
        return float(np.linalg.norm(self.nodes[tube.end] - self.nodes[tube.start]))

    def kinds(self) -> set[str]:
        return {t.kind for t in self.tubes}


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the geometric checks; feasible iff no violations."""

    feasible: bool
    violations: tuple[str, ...]  # unique codes, canonical order
    details: tuple[str, ...]  # one human-readable message per finding


def _report(findings: list[tuple[str, str]]) -> FeasibilityReport:
    codes = tuple(c for c in VIOLATION_CODES if any(f[0] == c for f in findings))
    return FeasibilityReport(
        feasible=not findings,
        violations=codes,
        details=tuple(msg for _, msg in findings),
    )


def check_feasibility(params: FrameParams) -> FeasibilityReport:
    """Run every geometric check and accumulate all violations found.

    The checks are deterministic and order-independent; infeasibility is a
    report, never an exception. Params passing this check are guaranteed to
    build their in-plane members; lateral members (dropout placement) can
    still fail at build time.
    """
    findings: list[tuple[str, str]] = []

    strictly_positive = (
        "stack",
        "reach",
        "head_tube_length",
        "seat_tube_length",
        "chain_stay_length",
        "bb_drop",
        "rear_axle_spacing",
        "chain_stay_bb_half_spacing",
        "seat_stay_half_spacing",
        "bb_shell_length",
    ) + DIAMETER_FIELDS + THICKNESS_FIELDS
    for name in strictly_positive:
        v = getattr(params, name)
        if not v > 0.0:
            findings.append((NON_POSITIVE_DIMENSION, f"{name} = {v} must be > 0"))

    # Attachment offsets may be exactly zero (junction at the tube end).
    for name in (
        "seat_tube_top_tube_offset",
        "head_tube_upper_offset",
        "head_tube_lower_offset",
        "seat_stay_junction_offset",
    ):
        v = getattr(params, name)
        if v < 0.0:
            findings.append((NON_POSITIVE_DIMENSION, f"{name} = {v} must be >= 0"))

    for name in ("head_tube_angle_deg", "seat_tube_angle_deg"):
        v = getattr(params, name)
        if not 0.0 < v < 180.0:
            findings.append((ANGLE_OUT_OF_RANGE, f"{name} = {v} must lie in (0, 180)"))

    # Stays must meet their parent members: the seat-stay junction sits on
    # the seat tube, the chain-stay roots on the bb shell.
    if not 0.0 <= params.seat_stay_junction_offset < params.seat_tube_length:
        findings.append(
            (
                STAY_INTERSECTION_FAILURE,
                f"seat_stay_junction_offset = {params.seat_stay_junction_offset} "
                f"outside [0, seat_tube_length={params.seat_tube_length})",
            )
        )
    if params.chain_stay_bb_half_spacing > params.bb_shell_length / 2.0:
        findings.append(
            (
                STAY_INTERSECTION_FAILURE,
                f"chain_stay_bb_half_spacing = {params.chain_stay_bb_half_spacing} "
                f"exceeds bb_shell_length/2 = {params.bb_shell_length / 2.0}",
            )
        )

    sections = ["top_tube", "down_tube", "seat_tube", "head_tube", "bb_shell", "chain_stay", "seat_stay"]
    if params.has_chain_stay_bridge:
        sections.append("chain_stay_bridge")
    if params.has_seat_stay_bridge:
        sections.append("seat_stay_bridge")
    for kind in sections:
        od, t = params.section(kind)
        if od > 0.0 and t > 0.0 and t >= od / 2.0:
            findings.append(
                (THICKNESS_EXCEEDS_RADIUS, f"{kind}: t = {t} leaves no positive inner radius at od = {od}")
            )

    # Bridge fractions must place the cross member strictly inside the stay.
    for flag, name in (
        (params.has_chain_stay_bridge, "chain_stay_bridge_fraction"),
        (params.has_seat_stay_bridge, "seat_stay_bridge_fraction"),
    ):
        if not flag:
            continue
        f = getattr(params, name)
        if f <= 0.0:
            findings.append((NON_POSITIVE_DIMENSION, f"{name} = {f} must be > 0"))
        elif f >= 1.0:
            findings.append((DEGENERATE_TUBE, f"{name} = {f} leaves no stay beyond the bridge"))

    # In-plane junction containment and nondegeneracy. Guarantees that
    # build_skeleton cannot fail on any z = 0 member once checks pass.
    if params.head_tube_length > 0.0:
        for name in ("head_tube_upper_offset", "head_tube_lower_offset"):
            if getattr(params, name) > params.head_tube_length:
                findings.append((DEGENERATE_TUBE, f"{name} beyond head_tube_length"))
    if params.seat_tube_length > 0.0 and params.seat_tube_top_tube_offset > params.seat_tube_length:
        findings.append((DEGENERATE_TUBE, "seat_tube_top_tube_offset beyond seat_tube_length"))

    if not findings:
        pts = _in_plane_points(params)
        if np.linalg.norm(pts["top_tube_head_junction"] - pts["top_tube_seat_junction"]) < MIN_TUBE_LENGTH:
            findings.append((DEGENERATE_TUBE, "top tube endpoints coincide"))
        if np.linalg.norm(pts["down_tube_head_junction"]) < MIN_TUBE_LENGTH:
            findings.append((DEGENERATE_TUBE, "down tube endpoints coincide"))

    return _report(findings)


def _in_plane_points(params: FrameParams) -> dict[str, np.ndarray]:
    """Solve the z = 0 junction positions from the design vector."""
    th = math.radians(params.head_tube_angle_deg)
    ts = math.radians(params.seat_tube_angle_deg)
    head_axis = np.array([math.cos(th), -math.sin(th), 0.0])  # top -> bottom
    seat_axis = np.array([-math.cos(ts), math.sin(ts), 0.0])  # bb -> top

    head_top = np.array([params.reach, params.stack, 0.0])
    pts = {
        "bb_center": np.zeros(3),
        "head_tube_top": head_top,
        "head_tube_bottom": head_top + params.head_tube_length * head_axis,
        "top_tube_head_junction": head_top + params.head_tube_upper_offset * head_axis,
        "down_tube_head_junction": head_top
        + (params.head_tube_length - params.head_tube_lower_offset) * head_axis,
        "seat_tube_top": params.seat_tube_length * seat_axis,
        "top_tube_seat_junction": (params.seat_tube_length - params.seat_tube_top_tube_offset) * seat_axis,
        "seat_stay_anchor": (params.seat_tube_length - params.seat_stay_junction_offset) * seat_axis,
    }
    return pts


def _split_stations(values: list[float]) -> list[float]:
    """Sort axis stations and merge near-coincident ones."""
    out: list[float] = []
    for v in sorted(values):
        if not out or v - out[-1] > _STATION_EPS:
            out.append(v)
    return out


def build_skeleton(params: FrameParams) -> FrameSkeleton:
    """Construct the diamond-frame wireframe from a design vector.

    Raises BuildFailure when a derived tube would be non-positive in length
    or a junction solve has no real solution (chiefly the dropout placement
    when |bb_drop| >= chain_stay_length). Callers that skipped
    check_feasibility may also trip containment failures here.
    """
    for name in ("head_tube_length", "seat_tube_length"):
        if not getattr(params, name) > 0.0:
            raise BuildFailure(f"{name} must be positive")
    for name, limit in (
        ("head_tube_upper_offset", params.head_tube_length),
        ("head_tube_lower_offset", params.head_tube_length),
        ("seat_tube_top_tube_offset", params.seat_tube_length),
        ("seat_stay_junction_offset", params.seat_tube_length),
    ):
        v = getattr(params, name)
        if v < 0.0 or v > limit:
            raise BuildFailure(f"{name} = {v} places a junction off its tube")

    nodes = _in_plane_points(params)
    tubes: list[Tube] = []
    # Junction labels that land on the same station collapse onto one
    # canonical node so the member graph stays connected there.
    alias: dict[str, str] = {}

    def resolve(label: str) -> str:
        while label in alias:
            label = alias[label]
        return label

    def add_tube(a: str, b: str, kind: str) -> None:
        tubes.append(Tube(resolve(a), resolve(b), kind, kind))

    # Dropouts: side-view distance chain_stay_length behind the bb, bb_drop
    # below the rear axle line, at half the axle spacing laterally.
    back = params.chain_stay_length**2 - params.bb_drop**2
    if back <= 0.0:
        raise BuildFailure("chain_stay_length does not reach the rear axle height")
    xd = -math.sqrt(back)
    half_axle = params.rear_axle_spacing / 2.0
    nodes["dropout_left"] = np.array([xd, params.bb_drop, -half_axle])
    nodes["dropout_right"] = np.array([xd, params.bb_drop, half_axle])

    h = params.chain_stay_bb_half_spacing
    nodes["chain_stay_root_left"] = np.array([0.0, 0.0, -h])
    nodes["chain_stay_root_right"] = np.array([0.0, 0.0, h])

    s = params.seat_stay_half_spacing
    anchor = nodes["seat_stay_anchor"]
    nodes["seat_stay_junction_left"] = anchor + np.array([0.0, 0.0, -s])
    nodes["seat_stay_junction_right"] = anchor + np.array([0.0, 0.0, s])

    def axis_segments(kind, origin, axis, labeled_stations):
        """Emit tube segments between consecutive stations along an axis."""
        merged = _split_stations([st for _, st in labeled_stations])
        slots: list[list[str]] = [[] for _ in merged]
        for label, st in labeled_stations:
            i = min(range(len(merged)), key=lambda k: abs(merged[k] - st))
            slots[i].append(label)
        names = []
        for st, labels in zip(merged, slots):
            canonical = labels[0]
            nodes.setdefault(canonical, origin + st * axis)
            for other in labels[1:]:
                alias[other] = canonical
                nodes.pop(other, None)
            names.append(canonical)
        for a, b in zip(names, names[1:]):
            add_tube(a, b, kind)

    th = math.radians(params.head_tube_angle_deg)
    ts = math.radians(params.seat_tube_angle_deg)
    head_axis = np.array([math.cos(th), -math.sin(th), 0.0])
    seat_axis = np.array([-math.cos(ts), math.sin(ts), 0.0])

    axis_segments(
        "head_tube",
        nodes["head_tube_top"],
        head_axis,
        [
            ("head_tube_top", 0.0),
            ("top_tube_head_junction", params.head_tube_upper_offset),
            ("down_tube_head_junction", params.head_tube_length - params.head_tube_lower_offset),
            ("head_tube_bottom", params.head_tube_length),
        ],
    )
    axis_segments(
        "seat_tube",
        nodes["bb_center"],
        seat_axis,
        [
            ("bb_center", 0.0),
            ("seat_stay_anchor", params.seat_tube_length - params.seat_stay_junction_offset),
            ("top_tube_seat_junction", params.seat_tube_length - params.seat_tube_top_tube_offset),
            ("seat_tube_top", params.seat_tube_length),
        ],
    )

    # BB shell runs laterally through the origin; chain-stay roots sit on it.
    half_shell = params.bb_shell_length / 2.0
    axis_segments(
        "bb_shell",
        nodes["bb_center"],
        np.array([0.0, 0.0, 1.0]),
        [
            ("bb_center", 0.0),
            ("chain_stay_root_left", -h),
            ("chain_stay_root_right", h),
            ("bb_shell_left_end", -half_shell),
            ("bb_shell_right_end", half_shell),
        ],
    )

    add_tube("top_tube_seat_junction", "top_tube_head_junction", "top_tube")
    add_tube("bb_center", "down_tube_head_junction", "down_tube")

    # Short lateral stubs carry the seat stays from the on-axis anchor out
    # to the laterally offset junction points.
    add_tube("seat_stay_anchor", "seat_stay_junction_left", "seat_stay")
    add_tube("seat_stay_anchor", "seat_stay_junction_right", "seat_stay")

    def stay_pair(kind, start_l, start_r, flag, fraction, bridge_kind):
        """Emit a left/right stay pair, split at the bridge attachment."""
        if flag:
            if not 0.0 < fraction < 1.0:
                raise BuildFailure(f"{bridge_kind} fraction {fraction} outside (0, 1)")
            for side, start in (("left", start_l), ("right", start_r)):
                root = nodes[resolve(start)]
                p = root + fraction * (nodes[f"dropout_{side}"] - root)
                nodes[f"{bridge_kind}_{side}"] = p
                add_tube(start, f"{bridge_kind}_{side}", kind)
                add_tube(f"{bridge_kind}_{side}", f"dropout_{side}", kind)
            add_tube(f"{bridge_kind}_left", f"{bridge_kind}_right", bridge_kind)
        else:
            add_tube(start_l, "dropout_left", kind)
            add_tube(start_r, "dropout_right", kind)

    stay_pair(
        "chain_stay",
        "chain_stay_root_left",
        "chain_stay_root_right",
        params.has_chain_stay_bridge,
        params.chain_stay_bridge_fraction,
        "chain_stay_bridge",
    )
    stay_pair(
        "seat_stay",
        "seat_stay_junction_left",
        "seat_stay_junction_right",
        params.has_seat_stay_bridge,
        params.seat_stay_bridge_fraction,
        "seat_stay_bridge",
    )

    skeleton = FrameSkeleton(nodes=nodes, tubes=tubes)
    for tube in tubes:
        if skeleton.tube_length(tube) < MIN_TUBE_LENGTH:
            raise BuildFailure(f"degenerate {tube.kind} between {tube.start} and {tube.end}")
    return skeleton


def check_buildable(params: FrameParams) -> FeasibilityReport:
    """Feasibility checks plus a trial build.

    Params that pass the explicit checks but still fail to construct are
    reported with the BuildFailure code instead of raising.
    """
    report = check_feasibility(params)
    if not report.feasible:
        return report
    try:
        build_skeleton(params)
    except BuildFailure as exc:
        return FeasibilityReport(feasible=False, violations=(BUILD_FAILURE,), details=(str(exc),))
    return report
