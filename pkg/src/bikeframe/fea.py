"""Linear-elastic space-frame solver on 12-DOF Euler-Bernoulli beam elements.

Each element couples two nodes with six degrees of freedom apiece (three
translations, three rotations). Shear deformation is neglected: frame tubes
are slender enough that the correction would stay under a couple percent,
and the closed-form element keeps nodal results exact for end-loaded
prismatic members.

Local element axes: local x runs along the element; local z is the
normalized projection of global z unless the element is near-parallel to
global z (|cos| > 0.99), in which case global y is projected instead;
local y completes the right-handed triad.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import materials
from .errors import DegenerateTube, SingularSystem
from .geometry import MIN_TUBE_LENGTH, FrameParams, FrameSkeleton, tube_section_properties

# Pivot threshold (relative to the Jacobi-scaled matrix, whose diagonal is
# unit) below which a factorization counts as singular.
PIVOT_RTOL = 1e-12
# Reported safety factors are capped here; a stress-free frame serializes
# this value instead of infinity.
SAFETY_FACTOR_CAP = 1e6

# |cos| between the element axis and global z above which the orientation
# reference switches from global z to global y.
_AXIS_SWITCH = 0.99

# Extended-precision residual correction passes after the direct solve.
_REFINEMENT_STEPS = 2


@dataclass
class BeamModel:
    """Discretized frame: geometry, sections, one material, BCs, and loads.

    ``constraints`` masks fixed DOFs per node ([ux, uy, uz, rx, ry, rz]);
    ``loads`` holds nodal forces and moments in the same layout. ``tags``
    maps role names ("bb", "dropout_left", "dropout_right", "head_tube")
    to node-index arrays.
    """

    nodes: np.ndarray  # (n, 3) coordinates
    elements: np.ndarray  # (m, 2) node indices
    kinds: tuple[str, ...]  # section/tube kind per element
    area: np.ndarray  # (m,)
    i_bend: np.ndarray  # (m,)
    j_torsion: np.ndarray  # (m,)
    outer_radius: np.ndarray  # (m,)
    elastic_modulus: float
    shear_modulus: float
    density: float
    constraints: np.ndarray  # (n, 6) bool
    loads: np.ndarray  # (n, 6) float
    tags: dict[str, np.ndarray] = field(default_factory=dict)
    _assembly_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    def with_case(self, constraints: np.ndarray, loads: np.ndarray) -> "BeamModel":
        """Copy of the model with new boundary conditions and loads.

        Shares geometry arrays and the stiffness assembly cache, so the
        three load cases of one frame assemble only once.
        """
        return dataclasses.replace(self, constraints=constraints, loads=loads)


@dataclass
class SolutionField:
    """Static solution: nodal motion plus local element end forces.

    ``end_forces`` rows hold the 12 local end-force components per element
    ([N, Vy, Vz, T, My, Mz] at each end); ``reactions`` is nonzero only on
    constrained DOFs.
    """

    displacements: np.ndarray  # (n, 3) m
    rotations: np.ndarray  # (n, 3) rad
    end_forces: np.ndarray  # (m, 12) local axes
    reactions: np.ndarray  # (n, 6)


@dataclass(frozen=True)
class StressSummary:
    """Worst von Mises stress over all element ends and the safety factor."""

    max_von_mises: float
    element: int
    end: int
    safety_factor: float


def discretize(
    skeleton: FrameSkeleton,
    params: FrameParams,
    elements_per_tube: int,
    material: materials.MaterialProperties | None = None,
) -> BeamModel:
    """Split every skeleton tube into equal-length beam elements.

    Junction nodes are shared between tubes; interior nodes belong to one
    tube each. Every element carries its tube's annulus section and the
    frame material (``material`` overrides the params lookup, which is how
    the simulation config's modulus scaling reaches the solver).
    """
    if elements_per_tube < 1:
        raise ValueError("elements_per_tube must be >= 1")
    if material is None:
        material = materials.lookup(params.material)

    label_index: dict[str, int] = {}
    coords: list[np.ndarray] = []

    def node_id(label: str) -> int:
        if label not in label_index:
            label_index[label] = len(coords)
            coords.append(np.asarray(skeleton.nodes[label], dtype=float))
        return label_index[label]

    conn: list[tuple[int, int]] = []
    kinds: list[str] = []
    area: list[float] = []
    i_bend: list[float] = []
    j_torsion: list[float] = []
    outer_radius: list[float] = []
    head_nodes: set[int] = set()

    for tube in skeleton.tubes:
        a = node_id(tube.start)
        b = node_id(tube.end)
        pa, pb = coords[a], coords[b]
        length = float(np.linalg.norm(pb - pa))
        if length < MIN_TUBE_LENGTH:
            raise DegenerateTube(f"{tube.kind} between {tube.start} and {tube.end} is {length} m")
        od, t = params.section(tube.section)
        sec = tube_section_properties(od, t)

        chain = [a]
        for k in range(1, elements_per_tube):
            chain.append(len(coords))
            coords.append(pa + (k / elements_per_tube) * (pb - pa))
        chain.append(b)
        for i, j in zip(chain, chain[1:]):
            conn.append((i, j))
            kinds.append(tube.kind)
            area.append(sec.area)
            i_bend.append(sec.i_bend)
            j_torsion.append(sec.j_torsion)
            outer_radius.append(od / 2.0)
        if tube.kind == "head_tube":
            head_nodes.update(chain)

    n = len(coords)
    tags = {"head_tube": np.array(sorted(head_nodes), dtype=int)}
    for role, label in (
        ("bb", "bb_center"),
        ("dropout_left", "dropout_left"),
        ("dropout_right", "dropout_right"),
    ):
        if label in label_index:
            tags[role] = np.array([label_index[label]], dtype=int)

    return BeamModel(
        nodes=np.vstack(coords),
        elements=np.array(conn, dtype=int),
        kinds=tuple(kinds),
        area=np.array(area),
        i_bend=np.array(i_bend),
        j_torsion=np.array(j_torsion),
        outer_radius=np.array(outer_radius),
        elastic_modulus=material.elastic_modulus,
        shear_modulus=material.shear_modulus,
        density=material.density,
        constraints=np.zeros((n, 6), dtype=bool),
        loads=np.zeros((n, 6)),
        tags=tags,
    )


def local_stiffness_batch(E, G, area, i_bend, j_torsion, length) -> np.ndarray:
    """Local 12x12 stiffness matrices for a batch of prismatic elements.

    DOF order per element: [ux1 uy1 uz1 rx1 ry1 rz1 ux2 uy2 uz2 rx2 ry2 rz2]
    in local axes, x axial.
    """
    area = np.atleast_1d(np.asarray(area, dtype=float))
    i_bend = np.atleast_1d(np.asarray(i_bend, dtype=float))
    j_torsion = np.atleast_1d(np.asarray(j_torsion, dtype=float))
    length = np.atleast_1d(np.asarray(length, dtype=float))

    m = length.shape[0]
    k = np.zeros((m, 12, 12))
    ax = E * area / length
    tr = G * j_torsion / length
    b1 = 12.0 * E * i_bend / length**3
    b2 = 6.0 * E * i_bend / length**2
    b3 = 4.0 * E * i_bend / length
    b4 = 2.0 * E * i_bend / length

    def put(i, j, v):
        k[:, i, j] = v
        if i != j:
            k[:, j, i] = v

    put(0, 0, ax), put(6, 6, ax), put(0, 6, -ax)
    put(3, 3, tr), put(9, 9, tr), put(3, 9, -tr)
    # bending in the local x-y plane (about local z)
    put(1, 1, b1), put(1, 5, b2), put(1, 7, -b1), put(1, 11, b2)
    put(5, 5, b3), put(5, 7, -b2), put(5, 11, b4)
    put(7, 7, b1), put(7, 11, -b2), put(11, 11, b3)
    # bending in the local x-z plane (about local y); rotation sign flips
    put(2, 2, b1), put(2, 4, -b2), put(2, 8, -b1), put(2, 10, -b2)
    put(4, 4, b3), put(4, 8, b2), put(4, 10, b4)
    put(8, 8, b1), put(8, 10, b2), put(10, 10, b3)
    return k


def _element_frames(model: BeamModel) -> tuple[np.ndarray, np.ndarray]:
    """Per-element length and 3x3 rotation (rows are local axes in global)."""
    p1 = model.nodes[model.elements[:, 0]]
    p2 = model.nodes[model.elements[:, 1]]
    d = p2 - p1
    length = np.linalg.norm(d, axis=1)
    if np.any(length < MIN_TUBE_LENGTH):
        raise DegenerateTube("zero-length element in model")
    ex = d / length[:, None]

    ref = np.tile(np.array([0.0, 0.0, 1.0]), (len(length), 1))
    near_z = np.abs(ex[:, 2]) > _AXIS_SWITCH
    ref[near_z] = np.array([0.0, 1.0, 0.0])
    ez = ref - (np.einsum("ij,ij->i", ref, ex))[:, None] * ex
    ez /= np.linalg.norm(ez, axis=1)[:, None]
    ey = np.cross(ez, ex)

    rot = np.stack([ex, ey, ez], axis=1)
    return length, rot


def _assembled(model: BeamModel) -> dict:
    """Assemble (and cache) global stiffness plus element-level operators."""
    cache = model._assembly_cache
    if "K" in cache:
        return cache

    length, rot = _element_frames(model)
    k_local = local_stiffness_batch(
        model.elastic_modulus, model.shear_modulus, model.area, model.i_bend, model.j_torsion, length
    )
    m = model.n_elements
    T = np.zeros((m, 12, 12))
    for b in range(4):
        T[:, 3 * b : 3 * b + 3, 3 * b : 3 * b + 3] = rot
    # non-finite sections (overflowed inputs) flow through and are caught
    # by the solver's finiteness check instead of warning here
    with np.errstate(invalid="ignore", over="ignore"):
        k_global = T.transpose(0, 2, 1) @ k_local @ T

    dofs = np.hstack(
        [6 * model.elements[:, :1] + np.arange(6), 6 * model.elements[:, 1:] + np.arange(6)]
    )
    rows = np.repeat(dofs[:, :, None], 12, axis=2)
    cols = np.repeat(dofs[:, None, :], 12, axis=1)
    ndof = 6 * model.n_nodes
    K = sp.coo_matrix(
        (k_global.ravel(), (rows.ravel(), cols.ravel())), shape=(ndof, ndof)
    ).tocsc()

    cache.update({"K": K, "k_local": k_local, "T": T, "dofs": dofs})
    return cache


def global_stiffness(model: BeamModel) -> sp.csc_matrix:
    """Assembled global stiffness matrix before constraint elimination."""
    return _assembled(model)["K"]


def assemble_and_solve(model: BeamModel) -> SolutionField:
    """Solve K u = f with constrained DOFs eliminated by reduction.

    Raises SingularSystem when the reduced operator is non-finite, exactly
    singular, or has a pivot below PIVOT_RTOL relative to the stiffness
    scale (an under-constrained or degenerate model).
    """
    asm = _assembled(model)
    K = asm["K"]
    fixed = model.constraints.ravel()
    f = model.loads.ravel().astype(float)
    u = np.zeros_like(f)

    free = np.flatnonzero(~fixed)
    if free.size:
        K_ff = K[free][:, free].tocsc()
        if not np.all(np.isfinite(K_ff.data)):
            raise SingularSystem("non-finite stiffness entries")
        diag = K_ff.diagonal()
        if np.any(diag <= 0.0):
            raise SingularSystem("non-positive stiffness diagonal on a free DOF")
        # Symmetric Jacobi scaling equalizes the wildly different DOF
        # stiffness scales (short stiff stubs vs long slender tubes) so the
        # pivot threshold measures rank deficiency, not unit spread. The
        # scale factors are exact powers of two and the pivoting is forced
        # onto the diagonal (the scaled matrix is SPD), which keeps the
        # solve exactly homogeneous: scaling E, G, or the loads by a power
        # of two scales the solution bitwise-exactly.
        _, exponent = np.frexp(diag)
        s = np.ldexp(1.0, -(exponent >> 1))
        S = sp.diags(s)
        K_s = (S @ K_ff @ S).tocsc()
        try:
            lu = splu(K_s, diag_pivot_thresh=0.0, options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise SingularSystem(str(exc)) from None
        pivots = np.abs(lu.U.diagonal())
        if not np.all(np.isfinite(pivots)) or pivots.min() <= PIVOT_RTOL:
            raise SingularSystem("pivot below threshold; model is under-constrained or degenerate")
        f_s = s * f[free]
        y = lu.solve(f_s)
        # Iterative refinement with an extended-precision residual drives
        # the forward error to machine level even for the ill-conditioned
        # systems produced by very short, stocky tube segments.
        K_hi = K_s.astype(np.longdouble)
        f_hi = f_s.astype(np.longdouble)
        for _ in range(_REFINEMENT_STEPS):
            residual = np.asarray(f_hi - K_hi @ y.astype(np.longdouble), dtype=float)
            y = y + lu.solve(residual)
        # One more pass against the unscaled system minimizes the raw
        # equilibrium residual K u - f, which the scaled passes only
        # control row-relatively.
        u_f = s * y
        raw = np.asarray(
            f[free].astype(np.longdouble) - K_ff.astype(np.longdouble) @ u_f.astype(np.longdouble),
            dtype=float,
        )
        u[free] = u_f + s * lu.solve(s * raw)

    residual = K @ u - f
    reactions = np.where(fixed, residual, 0.0).reshape(model.n_nodes, 6)

    ue = u[asm["dofs"]]
    u_local = asm["T"] @ ue[:, :, None]
    end_forces = (asm["k_local"] @ u_local)[:, :, 0]

    motion = u.reshape(model.n_nodes, 6)
    return SolutionField(
        displacements=motion[:, :3].copy(),
        rotations=motion[:, 3:].copy(),
        end_forces=end_forces,
        reactions=reactions,
    )


def compute_stress_summary(
    model: BeamModel, solution: SolutionField, yield_strength: float
) -> StressSummary:
    """Von Mises screening over all element ends.

    Normal stress combines axial force and the resultant bending moment at
    the outer fiber; shear keeps the torsional term only (transverse shear
    is negligible for thin slender tubes). The safety factor is
    yield / max stress, capped at SAFETY_FACTOR_CAP.
    """
    f = solution.end_forces
    ro = model.outer_radius[:, None]
    axial = np.abs(f[:, [0, 6]])
    torsion = np.abs(f[:, [3, 9]])
    bending = np.sqrt(f[:, [4, 10]] ** 2 + f[:, [5, 11]] ** 2)

    sigma = axial / model.area[:, None] + bending * ro / model.i_bend[:, None]
    tau = torsion * ro / model.j_torsion[:, None]
    von_mises = np.sqrt(sigma**2 + 3.0 * tau**2)

    flat = int(np.argmax(von_mises))
    element, end = divmod(flat, 2)
    worst = float(von_mises[element, end])
    if worst <= 0.0:
        fos = SAFETY_FACTOR_CAP
    else:
        fos = min(yield_strength / worst, SAFETY_FACTOR_CAP)
    return StressSummary(max_von_mises=worst, element=element, end=end, safety_factor=fos)


def compute_mass(skeleton: FrameSkeleton, params: FrameParams, density: float) -> float:
    """Frame mass: sum of rho * A * L over skeleton tubes (true 3D lengths).

    Uses the skeleton, not the mesh, so the value is independent of the
    discretization. Junction overlap is not deducted.
    """
    total = 0.0
    for tube in skeleton.tubes:
        od, t = params.section(tube.section)
        sec = tube_section_properties(od, t)
        total += density * sec.area * skeleton.tube_length(tube)
    return total
