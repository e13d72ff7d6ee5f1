"""Parametric bicycle-frame structural analysis toolkit.

Builds 3D diamond-frame models from a 37-value design vector, evaluates
them under three load cases with beam-element FEA, and post-processes the
resulting performance records (validity, Pareto front, correlations).
"""

from . import errors
from .analysis import (
    AnalysisReport,
    Objective,
    ObjectiveSpec,
    build_report,
    default_objective_spec,
    pareto_front,
    pearson_matrix,
    subset_rows,
    summary_stats,
    validity_breakdown,
    write_report,
)
from .convergence import DEFAULT_SUBDIVISIONS, convergence_study
from .dataset import (
    DESIGN_COLUMNS,
    RESULT_COLUMNS,
    DesignTable,
    ResultTable,
    read_designs,
    read_results,
    write_designs,
    write_results,
)
from .fea import (
    SAFETY_FACTOR_CAP,
    BeamModel,
    SolutionField,
    StressSummary,
    assemble_and_solve,
    compute_mass,
    compute_stress_summary,
    discretize,
    global_stiffness,
)
from .geometry import (
    PARAM_COLUMNS,
    FeasibilityReport,
    FrameParams,
    FrameSkeleton,
    SectionProperties,
    Tube,
    build_skeleton,
    check_buildable,
    check_feasibility,
    reference_params,
    tube_section_properties,
)
from .loadcases import (
    PERFORMANCE_FIELDS,
    STATUS_OK,
    VALIDITY_CLASSES,
    LoadCase,
    PerformanceRecord,
    SimulationConfig,
    apply_load_case,
    classify_validity,
    evaluate_frame,
    load_config,
)
from .materials import MATERIALS, MaterialProperties, lookup, substitute_category
from .plots import emit_plots
from .sampling import (
    SobolState,
    generate_designs,
    resample_thicknesses,
    run_batch,
    scale_thickness,
    sobol_next,
    sobol_points,
)

__version__ = "0.1.0"
