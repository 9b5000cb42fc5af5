"""Spatial accessibility-reachability analytics.

Core pipeline: a lattice demand grid and facility sites are fixed at
fit time (catchment, decay, extended population); per-instant supply
vectors derived from occupancy snapshots then map to a standardized
accessibility-reachability matrix, worst-case shock reports, and
multiple-testing-corrected weekday/weekend differentials.
"""

from .baselines import (
    GaussianDecay,
    GravityAccessibility,
    PowerDecay,
    RaamParams,
    TwoStepFCA,
    UniformDecay,
    fca_step1,
    fca_step2,
    gravity_accessibility,
    raam_assign,
    raam_cost,
    uniform_od_demand,
)
from .engine import (
    AccessibilityReachability,
    ARMatrix,
    ExtendedPopulation,
    accessibility,
    ar_matrix,
    extended_population,
    minmax_standardize,
    reachability,
)
from .errors import ArgridError, ConfigError, DataError, SourceError
from .geometry import (
    CatchmentMatrix,
    DecayMatrix,
    FacilitySite,
    Grid,
    GridCell,
    build_grid,
    catchment_matrix,
    decay_matrix,
    distance,
    load_grid_csv,
    load_sites_csv,
    pairwise_distances,
)
from .impact import (
    OLSFit,
    ShockReport,
    ShockScenario,
    impact_scores,
    min_accessibility_under_shock,
    ols_fit,
    shocked_ar,
    shocked_ar_multi,
    worst_case_shock_report,
)
from .pipeline import RunConfig, Workspace
from .stats import (
    ADJUST_METHODS,
    DifferentialReport,
    SamplePair,
    TestResult,
    adjust,
    differential_report,
    t_test,
)
from .store import (
    FacilitySeries,
    OccupancySnapshot,
    SnapshotStore,
    current_supply,
    estimate_capacity,
    parse_snapshot,
    serialize_snapshot,
)

__version__ = "0.1.0"

__all__ = [
    "ADJUST_METHODS",
    "ARMatrix",
    "AccessibilityReachability",
    "ArgridError",
    "CatchmentMatrix",
    "ConfigError",
    "DataError",
    "DecayMatrix",
    "DifferentialReport",
    "ExtendedPopulation",
    "FacilitySeries",
    "FacilitySite",
    "GaussianDecay",
    "GravityAccessibility",
    "Grid",
    "GridCell",
    "OLSFit",
    "OccupancySnapshot",
    "PowerDecay",
    "RaamParams",
    "RunConfig",
    "SamplePair",
    "ShockReport",
    "ShockScenario",
    "SnapshotStore",
    "SourceError",
    "TestResult",
    "TwoStepFCA",
    "UniformDecay",
    "Workspace",
    "accessibility",
    "adjust",
    "ar_matrix",
    "build_grid",
    "catchment_matrix",
    "current_supply",
    "decay_matrix",
    "differential_report",
    "distance",
    "estimate_capacity",
    "extended_population",
    "fca_step1",
    "fca_step2",
    "gravity_accessibility",
    "impact_scores",
    "load_grid_csv",
    "load_sites_csv",
    "min_accessibility_under_shock",
    "minmax_standardize",
    "ols_fit",
    "pairwise_distances",
    "parse_snapshot",
    "raam_assign",
    "raam_cost",
    "reachability",
    "serialize_snapshot",
    "shocked_ar",
    "shocked_ar_multi",
    "t_test",
    "uniform_od_demand",
    "worst_case_shock_report",
]
