"""branchspace: branched configuration spaces at desk scale.

Finite point configurations with the Hausdorff metric, charts around
locally finite configurations, branched paths with junction jet checks,
logistic-map equilibrium sections with branch loci, and support classes of
grid functions with the constant-volume condition.
"""

from .config import (
    AmbientSpace,
    CompatibilityRelation,
    Configuration,
    DEFAULT_TOL_EQ,
    OrderedConfiguration,
    canonicalize,
    configuration_from_dict,
    configuration_to_dict,
    default_relation,
    empirical_average,
    euclidean,
    euclidean_space,
    symmetrize,
    validate,
)
from .charts import (
    Chart,
    LocallyFiniteConfiguration,
    build_chart,
    chart_apply,
    chart_invert,
    separation,
    separations,
    transition,
    transition_jacobian,
)
from .errors import (
    BranchSpaceError,
    CompatibilityViolation,
    DuplicatePoints,
    EmptyConfiguration,
    EndpointMismatch,
    GridMismatch,
    IndexMismatch,
    InsufficientResolution,
    LengthMismatch,
    NonConstantCardinality,
    NonMonotoneTime,
    NotAJunction,
    NotInDomain,
    NotInOverlap,
    OutOfUnitBall,
    ParameterOutOfRange,
    SingletonConfiguration,
    StratumTooLarge,
    SupportTouchesBoundary,
)
from .hausdorff import (
    DEFAULT_MERGE_TOL,
    GridIndex,
    SpatialIndex,
    StratumEvent,
    detect_stratum_events,
    dist_to_set,
    hausdorff_distance,
    hausdorff_distance_indexed,
    two_particle_merge_trajectory,
)
from .logistic import (
    Chaotic,
    PeriodicOrbit,
    bifurcation_points,
    logistic,
    logistic_attractor,
)
from .paths import (
    BranchedPath,
    BranchedPathReport,
    JetMatchResult,
    PathSegment,
    compose,
    jet_match,
    make_split_loop,
    validate_branched,
)
from .sections import (
    BranchLocus,
    BranchedSectionSample,
    Decomposition,
    branched_equilibrium_section,
    decompose_or_witness,
)
from .measure import (
    GridFunction,
    SupportClass,
    r_equivalent,
    support_class,
    validate_constant_volume_path,
)

__version__ = "0.1.0"

__all__ = [
    "AmbientSpace",
    "BranchLocus",
    "BranchSpaceError",
    "BranchedPath",
    "BranchedPathReport",
    "BranchedSectionSample",
    "Chaotic",
    "Chart",
    "CompatibilityRelation",
    "CompatibilityViolation",
    "Configuration",
    "DEFAULT_MERGE_TOL",
    "DEFAULT_TOL_EQ",
    "Decomposition",
    "DuplicatePoints",
    "EmptyConfiguration",
    "EndpointMismatch",
    "GridFunction",
    "GridIndex",
    "GridMismatch",
    "IndexMismatch",
    "InsufficientResolution",
    "JetMatchResult",
    "LengthMismatch",
    "LocallyFiniteConfiguration",
    "NonConstantCardinality",
    "NonMonotoneTime",
    "NotAJunction",
    "NotInDomain",
    "NotInOverlap",
    "OrderedConfiguration",
    "OutOfUnitBall",
    "ParameterOutOfRange",
    "PathSegment",
    "PeriodicOrbit",
    "SingletonConfiguration",
    "SpatialIndex",
    "StratumEvent",
    "StratumTooLarge",
    "SupportClass",
    "SupportTouchesBoundary",
    "bifurcation_points",
    "branched_equilibrium_section",
    "build_chart",
    "canonicalize",
    "chart_apply",
    "chart_invert",
    "compose",
    "configuration_from_dict",
    "configuration_to_dict",
    "decompose_or_witness",
    "default_relation",
    "detect_stratum_events",
    "dist_to_set",
    "empirical_average",
    "euclidean",
    "euclidean_space",
    "hausdorff_distance",
    "hausdorff_distance_indexed",
    "jet_match",
    "logistic",
    "logistic_attractor",
    "make_split_loop",
    "r_equivalent",
    "separation",
    "separations",
    "support_class",
    "symmetrize",
    "transition",
    "transition_jacobian",
    "two_particle_merge_trajectory",
    "validate",
    "validate_branched",
    "validate_constant_volume_path",
]
