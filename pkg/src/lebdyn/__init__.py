"""Lebesgue numbers of open covers under iteration of maps on finite
metric-space models: decay-rate, entropy and dimension estimators plus
machine checks of the identities and inequalities relating them."""

from .errors import BudgetError, NumericError, UsageError
from ._backend import backend_name, set_backend
from .metric_core import (
    CoveringNumber,
    DimEstimate,
    ExtValue,
    FiniteMetricSpace,
    PointSet,
    Violation,
    ball,
    box_dim_estimate,
    circle_grid,
    covering_number,
    dist_to_complement,
    scale_metric,
    space_from_matrix,
    space_from_points,
    validate_space,
)
from .cover_calc import (
    Cover,
    DeltaReport,
    LebesgueReport,
    SubcoverReport,
    cover_diam,
    delta_minimal_subcovers,
    is_finer,
    join,
    lebesgue_at_point,
    lebesgue_number,
    mesh_cover,
    min_subcover,
    validate_cover,
)
from .dynamics import (
    DynMap,
    IterateRate,
    LbdBounds,
    RateSequence,
    SeparatedReport,
    bowen_dist,
    delta_sequence,
    eventual_image,
    iterate_rate,
    iterated_cover,
    iterated_covers,
    lbd_lower_bound,
    lipschitz_constant,
    map_power,
    max_separated,
    preimage_gap,
    pullback_cover,
)
from .rates import (
    CoverEntropy,
    EstimateSet,
    HLReport,
    InequalityReport,
    InequalityRow,
    RateEstimate,
    SepEntropy,
    VerifyConfig,
    cover_entropy,
    hl_delta_estimate,
    hl_estimates,
    prefix_max_rate_check,
    rate_bounds,
    sep_entropy,
    verify_inequalities,
)
from .systems import (
    FamilyInfo,
    KnownValue,
    SystemBundle,
    SystemSpec,
    estimate_bundle,
    generate_system,
    list_families,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetError", "NumericError", "UsageError",
    "backend_name", "set_backend",
    "CoveringNumber", "DimEstimate", "ExtValue", "FiniteMetricSpace",
    "PointSet", "Violation", "ball", "box_dim_estimate", "circle_grid",
    "covering_number", "dist_to_complement", "scale_metric",
    "space_from_matrix", "space_from_points", "validate_space",
    "Cover", "DeltaReport", "LebesgueReport", "SubcoverReport", "cover_diam",
    "delta_minimal_subcovers", "is_finer", "join", "lebesgue_at_point",
    "lebesgue_number", "mesh_cover", "min_subcover", "validate_cover",
    "DynMap", "IterateRate", "LbdBounds", "RateSequence", "SeparatedReport",
    "bowen_dist", "delta_sequence", "eventual_image", "iterate_rate",
    "iterated_cover", "iterated_covers", "lbd_lower_bound",
    "lipschitz_constant", "map_power", "max_separated", "preimage_gap",
    "pullback_cover",
    "CoverEntropy", "EstimateSet", "HLReport", "InequalityReport",
    "InequalityRow", "RateEstimate", "SepEntropy", "VerifyConfig",
    "cover_entropy", "hl_delta_estimate", "hl_estimates",
    "prefix_max_rate_check", "rate_bounds", "sep_entropy",
    "verify_inequalities",
    "FamilyInfo", "KnownValue", "SystemBundle", "SystemSpec",
    "estimate_bundle", "generate_system", "list_families",
    "__version__",
]
