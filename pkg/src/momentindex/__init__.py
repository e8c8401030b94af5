"""Comparison indices of planar measures computed from their moment matrices."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ContractError,
    FiniteSupportError,
    MomentIndexError,
    MomentRangeError,
    NotPositiveDefiniteError,
)
from .measures import (  # noqa: E402
    Atomic,
    CircleDensity,
    CircleUniform,
    CurveQuadrature,
    Measure,
    MomentMatrix,
    Pushforward,
    moment,
    moment_section,
)
from .matrices import extreme_generalized_eigs, rayleigh_quotient  # noqa: E402
from .indices import (  # noqa: E402
    IndexEstimate,
    Status,
    Thresholds,
    estimate_index,
    index_sequences,
    reciprocity_check,
)
from .support import containment_verdict, pc_hull, support_mask, support_radius  # noqa: E402
from .hull import christoffel_sequence, hessenberg_section, hull_estimate  # noqa: E402
from .transforms import SimilarityMap, completeness_necessary_sweep, pushforward  # noqa: E402

__all__ = [
    "__version__",
    "ConfigError",
    "ContractError",
    "FiniteSupportError",
    "MomentIndexError",
    "MomentRangeError",
    "NotPositiveDefiniteError",
    "Atomic",
    "CircleDensity",
    "CircleUniform",
    "CurveQuadrature",
    "Measure",
    "MomentMatrix",
    "Pushforward",
    "moment",
    "moment_section",
    "extreme_generalized_eigs",
    "rayleigh_quotient",
    "IndexEstimate",
    "Status",
    "Thresholds",
    "estimate_index",
    "index_sequences",
    "reciprocity_check",
    "containment_verdict",
    "pc_hull",
    "support_mask",
    "support_radius",
    "christoffel_sequence",
    "hessenberg_section",
    "hull_estimate",
    "SimilarityMap",
    "completeness_necessary_sweep",
    "pushforward",
]
