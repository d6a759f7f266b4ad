"""Margulis regions for parabolic screw translations on upper half-space,
isometric spheres, and a certificate-producing non-discreteness criterion.

The package is organized bottom-up:

  geometry    points of the upper half-space model and hyperbolic distance
  moebius     Moebius maps on the boundary as words in four primitive types
  parabolic   screw translations, normal form, and the boundary function of
              the epsilon-Margulis region
  criterion   the isometric-sphere test, certificates, and comparisons
  dim4        the cylindrical 4-dimensional family, continued fractions,
              growth exponents, and the screw-inversion gallery pair
  cli         the command-line front end
"""

from .criterion import (
    Certificate,
    ComparisonReport,
    InexactBoundary,
    SlackRow,
    asymptotic_slack,
    certify,
    verify_witness,
    waterman_report,
)
from .dim4 import (
    ContinuedFraction,
    CylScrew,
    LiouvilleTable,
    PrecisionHorizon,
    SlopeEstimate,
    as_alpha,
    continued_fraction,
    cyl_boundary,
    is_convergent_denominator,
    liouville_alpha,
    liouville_demo,
    local_slope_table,
    screw_inversion_pair,
    slope_estimate,
)
from .geometry import (
    INFINITY,
    BoundaryPoint,
    DimensionMismatch,
    HPoint,
    hyperbolic_distance,
    vertical_point,
)
from .moebius import (
    Dilation,
    FixesInfinity,
    IsometricSphere,
    MoebiusWord,
    Orthogonal,
    PoleError,
    ScanHit,
    Translation,
    UnitInversion,
    WordBudgetExceeded,
    chordal_distance,
    conformal_factor,
    inversion_in_sphere,
    isometric_sphere,
    near_identity_scan,
    vertical_image,
)
from .parabolic import (
    DEFAULT_BUDGET,
    BoundaryEvaluation,
    MargulisParams,
    NotParabolic,
    ScrewTranslation,
    boundary_function,
    boundary_tilde,
    c_epsilon,
    default_epsilon,
    in_margulis_region,
    normalize,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
