"""Generalized Hénon maps: exact composition algebra, normal forms, escape
dynamics and commutation rigidity checks."""

__version__ = "0.1.0"

from .poly import BiPoly, CoefficientOverflow, Polynomial, PolyMap2, map_compose, map_equal_within
from .maps import (
    ElementaryFactor,
    Escaped,
    ExpansionTooLarge,
    HenonChain,
    InvalidFactor,
    Point2,
    chain_degree,
    chain_eval,
    chain_expand,
    chain_jacobian_det,
    conjugate_by_translation,
    factor_eval,
    normal_factor,
    simple_henon,
)
from .normal_form import (
    PreconditionViolated,
    TwistGroup,
    admissible_twist_group,
    chain_normalize_b_only,
    origin_fixed_form,
    pair_normalize,
    square_normal_form,
    twist_symmetry_check,
)
from .dynamics import (
    Dynamics,
    EscapeClass,
    EscapeKind,
    FiltrationRadius,
    GreenEstimate,
    GridJob,
    GridMode,
    GridSlice,
    classify_point,
    filtration_radius,
    green,
    green_max,
    rasterize_grid,
    verify_green_domination,
)
from .rigidity import (
    DegreeMismatch,
    FixedPointSet,
    RigidityReport,
    TwistCandidate,
    check_commute,
    find_twist,
    fixed_points,
    rigidity_report,
    verify_squares_commute,
)
