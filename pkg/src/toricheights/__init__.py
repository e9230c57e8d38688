"""Heights of semipositive toric adelic divisors via the roof-function
dictionary: exact piecewise-affine convex analysis over the rationals plus
adaptive cutoff quadrature for analytic boundary singularities."""

from .adelic import (
    AdelicDivisor,
    ModelGreens,
    Place,
    add,
    boundary_norm,
    check_nef,
    check_semipositive,
    global_roof_eval,
    regularize,
    standard_boundary_divisor,
)
from .concave import (
    MINUS_INF,
    AnalyticRoof,
    IndicatorRoof,
    PAConcave,
    PARoof,
    RadialRoof,
    c_norm,
    g_norm,
    indicator,
    lf_transform,
    lf_transform_inv,
    recession,
    stability_set,
    sup_convolution,
)
from .expr import parse_expression, parse_roof_expression
from .families import make_family
from .fans import (
    ArithmeticFan,
    Cone,
    Fan,
    SupportFunction,
    ToricDivisorData,
    canonical_extension,
    common_refinement,
    divisor_from_support,
    is_ample,
    is_complete,
    is_effective,
    is_projective,
    is_relatively_nef,
    is_smooth,
    normal_fan,
    smooth_refinement_2d,
    support_from_divisor,
    validate_arithmetic_fan,
    validate_fan_morphism,
    weil_decomposition,
)
from .intersect import (
    HeightValue,
    IntegrationConfig,
    integrate_exact,
    integrate_numeric,
    mixed_integral,
    mixed_intersection,
    self_intersection,
)
from .polytopes import Ball, EmptyBody, OracleBody, Polytope, minkowski_sum, shrink, triangulate, upper_hull, volume
from .registry import run_example

__version__ = "0.1.0"
