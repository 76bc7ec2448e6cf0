"""Umbilic indices of graph surfaces and Hessian eigen-flow indices.

Modules: ``jets`` (Taylor arithmetic), ``catalog`` (surfaces), ``identifiers``
(umbilic and equi-diagonal identifiers), ``winding`` (indices along curves),
``inversion`` (inverted graph ends, regularity, duality), ``ribaucour``
(tangent-sphere reparametrisation) and ``cli``.
"""

from __future__ import annotations

from .catalog import (
    Domain,
    SurfaceSpec,
    bates,
    expression,
    fm,
    ghomi_howard,
    gm,
    lambda_m,
    make_dual,
    paraboloid,
    parse_surface,
    rez2zbar,
    rez3,
)
from .errors import (
    DomainError,
    EquiDiagonalError,
    NoConvergence,
    NonFiniteError,
    ParseError,
    TangentZeroError,
    UmbilicError,
    UmbilicOnCurveError,
    UmbilicsError,
    ZeroOnCurveError,
)
from .inversion import check_hatted_limits, check_regularity, duality_check, graph_height, invert_graph
from .jets import Jet, Point2, PolarPoint, Taylor, eval_jet, eval_polar_jet, hat_jet
from .ribaucour import fact_a1_residual, ribaucour_data, sphere_congruence_surface
from .winding import (
    CurveSpec,
    HalfIndex,
    WindingReport,
    circle,
    find_small_radius,
    find_valid_radius,
    hessian_flow_index,
    index_at_infinity,
    inverted_index,
    line_field_index,
    sign_change_index,
    umbilic_index_direct,
    umbilic_index_via_D,
    umbilic_index_via_Delta,
    vector_field_index,
)

__version__ = "0.1.0"
