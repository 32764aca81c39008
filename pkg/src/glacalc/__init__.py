"""Exact exterior calculus on generalized Lie algebroids."""

from .algebroid import (
    Algebroid,
    Morphism,
    Section,
    SmoothMap,
    anchor_apply,
    bracket,
    change_frame,
    gla_from_lie_algebroid,
    lift_section,
    pullback_algebroid,
    push_section,
    tangent_gla,
    validate,
)
from .connection import (
    Connection,
    bianchi_identities_check,
    cartan_identities_check,
    connection_forms,
    curvature,
    torsion,
)
from .forms import (
    Form,
    evaluate,
    exterior_derivative,
    exterior_derivative_intrinsic,
    interior,
    is_closed,
    lie_derivative,
    maurer_cartan_check,
    pullback_form,
    wedge,
)
from .idseds import (
    IDS,
    annihilator,
    complete_frame,
    eds_check,
    ideal_membership,
    involutive_bracket,
    involutive_cartan,
)
from .ratlinalg import FieldMatrix, invert, nullspace, rank, solve
from .symkernel import CoordinateSet, ScalarExpr, parse_expr

__version__ = "0.1.0"
