"""Partial Jacobi structures: Schouten calculus, brackets, Poissonization and diagnostics."""

from .catalog import (
    StructureConstants,
    contact_canonical,
    cosymplectic_extended_cotangent,
    lie_poisson,
    one_jet,
    so3_dual,
    standard_jacobi,
)
from .config import RunConfig
from .expr import (
    Chart,
    EvaluationError,
    Exact,
    Factored,
    NotPolynomial,
    ParseError,
    PolyForm,
    Sampled,
    check_zero,
    differentiate,
    evaluate,
    expr_is_zero,
    format_expr,
    parse_expr,
    poly_normalize,
)
from .multivector import MultivectorField, contract_df, lie_derivative, mv_apply, schouten, wedge
from .structure import (
    MembershipError,
    PartialJacobiStructure,
    SchemaError,
    StructureError,
    algebra_member,
    conformal_transform,
    hamiltonian_field,
    jacobi_bracket,
    jacobi_map_check,
    load_structure,
    verify_structure,
)

__version__ = "0.1.0"
