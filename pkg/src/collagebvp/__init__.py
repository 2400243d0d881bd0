"""Tent-basis Galerkin solver for a coupled pair of 1-D boundary value
problems, with coefficient recovery by collage-style residual minimisation."""

from .basis import (
    h1_gram,
    haar_eval,
    haar_index,
    load_entry,
    load_vector,
    mass_entry,
    mass_matrix,
    schauder_deriv,
    schauder_eval,
    stiffness_entry,
)
from .expr import EvalDomainError, Expression, ParseError, parse
from .forward import (
    ErrorReport,
    GalerkinSolution,
    ProblemSpec,
    assemble,
    error_report,
    reference_problem,
    solve_forward,
)
from .inverse import (
    MODES,
    BoxConstraint,
    CollageBound,
    MinimizeResult,
    MinimizeSettings,
    ResidualModel,
    build_residual,
    collage_bound_check,
    minimize,
    objective,
)
from .linalg import NotIdentifiableError, NotSPDError, SymMatrix, cholesky_solve, lsq_affine_2
from .quadrature import QuadratureRule, default_rule, gauss_nodes, integrate

__version__ = "0.1.0"

__all__ = [
    "BoxConstraint",
    "CollageBound",
    "ErrorReport",
    "EvalDomainError",
    "Expression",
    "GalerkinSolution",
    "MODES",
    "MinimizeResult",
    "MinimizeSettings",
    "NotIdentifiableError",
    "NotSPDError",
    "ParseError",
    "ProblemSpec",
    "QuadratureRule",
    "ResidualModel",
    "SymMatrix",
    "assemble",
    "build_residual",
    "cholesky_solve",
    "collage_bound_check",
    "default_rule",
    "error_report",
    "gauss_nodes",
    "h1_gram",
    "haar_eval",
    "haar_index",
    "integrate",
    "load_entry",
    "load_vector",
    "lsq_affine_2",
    "mass_entry",
    "mass_matrix",
    "minimize",
    "objective",
    "parse",
    "reference_problem",
    "schauder_deriv",
    "schauder_eval",
    "solve_forward",
    "stiffness_entry",
]
