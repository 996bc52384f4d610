"""Spectral Galerkin solver for distributed elliptic optimal control.

The package discretizes the optimality system of a tracking-type control
problem constrained by a convection-diffusion-reaction equation on
[-1, 1]^d with a Legendre basis whose mass matrix is diagonalized once per
order.  The saddle operator is applied matrix-free and preconditioned by a
constant-coefficient surrogate that fast diagonalization inverts exactly,
so preconditioned GMRES converges in a handful of iterations independent
of both the order and the regularization weight.
"""

from .basis import (
    Basis1D,
    LglRule,
    backward_transform,
    build_basis,
    compute_lgl_rule,
    forward_transform,
    inner_products,
)
from .operators import CdrOperator, CoefficientField, SaddleVector
from .problems import (
    CaseStudyId,
    ControlProblem,
    assemble_rhs,
    case_coefficients,
    consistency_residual,
    l2_error,
    make_case_study,
    make_constant_case,
)
from .solver import FastSolver, KrylovStats, coefficient_midpoint, gmres_solve
from .studies import (
    CONSTANT_CASE,
    CsvReport,
    StudyConfig,
    run_convergence_study,
    run_iteration_study,
    run_solve_study,
    run_spectrum_study,
    run_study,
)

__version__ = "0.1.0"

__all__ = [
    "Basis1D",
    "LglRule",
    "backward_transform",
    "build_basis",
    "compute_lgl_rule",
    "forward_transform",
    "inner_products",
    "CdrOperator",
    "CoefficientField",
    "SaddleVector",
    "CaseStudyId",
    "ControlProblem",
    "assemble_rhs",
    "case_coefficients",
    "consistency_residual",
    "l2_error",
    "make_case_study",
    "make_constant_case",
    "FastSolver",
    "KrylovStats",
    "coefficient_midpoint",
    "gmres_solve",
    "CONSTANT_CASE",
    "CsvReport",
    "StudyConfig",
    "run_convergence_study",
    "run_iteration_study",
    "run_solve_study",
    "run_spectrum_study",
    "run_study",
    "__version__",
]
