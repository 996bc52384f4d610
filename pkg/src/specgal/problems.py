r"""Benchmark control problems with manufactured exact solutions.

Every case manufactures the optimal pair around the same smooth profile,

    y*(x) = prod_i sin(pi x_i),      u*(x) = y*(x) s(x),
    s(x) = d pi^2 alpha(x) - div(beta)(x) + gamma(x),

which satisfies L(y*) = u* + f with f = -(grad(alpha) + beta) . grad(y*).
The tracking target follows from the adjoint equation, y_d = y* + rho
L_adj(u*), expanded analytically:

    L_adj(u*) = y* [d pi^2 alpha s - alpha lap(s) - grad(alpha).grad(s)
                    + beta.grad(s) + gamma s]
                + sum_i dy*/dx_i [ -2 alpha ds/dx_i - s dalpha/dx_i + s beta_i ].

All data are closed-form expressions evaluated at grid nodes; nothing is
differentiated numerically.  The catalogued cases:

* case I (2D/3D): alpha = 1, beta = 0, gamma = 10^0.8 + sum_i x_i, so f
  vanishes identically;
* case C1 (3D, 2D variant available): alpha = 10 + x_1,
  beta = (10 + x_1, 0, 0), gamma = 10 + sum_i x_i;
* case C2 (3D, 2D variant available): alpha = 10 + sum_i x_i^2,
  beta = (10 + x_1^2, 10 + x_2^2, 0), gamma = 10 + sum_i x_i.

C2's convection has divergence 2(x_1 + x_2); gamma - div(beta)/2 >= 9 on the
whole domain keeps every case uniformly well posed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .basis import (
    Basis1D,
    apply_along_axis,
    backward_transform,
    build_basis,
    compute_lgl_rule,
    inner_products,
)
from .operators import CdrOperator, CoefficientField, SaddleVector, _sample

__all__ = [
    "CaseStudyId",
    "ControlProblem",
    "case_coefficients",
    "make_case_study",
    "make_constant_case",
    "assemble_rhs",
    "l2_error",
    "consistency_residual",
]

_CASE_I_GAMMA0 = 10.0**0.8


class CaseStudyId(Enum):
    """Catalogued benchmark problems."""

    CASE_I_2D = "case1-2d"
    CASE_I_3D = "case1-3d"
    CASE_II_C1 = "c1"
    CASE_II_C2 = "c2"

    @property
    def label(self) -> str:
        return "case1" if self in (CaseStudyId.CASE_I_2D, CaseStudyId.CASE_I_3D) else self.value

    @property
    def default_dim(self) -> int:
        return 2 if self is CaseStudyId.CASE_I_2D else 3


def _coord_sum(grids):
    out = grids[0].copy()
    for x in grids[1:]:
        out = out + x
    return out


def _product_sine(grids):
    out = np.sin(np.pi * grids[0])
    for x in grids[1:]:
        out = out * np.sin(np.pi * x)
    return out


def _grad_product_sine(grids, axis: int):
    out = np.pi * np.cos(np.pi * grids[axis])
    for i, x in enumerate(grids):
        if i != axis:
            out = out * np.sin(np.pi * x)
    return out


@dataclass(frozen=True)
class _CasePieces:
    """Coefficients plus the analytic derivatives the data formulas need."""

    field: CoefficientField
    s: Callable
    grad_s: tuple[Callable, ...]
    lap_s: float
    grad_alpha: tuple[Callable, ...]


def _zero(_grids):
    return 0.0


def _one(_grids):
    return 1.0


def _case_one_pieces(dim: int) -> _CasePieces:
    dpi2 = dim * np.pi**2

    def gamma(X):
        return _CASE_I_GAMMA0 + _coord_sum(X)

    field = CoefficientField(dim=dim, alpha=_one, gamma=gamma, gamma_degree=1)
    return _CasePieces(
        field=field,
        s=lambda X: dpi2 + gamma(X),
        grad_s=(_one,) * dim,
        lap_s=0.0,
        grad_alpha=(_zero,) * dim,
    )


def _case_two_pieces(variant: CaseStudyId, dim: int) -> _CasePieces:
    dpi2 = dim * np.pi**2

    def gamma(X):
        return 10.0 + _coord_sum(X)

    if variant is CaseStudyId.CASE_II_C1:

        def alpha(X):
            return 10.0 + X[0]

        beta = (alpha,) + (_zero,) * (dim - 1)
        div_beta = _one
        field = CoefficientField(
            dim=dim,
            alpha=alpha,
            gamma=gamma,
            beta=beta,
            div_beta=div_beta,
            alpha_degree=1,
            beta_degree=1,
            gamma_degree=1,
        )
        return _CasePieces(
            field=field,
            s=lambda X: dpi2 * alpha(X) - 1.0 + gamma(X),
            grad_s=(lambda X: dpi2 + 1.0,) + (_one,) * (dim - 1),
            lap_s=0.0,
            grad_alpha=(_one,) + (_zero,) * (dim - 1),
        )

    def alpha(X):
        out = 10.0 + X[0] ** 2
        for x in X[1:]:
            out = out + x**2
        return out

    def beta_component(axis):
        return lambda X: 10.0 + X[axis] ** 2

    beta = (beta_component(0), beta_component(1)) + (_zero,) * (dim - 2)

    def div_beta(X):
        return 2.0 * (X[0] + X[1])

    def grad_s_component(axis):
        # ds/dx_i = 2 d pi^2 x_i - d(div beta)/dx_i + 1
        shift = -2.0 if axis < 2 else 0.0
        return lambda X: 2.0 * dpi2 * X[axis] + shift + 1.0

    field = CoefficientField(
        dim=dim,
        alpha=alpha,
        gamma=gamma,
        beta=beta,
        div_beta=div_beta,
        alpha_degree=2,
        beta_degree=2,
        gamma_degree=1,
    )
    return _CasePieces(
        field=field,
        s=lambda X: dpi2 * alpha(X) - div_beta(X) + gamma(X),
        grad_s=tuple(grad_s_component(a) for a in range(dim)),
        lap_s=dpi2 * 2.0 * dim,
        grad_alpha=tuple((lambda a: lambda X: 2.0 * X[a])(a) for a in range(dim)),
    )


def _pieces_for(case: CaseStudyId, dim: int) -> _CasePieces:
    if case in (CaseStudyId.CASE_I_2D, CaseStudyId.CASE_I_3D):
        return _case_one_pieces(dim)
    return _case_two_pieces(case, dim)


def case_coefficients(case: CaseStudyId, dim: int | None = None) -> CoefficientField:
    """Coefficient field of a catalogued case, optionally in another dimension."""
    dim = _resolve_dim(case, dim)
    return _pieces_for(case, dim).field


def _resolve_dim(case: CaseStudyId, dim: int | None) -> int:
    if case is CaseStudyId.CASE_I_2D:
        if dim not in (None, 2):
            raise ValueError("CASE_I_2D is two-dimensional")
        return 2
    if case is CaseStudyId.CASE_I_3D:
        if dim not in (None, 3):
            raise ValueError("CASE_I_3D is three-dimensional")
        return 3
    dim = case.default_dim if dim is None else dim
    if dim not in (2, 3):
        raise ValueError("case studies are defined for dim 2 and 3")
    return dim


@dataclass
class ControlProblem:
    """A discretized benchmark problem with its manufactured solution.

    `f_nodes` and `yd_nodes` sample the source and tracking target on the
    full tensor grid of `basis`; `exact_y`/`exact_u` evaluate the manufactured
    optimal pair on arbitrary coordinate grids.
    """

    case: CaseStudyId | None
    dim: int
    rho: float
    basis: Basis1D
    coefficients: CoefficientField
    f_nodes: np.ndarray
    yd_nodes: np.ndarray
    exact_y: Callable
    exact_u: Callable


def _manufactured_nodal(pieces: _CasePieces, grids, rho: float, dim: int):
    """Evaluate f and y_d on a grid from the closed-form expansions."""
    dpi2 = dim * np.pi**2
    y = _product_sine(grids)
    gy = [_grad_product_sine(grids, a) for a in range(dim)]
    alpha = _sample(pieces.field.alpha, grids)
    gamma = _sample(pieces.field.gamma, grids)
    s = _sample(pieces.s, grids)
    grad_s = [_sample(g, grids) for g in pieces.grad_s]
    grad_alpha = [_sample(g, grids) for g in pieces.grad_alpha]
    beta = (
        [_sample(b, grids) for b in pieces.field.beta]
        if pieces.field.beta is not None
        else [np.zeros_like(y) for _ in range(dim)]
    )

    f = np.zeros_like(y)
    for a in range(dim):
        f -= (grad_alpha[a] + beta[a]) * gy[a]

    bracket = dpi2 * alpha * s - alpha * pieces.lap_s + gamma * s
    for a in range(dim):
        bracket += (beta[a] - grad_alpha[a]) * grad_s[a]
    yd = y + rho * y * bracket
    for a in range(dim):
        yd += rho * gy[a] * (-2.0 * alpha * grad_s[a] - s * grad_alpha[a] + s * beta[a])
    return f, yd


def _build_problem(
    case: CaseStudyId | None, pieces: _CasePieces, order: int, rho: float, dim: int
) -> ControlProblem:
    if rho <= 0.0:
        raise ValueError("regularization weight rho must be positive")
    basis = build_basis(order)
    grids = np.meshgrid(*([basis.rule.nodes] * dim), indexing="ij")
    f_nodes, yd_nodes = _manufactured_nodal(pieces, grids, rho, dim)

    def exact_y(X):
        return _product_sine(X)

    def exact_u(X):
        return _product_sine(X) * _sample(pieces.s, X)

    return ControlProblem(
        case=case,
        dim=dim,
        rho=rho,
        basis=basis,
        coefficients=pieces.field,
        f_nodes=f_nodes,
        yd_nodes=yd_nodes,
        exact_y=exact_y,
        exact_u=exact_u,
    )


def make_case_study(
    case: CaseStudyId, order: int, rho: float = 1e-2, dim: int | None = None
) -> ControlProblem:
    """Build a catalogued benchmark at the given order and regularization.

    `dim` may override the dimension of the C1/C2 coefficient families (their
    2D variants drop the x_3 terms); case I fixes its dimension.
    """
    if order < 4:
        raise ValueError("case studies need order at least 4")
    dim = _resolve_dim(case, dim)
    return _build_problem(case, _pieces_for(case, dim), order, rho, dim)


def make_constant_case(
    order: int,
    dim: int,
    alpha: float = 1.0,
    gamma: float = 1.0,
    rho: float = 1e-2,
) -> ControlProblem:
    """Manufactured problem with constant coefficients and no convection.

    For this family the discrete operator coincides exactly with the fast
    solver's diagonal matrix, so it doubles as the reference for the
    preconditioner-exactness checks.
    """
    if alpha <= 0.0 or gamma <= 0.0:
        raise ValueError("constant coefficients must be positive")
    dpi2 = dim * np.pi**2
    field = CoefficientField(dim=dim, alpha=lambda X: alpha, gamma=lambda X: gamma)
    pieces = _CasePieces(
        field=field,
        s=lambda X: dpi2 * alpha + gamma,
        grad_s=(_zero,) * dim,
        lap_s=0.0,
        grad_alpha=(_zero,) * dim,
    )
    return _build_problem(None, pieces, order, rho, dim)


def assemble_rhs(problem: ControlProblem, basis: Basis1D | None = None) -> SaddleVector:
    """Project the sampled data onto the basis: b = (<y_d, psi_k>, <f, psi_k>)."""
    basis = problem.basis if basis is None else basis
    expected = (basis.order + 1,) * problem.dim
    if problem.yd_nodes.shape != expected or problem.f_nodes.shape != expected:
        raise ValueError(f"nodal data shape does not match basis grid {expected}")
    return SaddleVector(
        first=inner_products(basis, problem.yd_nodes),
        second=inner_products(basis, problem.f_nodes),
    )


def l2_error(basis: Basis1D, coeffs: np.ndarray, exact: Callable, oversample: int = 16) -> float:
    """L2 distance between a modal tensor and an exact function.

    Evaluated with a Lobatto rule of order N + oversample, fine enough that
    the quadrature error is negligible against the approximation error for
    the smooth benchmark solutions.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    dim = coeffs.ndim
    rule = compute_lgl_rule(basis.order + oversample)
    tab = basis.evaluate(rule.nodes)
    vals = coeffs
    for axis in range(dim):
        vals = apply_along_axis(tab, vals, axis)
    grids = np.meshgrid(*([rule.nodes] * dim), indexing="ij")
    diff2 = (vals - exact(grids)) ** 2
    for axis in range(dim):
        shape = [1] * dim
        shape[axis] = rule.weights.size
        diff2 = diff2 * rule.weights.reshape(shape)
    return float(np.sqrt(diff2.sum()))


def consistency_residual(
    problem: ControlProblem, operator: CdrOperator | None = None
) -> float:
    """Relative residual of the interpolated exact pair in the discrete system.

    Projects (y*, u*) into the basis by interior interpolation, applies the
    saddle operator, and compares with the assembled right-hand side.  Decays
    spectrally with the order, down to a round-off plateau.  An already built
    operator may be passed to skip the setup.
    """
    basis = problem.basis
    interior = basis.rule.nodes[1:-1]
    grids = np.meshgrid(*([interior] * problem.dim), indexing="ij")
    y_hat = backward_transform(basis, problem.exact_y(grids))
    u_hat = backward_transform(basis, problem.exact_u(grids))
    op = operator if operator is not None else CdrOperator(
        basis, problem.coefficients, problem.rho
    )
    lhs = op.apply_saddle(SaddleVector(y_hat, u_hat))
    rhs = assemble_rhs(problem)
    num = np.sqrt(
        np.sum((lhs.first - rhs.first) ** 2) + np.sum((lhs.second - rhs.second) ** 2)
    )
    den = np.sqrt(np.sum(rhs.first**2) + np.sum(rhs.second**2))
    return float(num / den)
