"""Closed-form fast solver checks and GMRES driver behavior."""

import numpy as np
import pytest

from specgal.basis import build_basis
from specgal.operators import CdrOperator, CoefficientField, SaddleVector
from specgal.problems import (
    CaseStudyId,
    assemble_rhs,
    case_coefficients,
    l2_error,
    make_constant_case,
)
from specgal.solver import FastSolver, coefficient_midpoint, gmres_solve

_CASE_I_GAMMA_BAR = 10.0**0.8


def _flat(v: SaddleVector) -> np.ndarray:
    return np.concatenate([np.ravel(v.first), np.ravel(v.second)])


def _rand_pair(rng, shape) -> SaddleVector:
    return SaddleVector(rng.standard_normal(shape), rng.standard_normal(shape))


# ---------------------------------------------------------------------------
# coefficient midpoints


def test_midpoint_of_case_one_reaction():
    # gamma = 10^0.8 + sum(x) has symmetric extrema, so the midpoint is the
    # offset itself; alpha is identically one.
    rule = build_basis(8).rule
    field = case_coefficients(CaseStudyId.CASE_I_3D)
    alpha_bar, gamma_bar = coefficient_midpoint(field, rule)
    assert abs(alpha_bar - 1.0) <= 1e-14
    assert abs(gamma_bar - _CASE_I_GAMMA_BAR) <= 1e-12


def test_midpoint_of_quadratic_diffusion():
    # 10 + sum(x^2) on an even-order grid: the origin is a node, so the
    # minimum 10 is attained exactly and the midpoint is (10 + 13)/2.
    rule = build_basis(8).rule
    field = case_coefficients(CaseStudyId.CASE_II_C2, dim=3)
    alpha_bar, _ = coefficient_midpoint(field, rule)
    assert abs(alpha_bar - 11.5) <= 1e-13


def test_midpoint_rejects_sign_changing_diffusion():
    rule = build_basis(6).rule
    field = CoefficientField(dim=2, alpha=lambda X: X[0], gamma=lambda X: 1.0)
    with pytest.raises(ValueError):
        coefficient_midpoint(field, rule)


# ---------------------------------------------------------------------------
# fast solver closed forms


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_sigma_matches_manual_formula(dim):
    basis = build_basis(7)
    fast = FastSolver(basis, dim, alpha_bar=1.7, gamma_bar=0.4, rho=1e-3)
    lam = basis.eigenvalues
    if dim == 1:
        expect = 1.7 + 0.4 * lam
    elif dim == 2:
        ln, lm = np.meshgrid(lam, lam, indexing="ij")
        expect = 1.7 * (ln + lm) + 0.4 * ln * lm
    else:
        ln, lm, lk = np.meshgrid(lam, lam, lam, indexing="ij")
        expect = 1.7 * (ln * lm + ln * lk + lm * lk) + 0.4 * ln * lm * lk
    assert np.max(np.abs(fast.sigma - expect)) <= 1e-14
    assert np.all(fast.sigma > 0.0)
    assert np.all(fast.lam_prod > 0.0)


@pytest.mark.parametrize("rho", [1e-8, 1e-4, 1.0])
@pytest.mark.parametrize("dim", [1, 2, 3])
def test_apply_and_solve_are_inverse(dim, rho):
    # At rho = 1e-8 the mode blocks are ill conditioned enough that the
    # round trip picks up ~ kappa * eps noise beyond N of about 12; probe
    # below that so the 1e-13 bound is meaningful rather than flaky.
    basis = build_basis(8)
    fast = FastSolver(basis, dim, alpha_bar=2.0, gamma_bar=3.0, rho=rho)
    rng = np.random.default_rng(dim * 11 + 1)
    shape = (basis.n_modes,) * dim
    v = _rand_pair(rng, shape)
    b = _rand_pair(rng, shape)
    round1 = fast.solve(fast.apply(v))
    assert np.linalg.norm(_flat(round1) - _flat(v)) <= 1e-13 * np.linalg.norm(_flat(v))
    # the reverse composition routes through the same cancellation
    round2 = fast.apply(fast.solve(b))
    assert np.linalg.norm(_flat(round2) - _flat(b)) <= 5e-13 * np.linalg.norm(_flat(b))


def test_solve_of_diagonal_pair_is_unit_state():
    # b = (L, s) entrywise solves to y = 1, u = 0 by the closed form.
    basis = build_basis(9)
    fast = FastSolver(basis, 2, alpha_bar=1.0, gamma_bar=2.0, rho=1e-2)
    out = fast.solve(SaddleVector(fast.lam_prod.copy(), fast.sigma.copy()))
    assert np.max(np.abs(out.first - 1.0)) <= 1e-13
    assert np.max(np.abs(out.second)) <= 1e-13


def test_solver_scales_linearly():
    basis = build_basis(8)
    fast = FastSolver(basis, 2, alpha_bar=1.0, gamma_bar=1.0, rho=1e-2)
    rng = np.random.default_rng(5)
    b = _rand_pair(rng, (basis.n_modes,) * 2)
    x1 = fast.solve(b)
    x10 = fast.solve(SaddleVector(10.0 * b.first, 10.0 * b.second))
    scale = np.max(np.abs(_flat(x1)))
    assert np.max(np.abs(_flat(x10) - 10.0 * _flat(x1))) <= 1e-13 * scale


def test_dense_form_matches_apply():
    basis = build_basis(6)
    fast = FastSolver(basis, 2, alpha_bar=1.5, gamma_bar=0.5, rho=1e-4)
    rng = np.random.default_rng(2)
    v = _rand_pair(rng, (basis.n_modes,) * 2)
    dense = fast.assemble_dense() @ _flat(v)
    assert np.max(np.abs(dense - _flat(fast.apply(v)))) <= 1e-13


def test_fast_solver_inverts_constant_coefficient_saddle():
    """With constant coefficients the full operator *is* the fast solver's
    matrix, so its closed-form inverse must match a dense linear solve."""
    basis = build_basis(8)
    field = CoefficientField(dim=2, alpha=lambda X: 2.0, gamma=lambda X: 3.0)
    op = CdrOperator(basis, field, 1e-2)
    fast = FastSolver(basis, 2, alpha_bar=2.0, gamma_bar=3.0, rho=1e-2)
    rng = np.random.default_rng(31)
    b = _rand_pair(rng, (basis.n_modes,) * 2)
    x_dense = np.linalg.solve(op.assemble_dense("saddle"), _flat(b))
    x_fast = _flat(fast.solve(b))
    assert np.max(np.abs(x_dense - x_fast)) <= 1e-11 * np.max(np.abs(x_dense))


def test_direct_solve_of_constant_problem():
    problem = make_constant_case(12, 2)
    fast = FastSolver(problem.basis, 2, alpha_bar=1.0, gamma_bar=1.0, rho=problem.rho)
    x = fast.solve(assemble_rhs(problem))
    err_y = l2_error(problem.basis, x.first, problem.exact_y)
    err_u = l2_error(problem.basis, x.second, problem.exact_u)
    assert err_y <= 1e-6  # measured 1.77e-7 at this order
    assert err_u <= 1e-5  # measured 3.66e-6

    op = CdrOperator(problem.basis, problem.coefficients, problem.rho)
    x_it, stats = gmres_solve(op.apply_saddle, fast.solve, assemble_rhs(problem))
    assert stats.converged
    gap = np.max(np.abs(_flat(x_it) - _flat(x)))
    assert gap <= 1e-10 * np.max(np.abs(_flat(x)))


def test_fast_solver_validation():
    basis = build_basis(6)
    with pytest.raises(ValueError):
        FastSolver(basis, 4, 1.0, 1.0, 1e-2)
    with pytest.raises(ValueError):
        FastSolver(basis, 2, -1.0, 1.0, 1e-2)
    with pytest.raises(ValueError):
        FastSolver(basis, 2, 1.0, 0.0, 1e-2)
    with pytest.raises(ValueError):
        FastSolver(basis, 2, 1.0, 1.0, 0.0)
    fast = FastSolver(basis, 2, 1.0, 1.0, 1e-2)
    bad = SaddleVector(np.zeros((3, 3)), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        fast.apply(bad)


# ---------------------------------------------------------------------------
# GMRES driver


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_constant_coefficients_converge_in_one_iteration(dim):
    problem = make_constant_case(8, dim, alpha=2.0, gamma=3.0)
    op = CdrOperator(problem.basis, problem.coefficients, problem.rho)
    fast = FastSolver(problem.basis, dim, 2.0, 3.0, problem.rho)
    _, stats = gmres_solve(op.apply_saddle, fast.solve, assemble_rhs(problem))
    assert stats.converged
    assert stats.iterations == 1
    assert stats.true_residual <= 1e-12


def test_identity_system_converges_immediately():
    rng = np.random.default_rng(7)
    b = _rand_pair(rng, (20,))
    ident = lambda v: v
    x, stats = gmres_solve(ident, ident, b)
    assert stats.converged and stats.iterations == 1
    assert np.max(np.abs(_flat(x) - _flat(b))) <= 1e-12


def test_matches_dense_solve_on_random_system():
    m = 25
    rng = np.random.default_rng(13)
    a = np.eye(2 * m) + 0.2 * rng.standard_normal((2 * m, 2 * m))

    def apply_op(v):
        w = a @ _flat(v)
        return SaddleVector(w[:m], w[m:])

    b = _rand_pair(rng, (m,))
    x, stats = gmres_solve(apply_op, lambda v: v, b, tol=1e-12)
    assert stats.converged
    expect = np.linalg.solve(a, _flat(b))
    assert np.max(np.abs(_flat(x) - expect)) <= 1e-9 * np.max(np.abs(expect))
    hist = stats.residual_history
    assert hist[0] == 1.0
    assert stats.iterations == len(hist) - 1
    assert all(hist[i + 1] <= hist[i] + 1e-15 for i in range(len(hist) - 1))
    assert stats.wall_seconds >= 0.0


def test_residual_history_on_variable_coefficients():
    from specgal.problems import make_case_study

    problem = make_case_study(CaseStudyId.CASE_II_C2, 8, dim=2)
    op = CdrOperator(problem.basis, problem.coefficients, problem.rho)
    fast = FastSolver(
        problem.basis,
        2,
        *coefficient_midpoint(problem.coefficients, problem.basis.rule),
        rho=problem.rho,
    )
    _, stats = gmres_solve(op.apply_saddle, fast.solve, assemble_rhs(problem))
    assert stats.converged
    assert stats.true_residual <= 1e-8
    hist = stats.residual_history
    assert all(hist[i + 1] <= hist[i] + 1e-15 for i in range(len(hist) - 1))


def test_iteration_cap_reports_unconverged():
    problem = make_constant_case(8, 2)
    op = CdrOperator(problem.basis, problem.coefficients, problem.rho)
    # identity preconditioner: the saddle system needs far more than one step
    _, stats = gmres_solve(op.apply_saddle, lambda v: v, assemble_rhs(problem), max_iter=1)
    assert not stats.converged
    assert stats.iterations == 1
    assert len(stats.residual_history) == 2


def test_zero_rhs_short_circuits():
    shape = (4, 4)
    b = SaddleVector(np.zeros(shape), np.zeros(shape))
    x, stats = gmres_solve(lambda v: v, lambda v: v, b)
    assert stats.converged
    assert stats.iterations == 0
    assert stats.residual_history == [0.0]
    assert np.all(x.first == 0.0) and np.all(x.second == 0.0)


def test_nonfinite_operator_raises():
    def bad(v):
        return SaddleVector(v.first * np.nan, v.second)

    b = SaddleVector(np.ones(3), np.ones(3))
    with pytest.raises(RuntimeError):
        gmres_solve(bad, lambda v: v, b)


def test_gmres_argument_validation():
    b = SaddleVector(np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        gmres_solve(lambda v: v, lambda v: v, b, tol=0.0)
    with pytest.raises(ValueError):
        gmres_solve(lambda v: v, lambda v: v, b, max_iter=0)
