"""Reference constructions shared by several test modules.

Everything here is assembled the straightforward, slow way: evaluation
tables on an oversampled quadrature grid, dense matrices built column by
column.  The rule order N + oversample is exact for the polynomial
coefficients of every catalogued case, so disagreement with the production
path indicates a genuine defect rather than a quadrature artifact.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from specgal.basis import Basis1D, compute_lgl_rule
from specgal.operators import CoefficientField


def sample_on(fn, grids) -> np.ndarray:
    return np.broadcast_to(np.asarray(fn(grids), dtype=float), grids[0].shape)


def kron_all(mats) -> np.ndarray:
    return reduce(np.kron, mats)


def dense_from_action(apply_fn, shape) -> np.ndarray:
    """Materialize a linear action by applying it to every unit tensor."""
    m = int(np.prod(shape))
    out = np.empty((m, m))
    basis_vec = np.zeros(m)
    for j in range(m):
        basis_vec[:] = 0.0
        basis_vec[j] = 1.0
        out[:, j] = np.ravel(apply_fn(basis_vec.reshape(shape)))
    return out


class QuadratureOracle:
    """Mass and weak-form actions by plain oversampled tensor quadrature."""

    def __init__(self, basis: Basis1D, field: CoefficientField, oversample: int = 4):
        self.dim = field.dim
        self.n_modes = basis.n_modes
        rule = compute_lgl_rule(basis.order + oversample)
        self.values = basis.evaluate(rule.nodes)
        self.derivs = basis.evaluate(rule.nodes, 1)
        grids = np.meshgrid(*([rule.nodes] * self.dim), indexing="ij")
        w = rule.weights
        wt = w.reshape((-1,) + (1,) * (self.dim - 1)).copy()
        for a in range(1, self.dim):
            shape = [1] * self.dim
            shape[a] = w.size
            wt = wt * w.reshape(shape)
        self.weights = wt
        self.alpha = sample_on(field.alpha, grids)
        self.gamma = sample_on(field.gamma, grids)
        self.beta = (
            [sample_on(c, grids) for c in field.beta] if field.beta is not None else None
        )

    def _to_grid(self, x, deriv_axis=None) -> np.ndarray:
        out = np.asarray(x, dtype=float)
        for a in range(self.dim):
            mat = self.derivs if a == deriv_axis else self.values
            out = np.moveaxis(np.tensordot(mat, out, axes=(1, a)), 0, a)
        return out

    def _to_modal(self, grid_vals, deriv_axis=None) -> np.ndarray:
        out = grid_vals * self.weights
        for a in range(self.dim):
            mat = self.derivs if a == deriv_axis else self.values
            out = np.moveaxis(np.tensordot(mat.T, out, axes=(1, a)), 0, a)
        return out

    def mass(self, x) -> np.ndarray:
        return self._to_modal(self._to_grid(x))

    def stiffness(self, x) -> np.ndarray:
        """Entries a(u, psi_j) for the field u with coefficients x."""
        grid = self._to_grid(x)
        out = self._to_modal(self.gamma * grid)
        for a in range(self.dim):
            grad_a = self._to_grid(x, deriv_axis=a)
            term = self.alpha * grad_a
            if self.beta is not None:
                term = term + self.beta[a] * grid
            out = out + self._to_modal(term, deriv_axis=a)
        return out

    def stiffness_transpose(self, z) -> np.ndarray:
        """Entries a(psi_j, w) for the field w with coefficients z."""
        grid = self._to_grid(z)
        out = self._to_modal(self.gamma * grid)
        for a in range(self.dim):
            grad_a = self._to_grid(z, deriv_axis=a)
            out = out + self._to_modal(self.alpha * grad_a, deriv_axis=a)
            if self.beta is not None:
                out = out + self._to_modal(self.beta[a] * grad_a)
        return out


class ProductionMirror:
    """Dense mirror of the production discretization, coded independently.

    Each derivative term is integrated by the collocation rule along its own
    axis and exactly along the others, after the coefficient product has been
    re-expanded in the trial space by interpolation at the interior nodes;
    the reaction term is re-expanded on every axis.  Assembled here with
    plain dense inverses and Kronecker products rather than the axis-wise
    factored transforms of the package.
    """

    def __init__(self, basis: Basis1D, field: CoefficientField):
        dim = field.dim
        nodes = basis.rule.nodes
        interior = nodes[1:-1]
        values = basis.evaluate(nodes)
        derivs = basis.evaluate(nodes, 1)
        values_int = basis.evaluate(interior)
        lam = basis.eigenvalues

        quad_rows = (basis.rule.weights[:, None] * derivs).T
        refit_rows = lam[:, None] * np.linalg.inv(values_int)

        grids_int = np.meshgrid(*([interior] * dim), indexing="ij")
        gamma_int = sample_on(field.gamma, grids_int)
        total = (
            kron_all([refit_rows] * dim)
            @ np.diag(gamma_int.ravel())
            @ kron_all([values_int] * dim)
        )

        for a in range(dim):
            grids_mix = np.meshgrid(
                *[nodes if b == a else interior for b in range(dim)], indexing="ij"
            )
            rows = kron_all([quad_rows if b == a else refit_rows for b in range(dim)])
            alpha_mix = sample_on(field.alpha, grids_mix)
            diff_cols = kron_all([derivs if b == a else values_int for b in range(dim)])
            total = total + rows @ np.diag(alpha_mix.ravel()) @ diff_cols
            if field.beta is not None:
                beta_mix = sample_on(field.beta[a], grids_mix)
                if np.any(beta_mix):
                    conv_cols = kron_all(
                        [values if b == a else values_int for b in range(dim)]
                    )
                    total = total + rows @ np.diag(beta_mix.ravel()) @ conv_cols

        self.dim = dim
        self.shape = (basis.n_modes,) * dim
        self.stiffness_dense = total
        self.mass_dense = kron_all([np.diag(lam)] * dim)

    def stiffness(self, x) -> np.ndarray:
        return (self.stiffness_dense @ np.ravel(x)).reshape(self.shape)

    def stiffness_transpose(self, z) -> np.ndarray:
        return (self.stiffness_dense.T @ np.ravel(z)).reshape(self.shape)
