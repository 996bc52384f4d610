r"""Matrix-free action of the discrete optimal-control saddle-point system.

The continuous problem couples a convection-diffusion-reaction state equation
with a distributed control through the first-order optimality conditions.  In
the mass-diagonalized tensor basis the discrete system reads

    [ M   rho*B^T ] [y]   [Y]
    [ B      -M   ] [u] = [F]

where M is diagonal (the tensor of mass eigenvalues) and B collects the
bilinear form of the state operator,

    a(u, v) = int( alpha grad(u) . grad(v) + (beta u) . grad(v) + gamma u v ).

B is never assembled.  Its action splits into one gradient term per axis plus
a reaction term, each evaluated in O(N^(d+1)) by one-dimensional transforms:

* gradient term for axis a: evaluate alpha * du/dx_a (and beta_a * u) on the
  grid, refit every *other* axis in the trial space at interior nodes, then
  integrate axis a against the derivative table by quadrature and scale the
  refit axes by the exact mass eigenvalues;
* reaction term: evaluate gamma * u at interior nodes, refit every axis, and
  scale by the mass eigenvalues (interpolate-then-exact-mass).

Quadrature is therefore committed only along each term's derivative axis,
where the integrand degree stays within the rule's exactness for constant and
affine coefficients.  With constant coefficients the whole action collapses,
to machine precision, onto the separable diagonal operator that the fast
preconditioner inverts, so the preconditioned iteration converges in a single
step in that limit.

The transpose action is built from the transposed kernels of the same three
routes, making <B x, z> = <x, B^T z> hold to round-off for every input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .basis import Basis1D, apply_along_axis, solve_along_axis

__all__ = [
    "CoefficientField",
    "SaddleVector",
    "CdrOperator",
    "DENSE_SIZE_LIMIT",
]

DENSE_SIZE_LIMIT = 4096

_GridFunc = Callable[[tuple[np.ndarray, ...]], np.ndarray | float]


def _sample(fn: _GridFunc, grids: tuple[np.ndarray, ...]) -> np.ndarray:
    vals = np.asarray(fn(grids), dtype=float)
    return np.broadcast_to(vals, grids[0].shape).copy()


@dataclass(frozen=True)
class CoefficientField:
    """Scalar diffusion/reaction and vector convection coefficients.

    Every callable receives the tuple of meshgrid coordinate arrays and
    returns values on that grid (scalars broadcast).  `div_beta` is the
    analytic divergence of the convection field, used for the well-posedness
    check; it defaults to zero when `beta` is absent.  Declared polynomial
    degrees are metadata describing how far past the rule's exactness the
    variable-coefficient integrands reach.
    """

    dim: int
    alpha: _GridFunc
    gamma: _GridFunc
    beta: tuple[_GridFunc, ...] | None = None
    div_beta: _GridFunc | None = None
    alpha_degree: int = 0
    beta_degree: int = 0
    gamma_degree: int = 0

    def __post_init__(self) -> None:
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")
        if self.beta is not None and len(self.beta) != self.dim:
            raise ValueError("beta must supply one component per dimension")


class SaddleVector(NamedTuple):
    """Pair of modal tensors: (state row, control row) of the saddle system."""

    first: np.ndarray
    second: np.ndarray


class CdrOperator:
    """Matrix-free matvecs for one discretized control problem.

    Coefficient samples and quadrature tables are frozen at construction;
    every apply_* method is a pure function of its input tensor.
    """

    def __init__(self, basis: Basis1D, coefficients: CoefficientField, rho: float):
        if rho <= 0.0:
            raise ValueError("regularization weight rho must be positive")
        self.basis = basis
        self.coefficients = coefficients
        self.rho = float(rho)
        self.dim = coefficients.dim

        nodes = basis.rule.nodes
        grids = np.meshgrid(*([nodes] * self.dim), indexing="ij")
        alpha = _sample(coefficients.alpha, grids)
        gamma = _sample(coefficients.gamma, grids)
        if np.any(alpha <= 0.0):
            raise ValueError("diffusion coefficient must be positive on the grid")
        if np.any(gamma < 0.0):
            raise ValueError("reaction coefficient must be nonnegative on the grid")
        div_beta = (
            _sample(coefficients.div_beta, grids)
            if coefficients.div_beta is not None
            else np.zeros_like(alpha)
        )
        if np.any(gamma - 0.5 * div_beta < 0.0):
            raise ValueError("well-posedness requires gamma - div(beta)/2 >= 0")

        inner = (slice(1, -1),) * self.dim
        self._gamma_int = gamma[inner]
        # Per-axis coefficient slices: full nodes along the derivative axis,
        # interior nodes elsewhere (where the refit happens).
        self._alpha_mixed = []
        self._beta_mixed: list[np.ndarray | None] = []
        for a in range(self.dim):
            sl = tuple(slice(None) if b == a else slice(1, -1) for b in range(self.dim))
            self._alpha_mixed.append(alpha[sl])
            if coefficients.beta is None:
                self._beta_mixed.append(None)
            else:
                comp = _sample(coefficients.beta[a], grids)
                self._beta_mixed.append(comp[sl] if np.any(comp) else None)

        w = basis.rule.weights[:, None]
        self._values = basis.psi_values
        self._derivs = basis.psi_derivs
        self._values_int = basis.psi_values[1:-1]
        self._quad_deriv = (basis.psi_derivs * w).T
        self._lu = basis.interior_interp
        lam = basis.eigenvalues
        self._lam = lam
        self._lam_tensor = lam.reshape(lam.shape + (1,) * (self.dim - 1)).copy()
        for a in range(1, self.dim):
            shape = [1] * self.dim
            shape[a] = lam.size
            self._lam_tensor = self._lam_tensor * lam.reshape(shape)

    # -- small shape helpers -------------------------------------------------

    def _check_modal(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.basis.n_modes,) * self.dim:
            raise ValueError(
                f"expected modal tensor of shape {(self.basis.n_modes,) * self.dim}, "
                f"got {x.shape}"
            )
        return x

    def _scale_lam_except(self, arr: np.ndarray, skip: int) -> np.ndarray:
        for axis in range(self.dim):
            if axis == skip:
                continue
            shape = [1] * self.dim
            shape[axis] = self._lam.size
            arr = arr * self._lam.reshape(shape)
        return arr

    def _eval_mixed(self, x: np.ndarray, axis: int, derivative: bool) -> np.ndarray:
        """Nodal values on the grid that is full along `axis`, interior elsewhere."""
        out = x
        for b in range(self.dim):
            if b == axis:
                mat = self._derivs if derivative else self._values
            else:
                mat = self._values_int
            out = apply_along_axis(mat, out, b)
        return out

    # -- forward actions -----------------------------------------------------

    def apply_mass(self, x: np.ndarray) -> np.ndarray:
        """Exact mass action: entrywise product with the eigenvalue tensor."""
        return self._lam_tensor * self._check_modal(x)

    def apply_stiffness(self, x: np.ndarray) -> np.ndarray:
        """Action of the state bilinear form, row i being a(u_x, psi_i)."""
        x = self._check_modal(x)
        out = self._reaction(x)
        for a in range(self.dim):
            field = self._alpha_mixed[a] * self._eval_mixed(x, a, derivative=True)
            if self._beta_mixed[a] is not None:
                field = field + self._beta_mixed[a] * self._eval_mixed(x, a, derivative=False)
            for b in range(self.dim):
                if b != a:
                    field = solve_along_axis(self._lu, field, b)
            term = apply_along_axis(self._quad_deriv, field, a)
            out += self._scale_lam_except(term, a)
        return out

    def apply_stiffness_transpose(self, z: np.ndarray) -> np.ndarray:
        """Exact transpose of apply_stiffness, from the transposed kernels."""
        z = self._check_modal(z)
        out = self._reaction_transpose(z)
        for a in range(self.dim):
            t = self._scale_lam_except(z, a)
            for b in range(self.dim):
                if b != a:
                    t = solve_along_axis(self._lu, t, b, trans=1)
            g = apply_along_axis(self._quad_deriv.T, t, a)
            diff = self._alpha_mixed[a] * g
            term = apply_along_axis(self._derivs.T, diff, a)
            if self._beta_mixed[a] is not None:
                conv = self._beta_mixed[a] * g
                term += apply_along_axis(self._values.T, conv, a)
            for b in range(self.dim):
                if b != a:
                    term = apply_along_axis(self._values_int.T, term, b)
            out += term
        return out

    def _reaction(self, x: np.ndarray) -> np.ndarray:
        vals = x
        for b in range(self.dim):
            vals = apply_along_axis(self._values_int, vals, b)
        vals *= self._gamma_int
        for b in range(self.dim):
            vals = solve_along_axis(self._lu, vals, b)
        return self._lam_tensor * vals

    def _reaction_transpose(self, z: np.ndarray) -> np.ndarray:
        vals = self._lam_tensor * z
        for b in range(self.dim):
            vals = solve_along_axis(self._lu, vals, b, trans=1)
        vals *= self._gamma_int
        for b in range(self.dim):
            vals = apply_along_axis(self._values_int.T, vals, b)
        return vals

    def apply_saddle(self, v: SaddleVector) -> SaddleVector:
        """Full saddle matvec: (M y + rho B^T u, B y - M u)."""
        y, u = v
        return SaddleVector(
            first=self.apply_mass(y) + self.rho * self.apply_stiffness_transpose(u),
            second=self.apply_stiffness(y) - self.apply_mass(u),
        )

    # -- dense materialization (small problems only) ---------------------------

    def assemble_dense(self, which: str = "saddle") -> np.ndarray:
        """Materialize an operator by applying it to every unit vector.

        `which` is one of "mass", "stiffness", "stiffness_t", "saddle" or
        "precond"; the result is bit-identical to column-stacked matvecs.
        Refused when the per-field mode count exceeds DENSE_SIZE_LIMIT.
        """
        m = self.basis.n_modes**self.dim
        if m > DENSE_SIZE_LIMIT:
            raise ValueError(
                f"dense assembly refused: {m} modes exceeds limit {DENSE_SIZE_LIMIT}"
            )
        shape = (self.basis.n_modes,) * self.dim
        if which == "precond":
            from .solver import FastSolver, coefficient_midpoint

            alpha_bar, gamma_bar = coefficient_midpoint(self.coefficients, self.basis.rule)
            return FastSolver(self.basis, self.dim, alpha_bar, gamma_bar, self.rho).assemble_dense()
        if which in ("mass", "stiffness", "stiffness_t"):
            apply = {
                "mass": self.apply_mass,
                "stiffness": self.apply_stiffness,
                "stiffness_t": self.apply_stiffness_transpose,
            }[which]
            cols = np.empty((m, m))
            for i in range(m):
                e = np.zeros(shape)
                e.flat[i] = 1.0
                cols[:, i] = apply(e).ravel()
            return cols
        if which == "saddle":
            cols = np.empty((2 * m, 2 * m))
            for i in range(2 * m):
                e = np.zeros(2 * m)
                e[i] = 1.0
                v = SaddleVector(e[:m].reshape(shape), e[m:].reshape(shape))
                out = self.apply_saddle(v)
                cols[:m, i] = out.first.ravel()
                cols[m:, i] = out.second.ravel()
            return cols
        raise ValueError(f"unknown dense assembly target: {which!r}")
