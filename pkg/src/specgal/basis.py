r"""Legendre-Gauss-Lobatto quadrature and a mass-diagonalized modal basis.

The discretization lives on the reference interval [-1, 1].  An order-N rule
carries the N+1 Lobatto nodes (roots of (1-x^2) L_N'(x)) and weights that
integrate polynomials of degree <= 2N-1 exactly.

Interior trial functions are the boundary-vanishing combinations

    phi_j(x) = c_j (L_j(x) - L_{j+2}(x)),   c_j = 1/sqrt(4j+6),   j = 0..N-2,

whose derivative Gram matrix is the identity and whose mass matrix is
pentadiagonal with decoupled even/odd parts.  Rotating by the orthonormal
eigenvectors Q of that mass matrix gives the working basis

    psi_k = sum_j Q[j, k] phi_j,

which is simultaneously orthogonal in both senses:

    <psi_i, psi_j> = lam_j delta_ij,    <psi_i', psi_j'> = delta_ij.

Those two exact relations are what make the tensor-product saddle-point
preconditioner diagonalizable mode by mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal, lu_factor, lu_solve

__all__ = [
    "LglRule",
    "Basis1D",
    "compute_lgl_rule",
    "build_basis",
    "forward_transform",
    "backward_transform",
    "inner_products",
]

_NEWTON_TOL = 1e-14
_NEWTON_MAX_STEPS = 100


def legendre_table(degree: int, x: np.ndarray, nderiv: int = 0) -> np.ndarray:
    """Tabulate Legendre polynomials L_0..L_degree at the points x.

    Returns an array of shape (nderiv+1, degree+1, len(x)) holding values,
    then first and second derivatives as requested (nderiv <= 2).  All three
    follow stable three-term recurrences, so the table is usable at the
    endpoints as well as in the interior.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if not 0 <= nderiv <= 2:
        raise ValueError("nderiv must be 0, 1 or 2")
    x = np.asarray(x, dtype=float)
    out = np.zeros((nderiv + 1, degree + 1, x.size))
    out[0, 0] = 1.0
    if degree >= 1:
        out[0, 1] = x
        if nderiv >= 1:
            out[1, 1] = 1.0
    for j in range(1, degree):
        # (j+1) L_{j+1} = (2j+1) x L_j - j L_{j-1}, differentiated in turn:
        # L'_{j+1} = L'_{j-1} + (2j+1) L_j and L''_{j+1} = L''_{j-1} + (2j+1) L'_j.
        out[0, j + 1] = ((2 * j + 1) * x * out[0, j] - j * out[0, j - 1]) / (j + 1)
        if nderiv >= 1:
            out[1, j + 1] = out[1, j - 1] + (2 * j + 1) * out[0, j]
        if nderiv >= 2:
            out[2, j + 1] = out[2, j - 1] + (2 * j + 1) * out[1, j]
    return out


@dataclass
class LglRule:
    """Lobatto quadrature rule of a given order N (N+1 nodes, ascending)."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray


def compute_lgl_rule(order: int) -> LglRule:
    """Compute the Legendre-Gauss-Lobatto rule of the given order.

    Interior nodes are found by Newton iteration on (1-x^2) L_N'(x), whose
    derivative collapses to -N(N+1) L_N(x); Chebyshev-Lobatto points serve as
    initial guesses.  Weights are 2 / (N (N+1) L_N(x_j)^2).
    """
    if order < 1:
        raise ValueError("quadrature order must be at least 1")
    n = order
    nodes = -np.cos(np.pi * np.arange(n + 1) / n)
    if n > 1:
        x = nodes[1:-1].copy()
        for _ in range(_NEWTON_MAX_STEPS):
            tab = legendre_table(n, x)
            ln, lnm1 = tab[0, n], tab[0, n - 1]
            dx = (x * ln - lnm1) / ((n + 1) * ln)
            x -= dx
            if np.max(np.abs(dx)) <= _NEWTON_TOL:
                break
        else:
            raise RuntimeError("Newton iteration for Lobatto nodes did not converge")
        nodes[1:-1] = x
    # The node set is symmetric about 0; enforce it exactly.
    nodes = 0.5 * (nodes - nodes[::-1])
    ln = legendre_table(n, nodes)[0, n]
    weights = 2.0 / (n * (n + 1) * ln**2)
    return LglRule(order=order, nodes=nodes, weights=weights)


def _compact_mass_bands(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and second-superdiagonal of the phi-basis mass matrix."""
    j = np.arange(order - 1)
    c = 1.0 / np.sqrt(4.0 * j + 6.0)
    diag = c**2 * (2.0 / (2 * j + 1) + 2.0 / (2 * j + 5))
    # <phi_j, phi_{j+2}> couples only through the shared L_{j+2} term.
    off = -c[:-2] * c[2:] * (2.0 / (2 * j[:-2] + 5)) if order >= 4 else np.empty(0)
    return diag, off


def _mass_eigenbasis(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of the phi mass matrix.

    The matrix decouples into even- and odd-indexed tridiagonal blocks, which
    are solved separately; the zero pattern of the merged eigenvectors is then
    exact.  Signs are fixed so each column's first significant entry is
    positive, making Q deterministic.
    """
    m = order - 1
    diag, off = _compact_mass_bands(order)
    vals = np.empty(m)
    vecs = np.zeros((m, m))
    col = 0
    for parity in (0, 1):
        idx = np.arange(parity, m, 2)
        if idx.size == 0:
            continue
        if idx.size == 1:
            w, v = diag[idx], np.ones((1, 1))
        else:
            w, v = eigh_tridiagonal(diag[idx], off[idx[:-1]])
        vals[col : col + idx.size] = w
        vecs[np.ix_(idx, np.arange(col, col + idx.size))] = v
        col += idx.size
    perm = np.argsort(vals, kind="stable")
    vals = vals[perm]
    vecs = vecs[:, perm]
    for k in range(m):
        column = vecs[:, k]
        lead = np.flatnonzero(np.abs(column) > 1e-8 * np.abs(column).max())[0]
        if column[lead] < 0:
            vecs[:, k] = -column
    return vals, vecs


@dataclass
class Basis1D:
    """Order-N modal basis tabulated on its own Lobatto grid.

    Attributes
    ----------
    order : int
        Polynomial order N; the basis has N-1 interior modes.
    rule : LglRule
        The order-N Lobatto rule the tables are sampled on.
    eigenvalues : ndarray, shape (N-1,)
        Mass eigenvalues lam_k, ascending and strictly positive.
    eigenvectors : ndarray, shape (N-1, N-1)
        Orthogonal rotation Q from the compact Legendre combinations.
    psi_values, psi_derivs : ndarray, shape (N+1, N-1)
        Basis (and derivative) values at the nodes; boundary rows of
        psi_values are exactly zero.
    interior_interp : tuple
        LU factorization of psi_values restricted to interior nodes,
        reused by every backward transform.
    """

    order: int
    rule: LglRule
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    psi_values: np.ndarray
    psi_derivs: np.ndarray
    interior_interp: tuple

    @property
    def n_modes(self) -> int:
        return self.order - 1

    def evaluate(self, x: np.ndarray, deriv: int = 0) -> np.ndarray:
        """Tabulate the basis (or a derivative) at arbitrary points.

        Returns an array of shape (len(x), N-1) with entry [m, k] equal to
        the deriv-th derivative of psi_k at x[m].
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        tab = legendre_table(self.order, x, nderiv=deriv)[deriv]
        j = np.arange(self.order - 1)
        c = 1.0 / np.sqrt(4.0 * j + 6.0)
        phi = c[:, None] * (tab[: self.order - 1] - tab[2 : self.order + 1])
        return phi.T @ self.eigenvectors


def build_basis(order: int) -> Basis1D:
    """Build the order-N basis: rule, mass eigenpairs, node tables, LU."""
    if order < 2:
        raise ValueError("basis order must be at least 2")
    rule = compute_lgl_rule(order)
    vals, vecs = _mass_eigenbasis(order)
    tab = legendre_table(order, rule.nodes, nderiv=1)
    j = np.arange(order - 1)
    c = 1.0 / np.sqrt(4.0 * j + 6.0)
    phi = c[:, None] * (tab[0, : order - 1] - tab[0, 2 : order + 1])
    dphi = c[:, None] * (tab[1, : order - 1] - tab[1, 2 : order + 1])
    psi_values = phi.T @ vecs
    psi_values[0] = 0.0
    psi_values[-1] = 0.0
    psi_derivs = dphi.T @ vecs
    lu = lu_factor(psi_values[1:-1])
    return Basis1D(
        order=order,
        rule=rule,
        eigenvalues=vals,
        eigenvectors=vecs,
        psi_values=psi_values,
        psi_derivs=psi_derivs,
        interior_interp=lu,
    )


def apply_along_axis(mat: np.ndarray, arr: np.ndarray, axis: int) -> np.ndarray:
    """Contract `mat` with one axis of `arr` (a 1D transform on that axis)."""
    moved = np.moveaxis(arr, axis, 0)
    flat = moved.reshape(moved.shape[0], -1)
    out = (mat @ flat).reshape((mat.shape[0],) + moved.shape[1:])
    return np.moveaxis(out, 0, axis)


def solve_along_axis(lu: tuple, arr: np.ndarray, axis: int, trans: int = 0) -> np.ndarray:
    """Apply a stored LU solve (optionally transposed) along one axis."""
    moved = np.moveaxis(arr, axis, 0)
    flat = moved.reshape(moved.shape[0], -1)
    out = lu_solve(lu, flat, trans=trans).reshape(moved.shape)
    return np.moveaxis(out, 0, axis)


def _check_modal_shape(basis: Basis1D, arr: np.ndarray) -> None:
    if arr.ndim < 1 or arr.ndim > 3:
        raise ValueError("modal tensors must have 1 to 3 axes")
    if any(s != basis.n_modes for s in arr.shape):
        raise ValueError(
            f"modal tensor axes must all have length {basis.n_modes}, got {arr.shape}"
        )


def forward_transform(
    basis: Basis1D, coeffs: np.ndarray, derivative_axis: int | None = None
) -> np.ndarray:
    """Evaluate a modal tensor on the full tensor grid.

    With `derivative_axis` set, the derivative table replaces the value table
    on that axis, yielding nodal values of the corresponding partial
    derivative.  Output shape is (N+1,)^d.
    """
    arr = np.asarray(coeffs, dtype=float)
    _check_modal_shape(basis, arr)
    for axis in range(arr.ndim):
        mat = basis.psi_derivs if axis == derivative_axis else basis.psi_values
        arr = apply_along_axis(mat, arr, axis)
    return arr


def backward_transform(basis: Basis1D, interior_values: np.ndarray) -> np.ndarray:
    """Recover modal coefficients from values at the interior tensor grid.

    The input has shape (N-1,)^d: values at the interior Lobatto nodes along
    every axis.  Each axis is solved against the stored collocation LU.
    """
    arr = np.asarray(interior_values, dtype=float)
    _check_modal_shape(basis, arr)
    for axis in range(arr.ndim):
        arr = solve_along_axis(basis.interior_interp, arr, axis)
    return arr


def inner_products(
    basis: Basis1D, nodal_values: np.ndarray, derivative_axis: int | None = None
) -> np.ndarray:
    """Quadrature inner products of a nodal field with every basis function.

    Entry k of the result approximates <w, psi_k> by the Lobatto rule (or
    pairs against the derivative table on `derivative_axis`).  Input shape is
    (N+1,)^d, output (N-1,)^d.
    """
    arr = np.asarray(nodal_values, dtype=float)
    if arr.ndim < 1 or arr.ndim > 3:
        raise ValueError("nodal tensors must have 1 to 3 axes")
    if any(s != basis.order + 1 for s in arr.shape):
        raise ValueError(
            f"nodal tensor axes must all have length {basis.order + 1}, got {arr.shape}"
        )
    w = basis.rule.weights[:, None]
    for axis in range(arr.ndim):
        tab = basis.psi_derivs if axis == derivative_axis else basis.psi_values
        arr = apply_along_axis((tab * w).T, arr, axis)
    return arr
