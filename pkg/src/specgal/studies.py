"""Benchmark studies emitting deterministic CSV reports.

Four studies cover the numerical experiments the solver exists for:

* ``convergence``: L2 errors of state and control against the manufactured
  optimum for a list of polynomial orders.
* ``solve``: single solves over an (N, rho) grid with full diagnostics.
* ``iterations``: GMRES iteration counts over an (N, rho) grid, the
  robustness view.
* ``spectrum``: eigenvalues of the densely assembled preconditioned saddle
  matrix, the clustering view.

Reports are plain CSV: comma separated, ``.`` decimal point, one header
row, LF line endings, UTF-8, floats with 17 significant digits.  For a
fixed configuration the output is byte-reproducible except for the
``seconds`` column, which measures wall time around the Krylov solve only
(setup is excluded).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import CdrOperator, SaddleVector
from .problems import (
    CaseStudyId,
    ControlProblem,
    assemble_rhs,
    l2_error,
    make_case_study,
    make_constant_case,
)
from .solver import FastSolver, KrylovStats, coefficient_midpoint, gmres_solve

__all__ = [
    "StudyConfig",
    "CsvReport",
    "run_study",
    "run_convergence_study",
    "run_solve_study",
    "run_iteration_study",
    "run_spectrum_study",
    "SPECTRUM_MODE_LIMIT",
    "CONSTANT_CASE",
]

STUDY_NAMES = ("solve", "convergence", "iterations", "spectrum")

# Extra case name accepted besides the catalogued ids: unit diffusion and
# reaction, no convection.  For it the preconditioner reproduces the operator
# exactly, which pins down the trivial rows of the iteration and spectrum
# studies.
CONSTANT_CASE = "constant"

# Hard cap on (N-1)^d for the dense eigenvalue study.
SPECTRUM_MODE_LIMIT = 4096


@dataclass(frozen=True)
class StudyConfig:
    """Validated description of one study run.

    ``dim`` may stay ``None`` to use the case's native dimension.  The
    spectrum study consumes only the first entry of ``n_list`` and
    ``rho_list``; the convergence study uses the first ``rho_list`` entry
    for every order.
    """

    study: str
    case: CaseStudyId | str
    n_list: tuple[int, ...]
    rho_list: tuple[float, ...] = (1e-2,)
    dim: int | None = None
    tol: float = 1e-10
    max_iter: int = 100
    output_path: str | None = None

    def __post_init__(self) -> None:
        if self.study not in STUDY_NAMES:
            raise ValueError(f"unknown study {self.study!r}; expected one of {STUDY_NAMES}")
        if self.case != CONSTANT_CASE:
            object.__setattr__(self, "case", CaseStudyId(self.case))
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "rho_list", tuple(float(r) for r in self.rho_list))
        if not self.n_list:
            raise ValueError("n_list must be nonempty")
        if any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise ValueError("n_list must be strictly ascending")
        if min(self.n_list) < 2:
            raise ValueError("polynomial order must be at least 2")
        if not self.rho_list:
            raise ValueError("rho_list must be nonempty")
        if any(r <= 0.0 for r in self.rho_list):
            raise ValueError("regularization weights must be positive")
        if self.tol <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.study == "spectrum":
            modes = (self.n_list[0] - 1) ** self.resolved_dim
            if modes > SPECTRUM_MODE_LIMIT:
                raise ValueError(
                    f"spectrum study needs (N-1)^d <= {SPECTRUM_MODE_LIMIT}, got {modes}"
                )

    @property
    def resolved_dim(self) -> int:
        if self.dim is not None:
            return int(self.dim)
        return 2 if self.case == CONSTANT_CASE else self.case.default_dim


@dataclass(frozen=True)
class CsvReport:
    """Header plus rows, serializable to canonical CSV bytes."""

    header: tuple[str, ...]
    rows: tuple[tuple[object, ...], ...]

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError("row width must match header width")

    @property
    def all_converged(self) -> bool:
        """False when any row carries a converged column set to False."""
        if "converged" not in self.header:
            return True
        k = self.header.index("converged")
        return all(bool(row[k]) for row in self.rows)

    def to_csv(self) -> str:
        lines = [",".join(self.header)]
        lines.extend(",".join(_format_cell(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())


def _format_cell(value: object) -> str:
    # bool is a subclass of int, so it must be matched first.
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _require(cfg: StudyConfig, study: str) -> None:
    if cfg.study != study:
        raise ValueError(f"config is for study {cfg.study!r}, not {study!r}")


def _make_problem(cfg: StudyConfig, order: int, rho: float) -> ControlProblem:
    if cfg.case == CONSTANT_CASE:
        return make_constant_case(order, cfg.resolved_dim, rho=rho)
    return make_case_study(cfg.case, order, rho, dim=cfg.dim)


def _label(problem: ControlProblem) -> str:
    return CONSTANT_CASE if problem.case is None else problem.case.label


def _solve_once(
    cfg: StudyConfig, order: int, rho: float
) -> tuple[ControlProblem, SaddleVector, KrylovStats]:
    problem = _make_problem(cfg, order, rho)
    operator = CdrOperator(problem.basis, problem.coefficients, rho)
    alpha_bar, gamma_bar = coefficient_midpoint(problem.coefficients, problem.basis.rule)
    fast = FastSolver(problem.basis, problem.dim, alpha_bar, gamma_bar, rho)
    rhs = assemble_rhs(problem)
    solution, stats = gmres_solve(
        operator.apply_saddle, fast.solve, rhs, tol=cfg.tol, max_iter=cfg.max_iter
    )
    return problem, solution, stats


def run_convergence_study(cfg: StudyConfig) -> CsvReport:
    """Errors against the exact optimum for each order in ``cfg.n_list``."""
    _require(cfg, "convergence")
    rho = cfg.rho_list[0]
    rows = []
    for order in cfg.n_list:
        problem, solution, stats = _solve_once(cfg, order, rho)
        err_y = l2_error(problem.basis, solution.first, problem.exact_y)
        err_u = l2_error(problem.basis, solution.second, problem.exact_u)
        dof = 2 * (order - 1) ** problem.dim
        rows.append(
            (
                _label(problem),
                problem.dim,
                order,
                dof,
                err_y,
                err_u,
                stats.iterations,
                stats.converged,
                stats.wall_seconds,
            )
        )
    header = ("case", "dim", "N", "dof", "err_y_l2", "err_u_l2", "iters", "converged", "seconds")
    return CsvReport(header, tuple(rows))


def run_solve_study(cfg: StudyConfig) -> CsvReport:
    """Full diagnostics for every (N, rho) pair in the config."""
    _require(cfg, "solve")
    rows = []
    for order in cfg.n_list:
        for rho in cfg.rho_list:
            problem, solution, stats = _solve_once(cfg, order, rho)
            err_y = l2_error(problem.basis, solution.first, problem.exact_y)
            err_u = l2_error(problem.basis, solution.second, problem.exact_u)
            dof = 2 * (order - 1) ** problem.dim
            rows.append(
                (
                    _label(problem),
                    problem.dim,
                    order,
                    rho,
                    dof,
                    stats.iterations,
                    stats.residual_history[-1],
                    err_y,
                    err_u,
                    stats.converged,
                    stats.wall_seconds,
                )
            )
    header = (
        "case",
        "dim",
        "N",
        "rho",
        "dof",
        "iters",
        "final_residual",
        "err_y_l2",
        "err_u_l2",
        "converged",
        "seconds",
    )
    return CsvReport(header, tuple(rows))


def run_iteration_study(cfg: StudyConfig) -> CsvReport:
    """Iteration counts over the (N, rho) grid, the robustness table."""
    _require(cfg, "iterations")
    rows = []
    for order in cfg.n_list:
        for rho in cfg.rho_list:
            problem, _, stats = _solve_once(cfg, order, rho)
            rows.append(
                (
                    _label(problem),
                    problem.dim,
                    order,
                    rho,
                    stats.iterations,
                    stats.residual_history[-1],
                    stats.converged,
                    stats.wall_seconds,
                )
            )
    header = ("case", "dim", "N", "rho", "iters", "final_residual", "converged", "seconds")
    return CsvReport(header, tuple(rows))


def run_spectrum_study(cfg: StudyConfig) -> CsvReport:
    """Eigenvalues of the preconditioned saddle matrix, sorted by real part.

    Only the first entries of ``n_list`` and ``rho_list`` are used; the
    config validation already enforces the dense size cap.
    """
    _require(cfg, "spectrum")
    order = cfg.n_list[0]
    rho = cfg.rho_list[0]
    problem = _make_problem(cfg, order, rho)
    operator = CdrOperator(problem.basis, problem.coefficients, rho)
    alpha_bar, gamma_bar = coefficient_midpoint(problem.coefficients, problem.basis.rule)
    fast = FastSolver(problem.basis, problem.dim, alpha_bar, gamma_bar, rho)

    saddle = operator.assemble_dense("saddle")
    m = saddle.shape[0] // 2
    # Closed-form inverse of the 2x2 mode blocks, applied to all columns.
    lam = fast.lam_prod.reshape(-1, 1)
    sigma = fast.sigma.reshape(-1, 1)
    det = -(lam * lam + rho * sigma * sigma)
    preconditioned = np.vstack(
        [
            (-lam * saddle[:m] - rho * sigma * saddle[m:]) / det,
            (-sigma * saddle[:m] + lam * saddle[m:]) / det,
        ]
    )
    eigenvalues = np.linalg.eigvals(preconditioned)
    order_idx = np.lexsort((eigenvalues.imag, eigenvalues.real))
    rows = tuple((float(e.real), float(e.imag)) for e in eigenvalues[order_idx])
    return CsvReport(("re", "im"), rows)


_RUNNERS = {
    "convergence": run_convergence_study,
    "solve": run_solve_study,
    "iterations": run_iteration_study,
    "spectrum": run_spectrum_study,
}


def run_study(cfg: StudyConfig) -> CsvReport:
    """Dispatch to the runner named by ``cfg.study``."""
    return _RUNNERS[cfg.study](cfg)
