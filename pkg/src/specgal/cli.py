"""Command line front end: ``specgal-bench <study> --case ... --n ...``.

Writes the study's CSV to ``--out`` or stdout.  Exit codes: 0 on success,
1 when any row failed to converge, 2 on usage errors.  The environment
variable ``SPECGAL_THREADS`` caps the thread count of the underlying BLAS
and LAPACK pools; unset means all cores.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
from collections.abc import Iterator, Sequence

from .problems import CaseStudyId
from .studies import STUDY_NAMES, StudyConfig, run_study

__all__ = ["main", "build_parser"]

_CASE_NAMES = ("case1", "c1", "c2")

_STUDY_HELP = {
    "solve": "single solves with errors and residuals over an (N, rho) grid",
    "convergence": "state and control L2 errors for a list of orders",
    "iterations": "GMRES iteration counts over an (N, rho) grid",
    "spectrum": "eigenvalues of the preconditioned saddle matrix",
}


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specgal-bench",
        description="Benchmark studies for the spectral optimal-control solver.",
    )
    subparsers = parser.add_subparsers(dest="study", required=True, metavar="STUDY")
    for name in STUDY_NAMES:
        sub = subparsers.add_parser(name, help=_STUDY_HELP[name])
        sub.add_argument(
            "--case",
            required=True,
            choices=_CASE_NAMES,
            help="benchmark problem family",
        )
        sub.add_argument(
            "--dim",
            type=int,
            choices=(2, 3),
            default=None,
            help="space dimension (default: 2 for case1, 3 for c1/c2)",
        )
        sub.add_argument(
            "--n",
            required=True,
            type=_int_list,
            metavar="N[,N...]",
            help="ascending polynomial orders",
        )
        sub.add_argument(
            "--rho",
            type=_float_list,
            default=(1e-2,),
            metavar="R[,R...]",
            help="regularization weights (default 1e-2)",
        )
        sub.add_argument("--tol", type=float, default=1e-10, help="GMRES tolerance")
        sub.add_argument("--max-iter", type=int, default=100, help="GMRES iteration cap")
        sub.add_argument("--out", default=None, metavar="PATH", help="CSV path (default stdout)")
    return parser


def _resolve_case(name: str, dim: int | None) -> tuple[CaseStudyId, int | None]:
    """Map a CLI case name plus optional --dim to a case id and dim override."""
    if name == "case1":
        if dim in (None, 2):
            return CaseStudyId.CASE_I_2D, None
        return CaseStudyId.CASE_I_3D, None
    case = CaseStudyId.CASE_II_C1 if name == "c1" else CaseStudyId.CASE_II_C2
    return case, dim


def _thread_cap() -> int | None:
    raw = os.environ.get("SPECGAL_THREADS")
    if raw is None or raw == "":
        return None
    cap = int(raw)
    if cap < 1:
        raise ValueError("SPECGAL_THREADS must be a positive integer")
    return cap


@contextlib.contextmanager
def _limited_threads(cap: int | None) -> Iterator[None]:
    if cap is None:
        yield
        return
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=cap):
        yield


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help and 2 for usage errors.
        return 0 if exc.code in (None, 0) else 2

    try:
        case, dim = _resolve_case(args.case, args.dim)
        config = StudyConfig(
            study=args.study,
            case=case,
            n_list=args.n,
            rho_list=args.rho,
            dim=dim,
            tol=args.tol,
            max_iter=args.max_iter,
            output_path=args.out,
        )
        cap = _thread_cap()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    with _limited_threads(cap):
        report = run_study(config)

    if config.output_path is None:
        sys.stdout.write(report.to_csv())
    else:
        report.write(config.output_path)
    return 0 if report.all_converged else 1


if __name__ == "__main__":
    sys.exit(main())
