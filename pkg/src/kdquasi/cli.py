"""Command-line front end.

Exit codes:
    0  success
    1  a verification report failed
    2  unreadable input file or bad arguments
    3  the two observables have a vanishing eigenvector overlap
    4  the state file is not a density matrix
    5  the state gives zero weight to an eigenvector of B (try --regularize)
    6  an observable file is not Hermitian or has a degenerate spectrum
    7  the frame is not a basis (singular Gram matrix)
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import condexp as ce
from . import frames as fr
from . import quasiprob as qp
from .errors import (
    DegenerateSpectrum,
    DimensionMismatch,
    NotHermitian,
    NotInDB,
    NotPositive,
    SingularGram,
    TraceNotOne,
    VanishingOverlap,
)
from .operators import (
    Observable,
    make_density,
    random_density,
    random_observable,
    spectral_decompose,
)
from .verify import DEFAULT_ALPHAS, SUITES, run_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_PARSE = 2
EXIT_OVERLAP = 3
EXIT_DENSITY = 4
EXIT_NOT_IN_DB = 5
EXIT_OBSERVABLE = 6
EXIT_SINGULAR = 7


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- MatrixFile I/O ---------------------------------------------------------

def read_matrix(path: str | Path) -> np.ndarray:
    """Parse a ``{"dim": d, "data": [[re, im], ...]}`` file (row-major)."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        d = doc["dim"]
        data = doc["data"]
        if not isinstance(d, int) or isinstance(d, bool) or d < 1:
            raise ValueError(f"dim must be a positive integer, got {d!r}")
        if len(data) != d * d:
            raise ValueError(f"expected {d * d} entries for dim {d}, got {len(data)}")
        entries = []
        for entry in data:
            if len(entry) != 2:
                raise ValueError(f"entry {entry!r} is not an [re, im] pair")
            re, im = (float(v) for v in entry)
            if not (math.isfinite(re) and math.isfinite(im)):
                raise ValueError(f"entry {entry!r} is not finite")
            entries.append(complex(re, im))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from exc
    return np.array(entries, dtype=complex).reshape(d, d)


def matrix_doc(M: np.ndarray) -> dict:
    M = np.asarray(M, dtype=complex)
    return {"dim": int(M.shape[0]),
            "data": [[float(z.real), float(z.imag)] for z in M.ravel()]}


def write_matrix(path: str | Path, M: np.ndarray) -> None:
    Path(path).write_text(json.dumps(matrix_doc(M)) + "\n", encoding="utf-8")


# -- loading with exit-code mapping ----------------------------------------

def load_observable(path: str, tol: float) -> Observable:
    M = read_matrix(path)
    try:
        return spectral_decompose(M, tol_herm=tol)
    except (NotHermitian, DegenerateSpectrum) as exc:
        raise CliError(EXIT_OBSERVABLE, f"{path}: {exc}") from exc


def load_density(path: str, tol: float):
    M = read_matrix(path)
    try:
        return make_density(M, tol_herm=tol, tol_psd=tol, tol_num=tol)
    except (NotHermitian, NotPositive, TraceNotOne) as exc:
        raise CliError(EXIT_DENSITY, f"{path}: {exc}") from exc


def load_pair(a_path: str, b_path: str, tol: float) -> fr.ObservablePair:
    A = load_observable(a_path, tol)
    B = load_observable(b_path, tol)
    try:
        return fr.check_pair(A, B)
    except VanishingOverlap as exc:
        raise CliError(EXIT_OVERLAP, str(exc)) from exc
    except DimensionMismatch as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc


def label(obs: Observable, k: int) -> str:
    return f"{k}:{obs.eigenvalues[k]:.12g}"


def cnum(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def emit(doc: dict, rows: list[tuple], fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        out.write(buf.getvalue())


# -- subcommands -----------------------------------------------------------

def cmd_kd(args, out) -> int:
    pair = load_pair(args.a_file, args.b_file, args.tol)
    rho = load_density(args.rho_file, args.tol)
    if rho.dim != pair.dim:
        raise CliError(EXIT_PARSE, "state and observables differ in dimension")
    dist = qp.kd_distribution(pair, rho, args.side)
    over_a, over_b = qp.marginals(dist)
    A, B = pair.A, pair.B
    d = pair.dim
    table = [{"a": label(A, i), "b": label(B, j), "value": cnum(dist.values[i, j])}
             for i in range(d) for j in range(d)]
    doc = {
        "side": args.side,
        "table": table,
        "marginal_over_a": [{"b": label(B, j), "value": cnum(over_a[j])} for j in range(d)],
        "marginal_over_b": [{"a": label(A, i), "value": cnum(over_b[i])} for i in range(d)],
    }
    rows = [("a_label", "b_label", "re", "im")]
    rows += [(t["a"], t["b"], *t["value"]) for t in table]
    rows += [("", m["b"], *m["value"]) for m in doc["marginal_over_a"]]
    rows += [(m["a"], "", *m["value"]) for m in doc["marginal_over_b"]]
    emit(doc, rows, args.format, out)
    return EXIT_OK


def cmd_condexp(args, out) -> int:
    X = read_matrix(args.x_file)
    B = load_observable(args.b_file, args.tol)
    rho = load_density(args.rho_file, args.tol)
    if not (X.shape[0] == B.dim == rho.dim):
        raise CliError(EXIT_PARSE, "X, B and rho differ in dimension")
    try:
        kind = ce.parse_kind(args.kind, args.alpha)
    except ValueError as exc:
        raise CliError(EXIT_PARSE, str(exc)) from exc
    if args.regularize is not None:
        rho = ce.regularize(rho, B, args.regularize)
    try:
        E = ce.cond_exp_closed(X, B, rho, kind)
        oracle = ce.minimize_oracle(X, B, rho, kind) if args.check else None
    except NotInDB as exc:
        raise CliError(EXIT_NOT_IN_DB, f"{exc} (pass --regularize EPS)") from exc
    doc = {
        "kind": str(kind),
        "coeffs": [{"y": label(B, k), "value": cnum(E.coeffs[k])} for k in range(B.dim)],
        "matrix": matrix_doc(E.matrix),
    }
    if oracle is not None:
        doc["oracle_disagreement"] = float(np.max(np.abs(oracle.coeffs - E.coeffs)))
    rows = [("y_label", "re", "im")]
    rows += [(c["y"], *c["value"]) for c in doc["coeffs"]]
    emit(doc, rows, args.format, out)
    return EXIT_OK


def cmd_dual(args, out) -> int:
    pair = load_pair(args.a_file, args.b_file, args.tol)
    frame = fr.mix_frames(fr.kd_frame(pair, "left"), fr.kd_frame(pair, "right"), args.alpha)
    try:
        solved = fr.dual_frame(frame)
    except SingularGram as exc:
        raise CliError(EXIT_SINGULAR, str(exc)) from exc
    c1, c2 = fr.frame_bounds(frame)
    d = pair.dim
    doc = {
        "alpha": args.alpha,
        "frame_bounds": [c1, c2],
        "biorthogonality_residual": fr.biorthogonality_residual(solved),
        "born_compatible": fr.is_born_compatible(frame, args.tol),
        "dual": [{"a": label(pair.A, i), "b": label(pair.B, j),
                  "matrix": matrix_doc(solved.dual[i, j])}
                 for i in range(d) for j in range(d)],
    }
    if args.alpha in (0.0, 1.0):
        closed = fr.kd_frame(pair, "left" if args.alpha == 1.0 else "right").dual
        doc["closed_form_deviation"] = float(
            np.max(np.linalg.norm(solved.dual - closed, axis=(2, 3))))
    rows = [("a_label", "b_label", "row", "col", "re", "im")]
    for i in range(d):
        for j in range(d):
            for r in range(d):
                for c in range(d):
                    z = solved.dual[i, j, r, c]
                    rows.append((label(pair.A, i), label(pair.B, j), r, c,
                                 float(z.real), float(z.imag)))
    emit(doc, rows, args.format, out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    if args.trials < 1:
        raise CliError(EXIT_PARSE, "--trials must be at least 1")
    if not 2 <= args.dim <= 8:
        raise CliError(EXIT_PARSE, "--dim must lie in [2, 8]")
    try:
        alphas = tuple(float(a) for a in args.alphas.split(",")) if args.alphas else DEFAULT_ALPHAS
    except ValueError as exc:
        raise CliError(EXIT_PARSE, f"bad --alphas: {exc}") from exc
    if any(not 0.0 <= a <= 1.0 for a in alphas):
        raise CliError(EXIT_PARSE, "--alphas must lie in [0, 1]")
    try:
        reports = run_suite(args.suite, args.dim, args.trials, args.seed, alphas)
    except SingularGram as exc:
        raise CliError(EXIT_SINGULAR, f"{exc} (an alpha mixture is not a frame)") from exc
    all_passed = all(r.passed for r in reports)
    doc = {"suite": args.suite, "dim": args.dim, "trials": args.trials, "seed": args.seed,
           "all_passed": all_passed, "reports": [r.to_dict() for r in reports]}
    rows = [("theorem", "instances", "seed", "max_residual", "min_violation", "passed")]
    rows += [(r.theorem, r.instances, r.seed, r.max_residual, r.min_violation, r.passed)
             for r in reports]
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            emit(doc, rows, args.format, fh)
    for r in reports:
        out.write(f"{'PASS' if r.passed else 'FAIL'} {r.theorem} "
                  f"max_residual={r.max_residual!r} min_violation={r.min_violation!r}\n")
    return EXIT_OK if all_passed else EXIT_VERIFY_FAILED


def cmd_random(args, out) -> int:
    if args.dim < 2:
        raise CliError(EXIT_PARSE, "--dim must be at least 2")
    if args.what == "density":
        M = random_density(args.dim, args.seed).matrix
    else:
        M = random_observable(args.dim, np.random.default_rng(args.seed)).matrix
    if args.out:
        write_matrix(args.out, M)
    else:
        out.write(json.dumps(matrix_doc(M)) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--regularize", type=float, default=None, metavar="EPS")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = argparse.ArgumentParser(
        prog="kdquasi",
        description="Kirkwood-Dirac quasiprobabilities and quantum conditional expectations.",
        epilog=__doc__.split("\n\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kd", parents=[common], help="KD distribution table and marginals")
    p.add_argument("a_file")
    p.add_argument("b_file")
    p.add_argument("rho_file")
    p.add_argument("--side", choices=("left", "right"), default="left")
    p.set_defaults(func=cmd_kd)

    p = sub.add_parser("condexp", parents=[common], help="conditional expectation of X given B")
    p.add_argument("x_file")
    p.add_argument("b_file")
    p.add_argument("rho_file")
    p.add_argument("--kind", choices=("left", "right", "alpha"), default="left")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--check", action="store_true", help="cross-check against the least-squares oracle")
    p.set_defaults(func=cmd_condexp)

    p = sub.add_parser("dual", parents=[common], help="solve the dual of a mixed KD frame")
    p.add_argument("a_file")
    p.add_argument("b_file")
    p.add_argument("--alpha", type=float, default=1.0,
                   help="weight of the left KD frame (1 = left, 0 = right)")
    p.set_defaults(func=cmd_dual)

    p = sub.add_parser("verify", parents=[common], help="run the randomized theorem checks")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--dim", "-d", type=int, default=2)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--alphas", default=None,
                   help="comma-separated mixing weights; the default skips 0.5, "
                        "where the mixture is never a frame for d = 2")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("random", parents=[common], help="write a seeded fixture file")
    p.add_argument("what", choices=("observable", "density"))
    p.add_argument("--dim", "-d", type=int, default=2)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_random)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args, out)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
