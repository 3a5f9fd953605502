"""speclab command line.

Exit codes: 0 pass, 1 check failed, 2 usage or parse error, 3 enumeration
cap or tower collision.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from fractions import Fraction

import numpy as np

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


def write_atomic(path: str, lines) -> None:
    """Write lines to ``path`` through a temp file in the same directory and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".speclab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(path: str):
    from .specfile import read_spec

    return read_spec(path)


def cmd_check_pair(args) -> int:
    from .hadamard import level_triple

    spec = _load(args.spec).to_sequence()
    t = level_triple(spec.level(args.k), args.tol)
    print(t.describe())
    return EXIT_OK if t.verified else EXIT_FAIL


def cmd_lattice(args) -> int:
    from .hadamard import theorem11_check

    rep = theorem11_check(_load(args.spec).to_sequence(), args.K)
    if args.out:
        from .hadamard import LatticeReport

        write_atomic(args.out, LatticeReport(rep.rows, rep.partial_sum, rep.declared_tail).csv_rows())
    print(rep.verdict)
    print(f"excess partial sum = {rep.partial_sum}" + (f", declared tail <= {rep.declared_tail}" if rep.declared_tail is not None else ""))
    return EXIT_OK if rep.holds else EXIT_FAIL


def cmd_verify_spectrum(args) -> int:
    from .hadamard import level_triple
    from .measure_lab import finite_convolution
    from .spectrum_verify import Spectrum, check_orthogonality, check_parseval, random_grid, tower_spectrum

    spec = _load(args.spec).to_sequence()
    mu = finite_convolution(spec, args.n)
    if args.spectrum:
        with open(args.spectrum, encoding="utf-8") as fh:
            Lam = Spectrum.from_csv(fh.read())
    else:
        Lam = tower_spectrum([level_triple(spec.level(k)) for k in range(1, args.n + 1)], args.n)
    grid = random_grid(spec.d, args.grid, args.seed)
    ortho = check_orthogonality(mu, Lam, args.tol)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pars = check_parseval(mu, Lam, grid)
    if args.out:
        write_atomic(args.out, pars.csv_rows(grid))
    print(f"atoms={len(mu)} spectrum={len(Lam)} ({Lam.provenance})")
    print(f"orthogonality max modulus = {ortho.worst_modulus:.3e}")
    print(f"parseval maxDefect = {pars.max_defect:.3e}")
    ok = ortho.worst_modulus <= args.tol and pars.max_defect <= args.tol
    return EXIT_OK if ok else EXIT_FAIL


def cmd_dims(args) -> int:
    from .fractal_dim import dim_formula

    rep = dim_formula(_load(args.spec).to_moran(), args.K, args.window, keep_all=bool(args.out))
    if args.out:
        write_atomic(args.out, rep.csv_rows())
    print(f"window={rep.window} liminf~{rep.window_liminf:.12f} limsup~{rep.window_limsup:.12f}")
    if rep.box_count_agreement is not None:
        print(f"box-count agreement: {rep.box_count_agreement}")
    return EXIT_OK if rep.box_count_agreement is not False else EXIT_FAIL


def cmd_equipositivity(args) -> int:
    from .equipositivity import n0_threshold, verify_tail_positivity
    from .hadamard import PreconditionViolated
    from .spectrum_verify import random_grid

    spec = _load(args.spec).to_sequence()
    grid = random_grid(spec.d, args.grid, args.seed) * (4 / 3) - 2 / 3
    grid = np.clip(grid, -2 / 3, 2 / 3)
    print(f"n0 (checked to k={args.n + args.K}) = {n0_threshold(spec, args.n + args.K)}")
    try:
        rep = verify_tail_positivity(spec, args.n, args.K, grid)
    except PreconditionViolated as e:
        print(f"precondition violated: {e}")
        return EXIT_FAIL
    if args.out:
        write_atomic(args.out, rep.csv_rows(grid))
    cond = "" if rep.tail_declared else " (conditional on zero excess beyond the prefix)"
    print(f"gridMin = {rep.grid_min:.12f}, epsilon = {rep.epsilon:.12f}{cond}")
    print("ok" if rep.ok else "FAIL")
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_construct(args) -> int:
    from .constructions import TargetDims, far_digit_certificate, make_family
    from .hadamard import theorem11_check
    from .specfile import family_document, format_spec

    t = TargetDims(args.d, Fraction(args.alpha), Fraction(args.beta))
    params = {"alpha": t.alpha, "beta": t.beta, "d": t.d}
    doc = family_document(args.family, params)
    write_atomic(args.out, format_spec(doc).splitlines())
    rep = theorem11_check(make_family(args.family, params), args.check_K)
    print(rep.verdict)
    ok = rep.holds
    if args.family == "noncompact":
        certs = far_digit_certificate(t, args.check_K)
        good = all(c[3] and c[4] for c in certs)
        print(f"far-digit residue and norm certificates for k<={args.check_K}: {'ok' if good else 'FAIL'}")
        ok = ok and good
    return EXIT_OK if ok else EXIT_FAIL


def cmd_counterexample(args) -> int:
    from .constructions import ScheduleFailure, counterexample_inequalities, counterexample_prefix

    try:
        p = counterexample_prefix(args.K)
    except ScheduleFailure as e:
        print(str(e))
        return EXIT_FAIL
    if args.out:
        write_atomic(args.out, p.csv_rows())
    rep = counterexample_inequalities(p)
    print(f"{len(rep.checks)} exact checks, {len(rep.failures())} failed")
    for k, name in rep.failures():
        print(f"  k={k}: {name}")
    print("theorem-backed, not finitely certified: " + "; ".join(rep.theorem_backed))
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_sample(args) -> int:
    from .measure_lab import sample

    spec = _load(args.spec).to_sequence()
    X = sample(spec, args.K, args.count, args.seed)
    header = ",".join(f"x_{i + 1}" for i in range(spec.d))
    write_atomic(args.out, [header] + [",".join(repr(float(v)) for v in row) for row in X])
    if len(X):
        print("mean = " + ", ".join(f"{v:.6f}" for v in X.mean(axis=0)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="speclab", description="Spectral measure construction and verification toolkit.")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("check-pair", help="verify the Hadamard triple of one level")
    s.add_argument("--spec", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.set_defaults(func=cmd_check_pair)

    s = sub.add_parser("lattice", help="per-level lattice hypotheses report")
    s.add_argument("--spec", required=True)
    s.add_argument("--K", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_lattice)

    s = sub.add_parser("verify-spectrum", help="orthogonality and Parseval for mu_n and a spectrum")
    s.add_argument("--spec", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--grid", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--spectrum", help="CSV of spectrum points instead of the tower")
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify_spectrum)

    s = sub.add_parser("dims", help="dimension ratio sequence with window estimates")
    s.add_argument("--spec", required=True)
    s.add_argument("--K", type=int, required=True)
    s.add_argument("--window", type=int, default=100)
    s.add_argument("--out")
    s.set_defaults(func=cmd_dims)

    s = sub.add_parser("equipositivity", help="certified lower bound of the tail transform")
    s.add_argument("--spec", required=True)
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--K", type=int, default=20)
    s.add_argument("--grid", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_equipositivity)

    s = sub.add_parser("construct", help="write a compact or non-compact family spec")
    s.add_argument("--family", choices=("compact", "noncompact"), required=True)
    s.add_argument("--alpha", required=True)
    s.add_argument("--beta", required=True)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--out", required=True)
    s.add_argument("--check-K", dest="check_K", type=int, default=20)
    s.set_defaults(func=cmd_construct)

    s = sub.add_parser("counterexample", help="exact prefix of the non-closed sum example")
    s.add_argument("--K", type=int, default=8)
    s.add_argument("--out")
    s.set_defaults(func=cmd_counterexample)

    s = sub.add_parser("sample", help="Monte Carlo samples of the truncated random series")
    s.add_argument("--spec", required=True)
    s.add_argument("--K", type=int, required=True)
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)
    return p


def main(argv=None) -> int:
    from .constructions import ScheduleFailure
    from .sequence import CapExceeded
    from .specfile import SpecParseError
    from .spectrum_verify import CollisionError, UnverifiedTriple

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecParseError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (CapExceeded, CollisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except (UnverifiedTriple, ScheduleFailure) as e:
        print(f"check failed: {e}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, IndexError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
