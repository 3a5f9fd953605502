"""Admissible pairs, Hadamard triples and nearly d-th power lattice checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np

from .exact_linalg import (
    AmbiguousResidues,
    Mat,
    cube_in_image,
    cube_points,
    entries_multiple_of,
    invert,
    residue_equal,
)
from .sequence import DigitSet, Level, SequenceSpec

UNITARY_TOL = 1e-10


class PreconditionViolated(ValueError):
    pass


class SizeMismatch(ValueError):
    pass


def canonical_dual(R: Mat, m: int) -> DigitSet:
    """L = (1/m) R^T {0, ..., m-1}^d, integral when m divides every entry of R."""
    if not R.is_integer() or not entries_multiple_of(R, m):
        raise PreconditionViolated(f"entries of {R} are not all multiples of {m}")
    c = R.scalar_value()
    if c is not None:
        return DigitSet.power([c / m * j for j in range(m)], R.d)
    RT = R.T
    return DigitSet([tuple(x / m for x in RT @ v) for v in cube_points(m, R.d)])


def _exact_side(B: DigitSet, m: int, R: Mat) -> bool:
    """B ≡ {0, ..., m-1}^d (mod R Z^d), with a per-coordinate path for c*I and product B."""
    c = R.scalar_value()
    if c is not None and B.factors is not None and c.denominator == 1 and c != 0:
        N = abs(int(c))
        base = [j % N for j in range(m)]
        if len(set(base)) != m:
            raise AmbiguousResidues(f"{{0..{m - 1}}} has repeated residues mod {N}")
        for f in B.factors:
            if any(x.denominator != 1 for x in f):
                return False
            if sorted(int(x) % N for x in f) != sorted(base):
                return False
        return True
    return residue_equal(list(B), cube_points(m, R.d), R)


def cube_side(n: int, d: int) -> int | None:
    """The m with m^d == n, or None."""
    root, exact = gmpy2.iroot(n, d)
    return int(root) if exact else None


def unitary_defect(R: Mat, B: DigitSet, L: DigitSet):
    """Max deviation of H^* H from the identity for H = [e^{-2πi<R^{-1}b,l>}/sqrt(#B)].

    Phases are reduced modulo 1 in exact arithmetic before conversion to
    float.  Returns (defect, (i, j)) with the worst column pair.
    """
    Bp, Lp = B.points(), L.points()
    n = len(Bp)
    if n != len(Lp):
        raise SizeMismatch(f"#B = {n} but #L = {len(Lp)}")
    R_inv = invert(R)
    Rb = [R_inv @ b for b in Bp]
    phase = np.empty((n, n))
    for i, u in enumerate(Rb):
        for j, l in enumerate(Lp):
            t = sum((a * b for a, b in zip(u, l)), Fraction(0))
            phase[i, j] = float(t - math.floor(t))
    H = np.exp(-2j * np.pi * phase) / math.sqrt(n)
    G = H.conj().T @ H
    dev = np.abs(G - np.eye(n))
    idx = np.unravel_index(int(np.argmax(dev)), dev.shape)
    return float(dev[idx]), (int(idx[0]), int(idx[1]))


@dataclass(frozen=True)
class HadamardTriple:
    R: Mat
    B: DigitSet
    L: DigitSet
    status: str  # "exact" | "numeric_pass" | "fail"
    defect: float | None = None
    witness: tuple | None = None

    @property
    def verified(self) -> bool:
        return self.status != "fail"

    def describe(self) -> str:
        if self.status == "exact":
            return "ExactByConstruction"
        if self.status == "numeric_pass":
            return f"NumericPass(maxDefect={self.defect:.3e})"
        return f"Fail(defect={self.defect:.3e}, columns={self.witness})"


def exact_admissible(R: Mat, B: DigitSet, L: DigitSet) -> int | None:
    """The m certifying (R, B, L) through the lattice construction, else None."""
    if not R.is_integer() or not B.is_integer():
        return None
    m = cube_side(len(B), R.d)
    if m is None or m < 1 or not entries_multiple_of(R, m):
        return None
    try:
        if not _exact_side(B, m, R):
            return None
    except AmbiguousResidues:
        return None
    return m if canonical_dual(R, m) == L else None


def check_unitary(R: Mat, B: DigitSet, L: DigitSet, tol: float = UNITARY_TOL) -> HadamardTriple:
    if len(B) != len(L):
        raise SizeMismatch(f"#B = {len(B)} but #L = {len(L)}")
    invert(R)
    if exact_admissible(R, B, L) is not None:
        return HadamardTriple(R, B, L, "exact")
    defect, worst = unitary_defect(R, B, L)
    status = "numeric_pass" if defect <= tol else "fail"
    return HadamardTriple(R, B, L, status, defect, None if status != "fail" else worst)


def level_triple(level: Level, tol: float = UNITARY_TOL) -> HadamardTriple:
    """Hadamard triple for one level, defaulting L to the canonical dual."""
    L = level.L
    if L is None:
        if level.m is None:
            raise PreconditionViolated("level has neither L nor m")
        L = canonical_dual(level.R, level.m)
    return check_unitary(level.R, level.B, L, tol)


@dataclass(frozen=True)
class LevelCheck:
    k: int
    m_ok: bool
    divisible_ok: bool
    cube_ok: bool
    residue_ok: bool
    excess_count: int
    excess_ratio: Fraction

    @property
    def ok(self) -> bool:
        return self.m_ok and self.divisible_ok and self.cube_ok and self.residue_ok


def check_level(k: int, level: Level) -> LevelCheck:
    m, R, B = level.m, level.R, level.B
    m_ok = m is not None and m >= 2
    if m is None or m < 1:
        return LevelCheck(k, False, False, False, False, len(B), Fraction(len(B)))
    divisible_ok = R.is_integer() and entries_multiple_of(R, m)
    c = R.scalar_value()
    if c is not None:
        cube_ok = abs(c) >= m
    else:
        try:
            cube_ok = cube_in_image(R.T, m)
        except ValueError:
            cube_ok = False
    try:
        residue_ok = B.is_integer() and _exact_side(B, m, R)
    except AmbiguousResidues:
        residue_ok = False
    excess = B.excess_count(m)
    return LevelCheck(k, m_ok, divisible_ok, cube_ok, residue_ok, excess, Fraction(excess, m**R.d))


@dataclass
class LatticeReport:
    rows: list
    partial_sum: Fraction
    declared_tail: Fraction | None = None

    def csv_rows(self):
        yield "k,residue_ok,excess_count,excess_ratio,cube_ok,divisible_ok"
        for r in self.rows:
            yield f"{r.k},{int(r.residue_ok)},{r.excess_count},{r.excess_ratio},{int(r.cube_ok)},{int(r.divisible_ok)}"


def lattice_report(spec: SequenceSpec, K: int) -> LatticeReport:
    rows = [check_level(k, spec.level(k)) for k in range(1, K + 1)]
    return LatticeReport(rows, sum((r.excess_ratio for r in rows), Fraction(0)), spec.tail_bound)


@dataclass
class Theorem11Report:
    K: int
    rows: list
    partial_sum: Fraction
    declared_tail: Fraction | None
    failures: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.failures

    @property
    def zero_excess(self) -> bool:
        return all(r.excess_count == 0 for r in self.rows)

    @property
    def verdict(self) -> str:
        if self.holds:
            return f"hypotheses hold up to K={self.K}"
        k, what = self.failures[0]
        return f"hypothesis {what} fails at k={k}"


_CONDITIONS = (
    ("(a) m_k >= 2", "m_ok"),
    ("(b) entries of R_k multiples of m_k", "divisible_ok"),
    ("(c) [-m_k,m_k]^d in R_k^T[-1,1]^d", "cube_ok"),
    ("(d) B_k = {0..m_k-1}^d mod R_k Z^d", "residue_ok"),
)


def theorem11_check(spec: SequenceSpec, K: int) -> Theorem11Report:
    """Check the spectrality hypotheses level by level for k <= K.

    Only the finite prefix is inspected; the summability of the excess
    ratios is reported as a partial sum plus any declared tail bound.
    """
    rep = lattice_report(spec, K)
    failures = []
    for r in rep.rows:
        for label, attr in _CONDITIONS:
            if not getattr(r, attr):
                failures.append((r.k, label))
    return Theorem11Report(K, rep.rows, rep.partial_sum, rep.declared_tail, failures)
