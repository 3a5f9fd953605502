"""Exact rational vectors and square matrices.

Vectors are plain tuples of :class:`fractions.Fraction`.  Matrices are
immutable :class:`Mat` objects.  Every geometric predicate here is decided
in exact arithmetic; eigenvalue moduli are the only floating point escape
hatch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Vec = tuple  # tuple[Fraction, ...]

EIG_TOL = 1e-9
MAX_CUBE_DIM = 6


class SingularMatrix(ValueError):
    pass


class NonIntegerMatrix(ValueError):
    pass


class AmbiguousResidues(ValueError):
    pass


def to_rat(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are rejected."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (np.integer,)):
        return Fraction(int(x))
    raise TypeError(f"cannot convert {x!r} to an exact rational")


def vec(xs: Iterable) -> Vec:
    return tuple(to_rat(x) for x in xs)


def is_integer_vec(v: Vec) -> bool:
    return all(x.denominator == 1 for x in v)


def add(u: Vec, v: Vec) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Vec, v: Vec) -> Vec:
    return tuple(a - b for a, b in zip(u, v))


def scale(c, v: Vec) -> Vec:
    return tuple(c * a for a in v)


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def sup_norm(v: Vec) -> Fraction:
    return max((abs(x) for x in v), default=Fraction(0))


def cube_points(m: int, d: int) -> list[Vec]:
    """The lattice cube {0, ..., m-1}^d in lexicographic order."""
    return [tuple(Fraction(c) for c in p) for p in itertools.product(range(m), repeat=d)]


@dataclass(frozen=True)
class Mat:
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(to_rat(x) for x in r) for r in self.rows)
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows):
            raise ValueError("matrix must be square and non-empty")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def identity(cls, d: int) -> Mat:
        return cls(tuple(tuple(int(i == j) for j in range(d)) for i in range(d)))

    @classmethod
    def diag(cls, *entries) -> Mat:
        d = len(entries)
        return cls(tuple(tuple(entries[i] if i == j else 0 for j in range(d)) for i in range(d)))

    @classmethod
    def scalar(cls, c, d: int) -> Mat:
        return cls.diag(*([c] * d))

    @classmethod
    def parse(cls, text: str) -> Mat:
        """Parse the row-major literal ``"4 -2 ; 0 2"``."""
        rows = [r.split() for r in text.split(";")]
        return cls(tuple(tuple(Fraction(x) for x in r) for r in rows))

    def format(self) -> str:
        return " ; ".join(" ".join(str(x) for x in r) for r in self.rows)

    @property
    def d(self) -> int:
        return len(self.rows)

    @property
    def T(self) -> Mat:
        return Mat(tuple(zip(*self.rows)))

    def is_integer(self) -> bool:
        return all(x.denominator == 1 for r in self.rows for x in r)

    def scalar_value(self):
        """The c with self == c*I, or None."""
        c = self.rows[0][0]
        for i, r in enumerate(self.rows):
            for j, x in enumerate(r):
                if x != (c if i == j else 0):
                    return None
        return c

    def __matmul__(self, other):
        if isinstance(other, Mat):
            cols = list(zip(*other.rows))
            return Mat(tuple(tuple(dot(r, c) for c in cols) for r in self.rows))
        return tuple(dot(r, other) for r in self.rows)

    def __mul__(self, c) -> Mat:
        c = to_rat(c)
        return Mat(tuple(tuple(c * x for x in r) for r in self.rows))

    __rmul__ = __mul__

    def det(self) -> Fraction:
        a = [list(r) for r in self.rows]
        n = self.d
        sign = 1
        out = Fraction(1)
        for i in range(n):
            p = next((j for j in range(i, n) if a[j][i] != 0), None)
            if p is None:
                return Fraction(0)
            if p != i:
                a[i], a[p] = a[p], a[i]
                sign = -sign
            out *= a[i][i]
            for j in range(i + 1, n):
                f = a[j][i] / a[i][i]
                if f:
                    for c in range(i, n):
                        a[j][c] -= f * a[i][c]
        return sign * out

    def to_float(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.rows])

    def __str__(self) -> str:
        return "[" + "; ".join(" ".join(str(x) for x in r) for r in self.rows) + "]"


def invert(M: Mat) -> Mat:
    n = M.d
    a = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M.rows)]
    for i in range(n):
        p = next((j for j in range(i, n) if a[j][i] != 0), None)
        if p is None:
            raise SingularMatrix(f"matrix {M} is singular")
        a[i], a[p] = a[p], a[i]
        piv = a[i][i]
        a[i] = [x / piv for x in a[i]]
        for j in range(n):
            if j != i and a[j][i] != 0:
                f = a[j][i]
                a[j] = [x - f * y for x, y in zip(a[j], a[i])]
    return Mat(tuple(tuple(r[n:]) for r in a))


def solve(M: Mat, v: Vec) -> Vec:
    return invert(M) @ v


def cube_vertices(m, d: int) -> list[Vec]:
    m = to_rat(m)
    return [tuple(s * m for s in signs) for signs in itertools.product((1, -1), repeat=d)]


def cube_witness(M: Mat, m):
    """First vertex v of [-m,m]^d with M^{-1} v outside [-1,1]^d, as (v, M^{-1}v).

    Returns None when [-m,m]^d is contained in M[-1,1]^d.
    """
    if M.d > MAX_CUBE_DIM:
        raise ValueError(f"cube containment limited to d <= {MAX_CUBE_DIM}")
    Minv = invert(M)
    for v in cube_vertices(m, M.d):
        w = Minv @ v
        if any(abs(x) > 1 for x in w):
            return v, w
    return None


def cube_in_image(M: Mat, m) -> bool:
    """Exact test of [-m,m]^d ⊆ M[-1,1]^d via the 2^d cube vertices."""
    if to_rat(m) < 0:
        raise ValueError("m must be non-negative")
    return cube_witness(M, m) is None


def entries_multiple_of(M: Mat, m: int) -> bool:
    if not M.is_integer():
        raise NonIntegerMatrix(f"matrix {M} has non-integer entries")
    if m <= 0:
        raise ValueError("m must be positive")
    return all(int(x) % m == 0 for r in M.rows for x in r)


@dataclass(frozen=True)
class EigenBound:
    status: str  # "proven_by_cube" | "proven_numeric" | "refuted"
    min_modulus: float | None = None
    margin: float | None = None

    @property
    def proven(self) -> bool:
        return self.status != "refuted"


def min_eigenvalue_modulus_at_least(M: Mat, C) -> EigenBound:
    """Decide whether every eigenvalue of M has modulus >= C.

    Tries the exact sufficient condition [-C,C]^d ⊆ M[-1,1]^d first, then
    falls back to numpy eigenvalues with tolerance ``EIG_TOL``.
    """
    C = to_rat(C)
    try:
        if C >= 0 and M.d <= MAX_CUBE_DIM and cube_in_image(M, C):
            return EigenBound("proven_by_cube")
    except SingularMatrix:
        pass
    mods = np.abs(np.linalg.eigvals(M.to_float()))
    low = float(mods.min())
    margin = low - float(C)
    if margin >= -EIG_TOL:
        return EigenBound("proven_numeric", low, margin)
    return EigenBound("refuted", low, margin)


def residue_key(R_inv: Mat, v: Vec) -> tuple:
    """Fractional part of R^{-1} v; equal keys iff congruent mod R Z^d."""
    return tuple(x - (x.numerator // x.denominator) for x in R_inv @ v)


def residue_matching(B: Iterable[Vec], U: Iterable[Vec], R: Mat) -> dict | None:
    """Map each b in B to the unique u in U with R^{-1}(b - u) integral.

    Returns None when no bijection exists (a missing class, a class hit
    twice, or a size mismatch).  Raises AmbiguousResidues when two members
    of U share a class.
    """
    R_inv = invert(R)
    classes = {}
    for u in U:
        key = residue_key(R_inv, u)
        if key in classes:
            raise AmbiguousResidues(f"{classes[key]} and {u} are congruent mod R Z^d")
        classes[key] = u
    B = list(B)
    if len(B) != len(classes):
        return None
    out = {}
    used = set()
    for b in B:
        u = classes.get(residue_key(R_inv, b))
        if u is None or u in used:
            return None
        used.add(u)
        out[b] = u
    return out


def residue_equal(B: Iterable[Vec], U: Iterable[Vec], R: Mat) -> bool:
    """True iff B ≡ U (mod R Z^d) as sets of residue classes, bijectively."""
    B = list(B)
    if not all(is_integer_vec(b) for b in B):
        return False
    return residue_matching(B, U, R) is not None
