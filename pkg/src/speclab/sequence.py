"""Digit sets and the sequence data (m_k, R_k, B_k) every pipeline consumes."""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Sequence

from .exact_linalg import Mat, Vec, invert, is_integer_vec, vec

DEFAULT_CAP = 10**6


class CapExceeded(RuntimeError):
    pass


def enumeration_cap() -> int:
    """Enumeration cap, overridable through the SPECLAB_CAP environment variable."""
    raw = os.environ.get("SPECLAB_CAP")
    return int(raw) if raw else DEFAULT_CAP


class DigitSet:
    """A finite, non-empty set of exact vectors.

    Either an explicit tuple of points or a Cartesian product of
    one-dimensional value sets (one per coordinate).  Product sets keep
    large lattice cubes such as {0, ..., m-1}^d symbolic.
    """

    __slots__ = ("_points", "factors", "d")

    def __init__(self, points: Sequence | None = None, *, factors: Sequence | None = None):
        if (points is None) == (factors is None):
            raise ValueError("give exactly one of points or factors")
        if factors is not None:
            fs = tuple(tuple(sorted({Fraction(x) for x in f})) for f in factors)
            if not fs or any(len(f) == 0 for f in fs):
                raise ValueError("digit set must be non-empty")
            self.factors = fs
            self._points = None
            self.d = len(fs)
            return
        pts = tuple(vec(p) for p in points)
        if not pts:
            raise ValueError("digit set must be non-empty")
        if len(set(pts)) != len(pts):
            raise ValueError("digit set elements must be pairwise distinct")
        d = len(pts[0])
        if d == 0 or any(len(p) != d for p in pts):
            raise ValueError("digit set elements must share one dimension d >= 1")
        self._points = pts
        self.factors = None
        self.d = d

    @classmethod
    def cube(cls, m: int, d: int) -> DigitSet:
        return cls(factors=[range(m)] * d)

    @classmethod
    def power(cls, values: Sequence, d: int) -> DigitSet:
        return cls(factors=[tuple(values)] * d)

    def __len__(self) -> int:
        if self.factors is not None:
            return math.prod(len(f) for f in self.factors)
        return len(self._points)

    def __iter__(self) -> Iterator[Vec]:
        if self.factors is not None:
            return iter(itertools.product(*self.factors))
        return iter(self._points)

    def __contains__(self, v) -> bool:
        v = vec(v)
        if len(v) != self.d:
            return False
        if self.factors is not None:
            return all(x in f for x, f in zip(v, self.factors))
        return v in set(self._points)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DigitSet):
            return NotImplemented
        if self.factors is not None and other.factors is not None:
            return self.factors == other.factors
        return len(self) == len(other) and set(self) == set(other)

    def __hash__(self):
        return hash(frozenset(self))

    def __repr__(self) -> str:
        if self.factors is not None:
            return f"DigitSet(factors={[list(map(str, f)) for f in self.factors]})"
        return f"DigitSet({[tuple(map(str, p)) for p in self._points]})"

    def points(self, cap: int | None = None) -> list[Vec]:
        cap = enumeration_cap() if cap is None else cap
        if len(self) > cap:
            raise CapExceeded(f"digit set of size {len(self)} exceeds cap {cap}")
        return list(self)

    def is_integer(self) -> bool:
        if self.factors is not None:
            return all(x.denominator == 1 for f in self.factors for x in f)
        return all(is_integer_vec(p) for p in self._points)

    def max_sup_norm(self) -> Fraction:
        if self.factors is not None:
            return max(max(abs(f[0]), abs(f[-1])) for f in self.factors)
        return max(max(abs(x) for x in p) for p in self._points)

    def count_inside_cube(self, m: int) -> int:
        """#(self ∩ {0, ..., m-1}^d)."""
        if self.factors is not None:
            return math.prod(sum(1 for x in f if x.denominator == 1 and 0 <= x < m) for f in self.factors)
        return sum(1 for p in self._points if all(x.denominator == 1 and 0 <= x < m for x in p))

    def excess_count(self, m: int) -> int:
        """#(self \\ {0, ..., m-1}^d)."""
        return len(self) - self.count_inside_cube(m)


@dataclass(frozen=True)
class Level:
    """One step (m_k, R_k, B_k) plus an optional dual digit set L_k."""

    R: Mat
    B: DigitSet
    m: int | None = None
    L: DigitSet | None = None

    def __post_init__(self):
        if self.B.d != self.R.d or (self.L is not None and self.L.d != self.R.d):
            raise ValueError("dimension mismatch between R, B and L")


@dataclass
class SequenceSpec:
    """Generator of levels k = 1, 2, ...

    ``levels`` is an explicit finite prefix; ``generator`` a total function
    k -> Level for named families.  ``tail_bound`` is a declared (never
    computed) bound on the excess tail sum beyond the inspected prefix.
    """

    d: int
    levels: list = field(default_factory=list)
    generator: Callable[[int], Level] | None = None
    family: str | None = None
    params: dict = field(default_factory=dict)
    tail_bound: Fraction | None = None

    def __post_init__(self):
        self._cache: dict[int, Level] = {}
        self._scales: list[Mat] = [Mat.identity(self.d)]
        for lv in self.levels:
            if lv.R.d != self.d:
                raise ValueError("level dimension differs from spec dimension")

    @property
    def length(self) -> int | None:
        """Number of available levels; None for unbounded families."""
        return None if self.generator is not None else len(self.levels)

    def level(self, k: int) -> Level:
        if k < 1:
            raise IndexError("levels are indexed from k = 1")
        if self.generator is None:
            if k > len(self.levels):
                raise IndexError(f"spec has only {len(self.levels)} levels, asked for k={k}")
            return self.levels[k - 1]
        lv = self._cache.get(k)
        if lv is None:
            lv = self.generator(k)
            if lv.R.d != self.d:
                raise ValueError("family produced a level of the wrong dimension")
            self._cache[k] = lv
        return lv

    def scale(self, k: int) -> Mat:
        """R_1^{-1} ... R_k^{-1}, exact (scale(0) is the identity)."""
        while len(self._scales) <= k:
            j = len(self._scales)
            self._scales.append(self._scales[-1] @ invert(self.level(j).R))
        return self._scales[k]

    def scaled_digits(self, k: int, cap: int | None = None) -> list[Vec]:
        P = self.scale(k)
        return [P @ b for b in self.level(k).B.points(cap)]
