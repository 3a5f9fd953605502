"""Exact atomic measures, convolution, Fourier transforms and sampling.

Atom coordinates and weights stay exact rationals; floats appear only when
a Fourier transform is evaluated or samples are drawn.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .exact_linalg import add, vec
from .hadamard import theorem11_check
from .sequence import CapExceeded, DigitSet, SequenceSpec, enumeration_cap

__all__ = [
    "AtomicMeasure",
    "CapExceeded",
    "DimensionMismatch",
    "dirac_uniform",
    "convolve",
    "finite_convolution",
    "fourier",
    "fourier_many",
    "jessen_wintner_partial",
    "sample",
    "splitmix64",
    "subseed",
]


class DimensionMismatch(ValueError):
    pass


class EmptySet(ValueError):
    pass


class AtomicMeasure:
    """Finitely supported probability measure with exact atoms and weights."""

    def __init__(self, atoms: dict):
        if not atoms:
            raise ValueError("a probability measure needs at least one atom")
        clean = {}
        for x, w in atoms.items():
            w = Fraction(w)
            if w <= 0:
                raise ValueError("atom weights must be positive")
            clean[vec(x)] = w
        dims = {len(x) for x in clean}
        if len(dims) != 1:
            raise DimensionMismatch("atoms of different dimensions")
        if sum(clean.values()) != 1:
            raise ValueError("weights must sum to exactly 1")
        self.atoms = clean
        self.d = dims.pop()
        self._float = None

    def __len__(self) -> int:
        return len(self.atoms)

    def __eq__(self, other) -> bool:
        return isinstance(other, AtomicMeasure) and self.atoms == other.atoms

    def __repr__(self) -> str:
        return f"AtomicMeasure({len(self)} atoms, d={self.d})"

    def support(self) -> set:
        return set(self.atoms)

    def arrays(self):
        """(coords, weights) as float arrays, cached."""
        if self._float is None:
            keys = sorted(self.atoms)
            coords = np.array([[float(c) for c in x] for x in keys]).reshape(len(keys), self.d)
            weights = np.array([float(self.atoms[x]) for x in keys])
            self._float = (coords, weights)
        return self._float

    def csv_rows(self):
        header = ",".join(f"coord_{i + 1}" for i in range(self.d))
        yield header + ",weight_num,weight_den"
        for x in sorted(self.atoms):
            w = self.atoms[x]
            yield ",".join(str(c) for c in x) + f",{w.numerator},{w.denominator}"


def dirac_uniform(A: Iterable) -> AtomicMeasure:
    pts = list(A.points() if isinstance(A, DigitSet) else A)
    if not pts:
        raise EmptySet("uniform measure on an empty set")
    pts = [vec(p) for p in pts]
    if len(set(pts)) != len(pts):
        raise ValueError("support points must be distinct")
    w = Fraction(1, len(pts))
    return AtomicMeasure({p: w for p in pts})


def convolve(mu: AtomicMeasure, nu: AtomicMeasure) -> AtomicMeasure:
    if mu.d != nu.d:
        raise DimensionMismatch(f"d={mu.d} vs d={nu.d}")
    out = defaultdict(Fraction)
    for x, wx in mu.atoms.items():
        for y, wy in nu.atoms.items():
            out[add(x, y)] += wx * wy
    return AtomicMeasure(dict(out))


def finite_convolution(spec: SequenceSpec, n: int, cap: int | None = None) -> AtomicMeasure:
    """mu_n = δ_{R_1^{-1}B_1} * δ_{R_1^{-1}R_2^{-1}B_2} * ... (n factors), exact."""
    cap = enumeration_cap() if cap is None else cap
    total = 1
    for k in range(1, n + 1):
        total *= len(spec.level(k).B)
        if total > cap:
            raise CapExceeded(f"product of digit-set sizes up to k={k} exceeds cap {cap}")
    mu = dirac_uniform(spec.scaled_digits(1))
    for k in range(2, n + 1):
        mu = convolve(mu, dirac_uniform(spec.scaled_digits(k)))
    return mu


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, np.integer)) and not isinstance(x, bool)


def fourier(mu: AtomicMeasure, xi) -> complex:
    """μ̂(ξ) = Σ w e^{-2πi<ξ,x>}.

    Rational ξ has its phases reduced mod 1 exactly before the exponential.
    """
    xi = tuple(xi)
    if len(xi) != mu.d:
        raise DimensionMismatch(f"ξ has dimension {len(xi)}, measure has {mu.d}")
    if all(_is_exact(c) for c in xi):
        xi = vec(xi)
        total = 0j
        for x, w in mu.atoms.items():
            t = sum((a * b for a, b in zip(xi, x)), Fraction(0))
            t -= math.floor(t)
            total += float(w) * complex(math.cos(2 * math.pi * t), -math.sin(2 * math.pi * t))
        return total
    return complex(fourier_many(mu, np.asarray([xi], dtype=float))[0])


def fourier_many(mu: AtomicMeasure, xis) -> np.ndarray:
    """μ̂ at each row of a float array of shape (n, d)."""
    coords, weights = mu.arrays()
    X = np.asarray(xis, dtype=float).reshape(-1, mu.d)
    return np.exp(-2j * np.pi * (X @ coords.T)) @ weights


@dataclass(frozen=True)
class CriterionPartial:
    partial_sum: float
    cap: float | None  # 2d√d when the spectrality hypotheses hold with zero excess
    label: str


def jessen_wintner_partial(spec: SequenceSpec, K: int) -> CriterionPartial:
    """Partial sum of Σ_k (1/#A_k) Σ_{a∈A_k} |a|/(1+|a|), A_k = R_1^{-1}...R_k^{-1} B_k."""
    total = 0.0
    for k in range(1, K + 1):
        P = spec.scale(k).to_float()
        D = np.array([[float(c) for c in b] for b in spec.level(k).B.points()])
        norms = np.linalg.norm(D @ P.T, axis=1)
        total += float(np.mean(norms / (1.0 + norms)))
    cap = None
    label = "supported by criterion"
    try:
        rep = theorem11_check(spec, K)
    except Exception:
        rep = None
    if rep is not None and rep.holds:
        label = "existence follows from the spectrality hypotheses (checked to K)"
        if rep.zero_excess:
            cap = 2 * spec.d * math.sqrt(spec.d)
    return CriterionPartial(total, cap, label)


GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1


def splitmix64(seed: int, counters) -> np.ndarray:
    """SplitMix64 outputs number counters+1 of the stream started at ``seed``.

    The generator is counter based: output i depends only on (seed, i), so
    any shard of the stream can be produced independently.
    """
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK) + (c + np.uint64(1)) * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def subseed(seed: int, i: int) -> int:
    """Seed of shard i: the i-th SplitMix64 output of ``seed``."""
    return int(splitmix64(seed, [i])[0])


def sample(spec: SequenceSpec, K: int, count: int, seed: int) -> np.ndarray:
    """``count`` draws of Σ_{k<=K} R_1^{-1}...R_k^{-1} b_k with b_k uniform on B_k.

    The digit at level k of sample s is index splitmix64(seed, s*K + k-1)
    mod #B_k (modulo bias below #B_k / 2^64).
    """
    out = np.zeros((count, spec.d))
    if count == 0:
        return out
    s = np.arange(count, dtype=np.uint64)
    for k in range(1, K + 1):
        pts = spec.level(k).B.points()
        D = np.array([[float(c) for c in b] for b in pts]).reshape(len(pts), spec.d)
        idx = splitmix64(seed, s * np.uint64(K) + np.uint64(k - 1)) % np.uint64(len(pts))
        out += D[idx.astype(np.int64)] @ spec.scale(k).to_float().T
    return out
