"""Constants and lower bounds behind the equi-positivity of tail measures.

For a sequence of nearly d-th power lattices the tail measure ν_{>n} is the
convolution of δ_{B_{n+k}} pushed forward by (R_{n+k}...R_{n+1})^{-1}.  Its
Fourier transform is bounded below on [-2/3, 2/3]^d by an explicit ε.  This
module computes ε, the per-factor floors it is built from, and checks them
against direct evaluation of truncated products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exact_linalg import Mat, cube_in_image, invert
from .hadamard import PreconditionViolated
from .sequence import DigitSet, SequenceSpec

X0 = 1 - 2 * math.pi**2 / 27
DELTA = Fraction(1, 6)
BOX = Fraction(2, 3)


class OutOfDomain(ValueError):
    pass


def factor_lower_bound(m: int, c: int, xi) -> float:
    """Π_j (1 - m²π²ξ_j²/6) - 2c/m^d on the box |ξ_j| <= √6/(mπ)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    d = xi.shape[-1]
    if m < 2:
        raise ValueError("m must be at least 2")
    if np.any(np.abs(xi) > math.sqrt(6) / (m * math.pi)):
        raise OutOfDomain(f"ξ outside [-√6/({m}π), √6/({m}π)]^{d}")
    return float(np.prod(1 - (m * math.pi * xi) ** 2 / 6) - 2 * c / m**d)


def alpha_constant(d: int) -> float:
    """α = (d+1) ln x0 / (x0^{d+1} - 1), so that x >= e^{α(x-1)} on [x0^{d+1}, 1]."""
    if d < 1:
        raise ValueError("d must be positive")
    return (d + 1) * math.log(X0) / (X0 ** (d + 1) - 1)


def binomial_series(d: int) -> float:
    return sum(math.comb(d, j) * 8**j * math.pi ** (2 * j) / (27**j * (4**j - 1)) for j in range(1, d + 1))


def epsilon_bound(d: int, tail_sum: float = 0.0) -> float:
    if tail_sum < 0:
        raise ValueError("tail sum must be non-negative")
    a = alpha_constant(d)
    return math.exp(-a * binomial_series(d) - 2 * a * float(tail_sum))


@dataclass(frozen=True)
class EquiConstants:
    d: int
    x0: float
    alpha: float
    epsilon: float
    n0: int | None = None

    @classmethod
    def for_dim(cls, d: int, tail_sum: float = 0.0, n0: int | None = None) -> EquiConstants:
        return cls(d, X0, alpha_constant(d), epsilon_bound(d, tail_sum), n0)


def excess_threshold(d: int) -> float:
    """Right-hand side (2π²/27)(1 - 2π²/27)^d of the n0 condition on 2c_k/m_k^d."""
    return (1 - X0) * X0**d


def _excess_ratio(spec: SequenceSpec, k: int) -> Fraction:
    lv = spec.level(k)
    if lv.m is None:
        raise PreconditionViolated(f"level {k} has no m_k")
    return Fraction(lv.B.excess_count(lv.m), lv.m**spec.d)


def n0_threshold(spec: SequenceSpec, K: int) -> int | None:
    """Least n0 <= K with 2c_k/m_k^d below the threshold for every n0 <= k <= K."""
    bound = excess_threshold(spec.d)
    n0 = None
    for k in range(K, 0, -1):
        if float(2 * _excess_ratio(spec, k)) < bound:
            n0 = k
        else:
            break
    return n0


def integer_shift(x) -> tuple:
    """k(x) with k_j = 0 for x_j in [0, 1/2) and -1 for x_j in [1/2, 1)."""
    out = []
    for t in x:
        if not 0 <= t < 1:
            raise OutOfDomain(f"{t} is not in [0, 1)")
        out.append(0 if t < Fraction(1, 2) else -1)
    return tuple(out)


def nesting_holds(spec: SequenceSpec, n: int, k: int) -> bool:
    """(R_{n,n+k}^T)^{-1}[-1,1]^d ⊆ [-1/P, 1/P]^d with P = m_{n+1}...m_{n+k}, exactly."""
    M = Mat.identity(spec.d)
    P = 1
    for j in range(n + 1, n + k + 1):
        lv = spec.level(j)
        M = M @ lv.R.T
        P *= lv.m
    return cube_in_image(M, P)


def digit_transform_abs(B: DigitSet, eta: np.ndarray) -> np.ndarray:
    """|δ̂_B(η)| for each row of ``eta``; product sets factor per coordinate."""
    eta = np.asarray(eta, dtype=float)
    if B.factors is not None:
        out = np.ones(len(eta))
        for j, f in enumerate(B.factors):
            vals = np.array([float(x) for x in f])
            out *= np.abs(np.exp(-2j * np.pi * np.outer(eta[:, j], vals)).mean(axis=1))
        return out
    pts = np.array([[float(c) for c in b] for b in B.points()])
    return np.abs(np.exp(-2j * np.pi * (eta @ pts.T)).mean(axis=1))


def tail_floor(d: int, K: int, tail_sum: float) -> float:
    """Lower bound for Π_{k>K} |δ̂_{B_{n+k}}(...)| from the exp(α(x-1)) chain."""
    a = alpha_constant(d)
    geo = sum(math.comb(d, j) * (2 * math.pi**2 / 27) ** j * 4.0 ** (-j * K) / (1 - 4.0**-j) for j in range(1, d + 1))
    return math.exp(-a * (geo + 2 * float(tail_sum)))


@dataclass(frozen=True)
class TailPositivity:
    grid_min: float
    epsilon: float
    ok: bool
    products: np.ndarray
    floor: float
    tail_declared: bool

    def csv_rows(self, grid):
        g = np.asarray(grid, dtype=float)
        yield ",".join(f"xi_{i + 1}" for i in range(g.shape[1])) + ",product_value,analytic_floor"
        for row, p in zip(g, self.products):
            yield ",".join(repr(float(x)) for x in row) + f",{float(p)!r},{self.floor!r}"


def verify_tail_positivity(spec: SequenceSpec, n: int, K: int, grid) -> TailPositivity:
    """Certified lower bound for |ν̂_{>n}| on a grid in [-2/3, 2/3]^d.

    The first K factors are evaluated directly; the factors beyond K are
    replaced by the analytic floor.  The excess tail beyond n+K is taken
    from the spec's declared bound, or 0 when none is declared (and the
    result is flagged as conditional through ``tail_declared``).
    """
    if K < 1 or n < 0:
        raise ValueError("need K >= 1 and n >= 0")
    G = np.asarray(grid, dtype=float).reshape(-1, spec.d)
    if np.any(np.abs(G) > float(BOX)):
        raise PreconditionViolated("grid points must lie in [-2/3, 2/3]^d")
    bound = excess_threshold(spec.d)
    partial = Fraction(0)
    for k in range(n + 1, n + K + 1):
        lv = spec.level(k)
        r = _excess_ratio(spec, k)
        if not float(2 * r) < bound:
            raise PreconditionViolated(f"excess at k={k} is above the threshold, n is below n0")
        if not cube_in_image(lv.R.T, lv.m):
            raise PreconditionViolated(f"[-m,m]^d is not inside R^T[-1,1]^d at k={k}")
        partial += r
    declared = spec.tail_bound is not None
    tail = float(spec.tail_bound) if declared else 0.0

    prod = np.ones(len(G))
    eta = G.copy()
    for k in range(n + 1, n + K + 1):
        lv = spec.level(k)
        eta = eta @ invert(lv.R).to_float()  # row form of (R^T)^{-1} η
        prod *= digit_transform_abs(lv.B, eta)
    floor = tail_floor(spec.d, K, tail)
    eps = epsilon_bound(spec.d, float(partial) + tail)
    certified = prod * floor
    gmin = float(certified.min()) if len(certified) else 1.0
    return TailPositivity(gmin, eps, gmin >= eps, prod, floor, declared)
