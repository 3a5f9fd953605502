"""Truncated infinite sums, Moran structures and log-ratio dimension estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .exact_linalg import Vec, add, scale, vec
from .sequence import CapExceeded, DigitSet, SequenceSpec, enumeration_cap


def _log(x) -> float:
    x = Fraction(x)
    return math.log(x.numerator) - math.log(x.denominator)


def _in_box(v: Vec, c) -> bool:
    return all(0 <= x <= c for x in v)


class MoranLevel:
    """One level (c_k, C_k, B_k) with G_k = B_k ∩ [0, c_k]^d.

    ``B`` defaults to ``G`` (no far digits).  When B is a product set, G
    and the far-digit norms are derived per coordinate without enumeration.
    """

    __slots__ = ("c", "C", "G", "B")

    def __init__(self, c, C, G: DigitSet | None = None, B: DigitSet | None = None):
        self.c = Fraction(c)
        self.C = Fraction(C)
        if self.c < 1:
            raise ValueError("c_k must be at least 1")
        if self.C < self.c + 1:
            raise ValueError("C_k must be at least c_k + 1")
        if G is None and B is None:
            raise ValueError("give G or B")
        if G is None:
            G = _restrict(B, self.c)
        if B is None:
            B = G
        if not G.is_integer():
            raise ValueError("G_k must consist of integer vectors")
        if G.factors is not None:
            ok = all(0 <= f[0] and f[-1] <= self.c for f in G.factors)
        else:
            ok = all(_in_box(g, self.c) for g in G)
        if not ok:
            raise ValueError("G_k must lie in [0, c_k]^d")
        self.G = G
        self.B = B

    @property
    def d(self) -> int:
        return self.G.d

    def has_far(self) -> bool:
        return len(self.B) != len(self.G)

    def far_points(self, cap: int | None = None) -> list[Vec]:
        return [b for b in self.B.points(cap) if not _in_box(b, self.c)]

    def far_min_sup_norm(self) -> Fraction | None:
        """min{||x|| : x ∈ B_k \\ [0, c_k]^d}, or None when there is no far digit."""
        B, c = self.B, self.c
        if B.factors is None:
            far = self.far_points()
            return min((max(abs(x) for x in p) for p in far), default=None)
        best = None
        for j, f in enumerate(B.factors):
            outside = [x for x in f if not 0 <= x <= c]
            if not outside:
                continue
            cand = min(abs(x) for x in outside)
            for i, g in enumerate(B.factors):
                if i != j:
                    cand = max(cand, min(abs(x) for x in g))
            best = cand if best is None else min(best, cand)
        return best

    def signs_ok(self) -> bool:
        """B_k ⊆ [0, ∞)^d."""
        if self.B.factors is not None:
            return all(f[0] >= 0 for f in self.B.factors)
        return all(x >= 0 for p in self.B for x in p)


def _restrict(B: DigitSet, c: Fraction) -> DigitSet:
    if B.factors is not None:
        return DigitSet(factors=[[x for x in f if 0 <= x <= c] for f in B.factors])
    return DigitSet([b for b in B if _in_box(b, c)])


@dataclass
class MoranSpec:
    """Levels (c_k, C_k, G_k, B_k) for k = 1, 2, ...

    ``sizes`` optionally maps k to (#G_k, C_k) without building the level,
    which lets dimension scans run far beyond what enumeration allows.
    """

    d: int
    levels: list = field(default_factory=list)
    generator: Callable[[int], MoranLevel] | None = None
    sizes: Callable[[int], tuple] | None = None
    family: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self._cache: dict[int, MoranLevel] = {}

    def level(self, k: int) -> MoranLevel:
        if k < 1:
            raise IndexError("levels are indexed from k = 1")
        if self.generator is None:
            if k > len(self.levels):
                raise IndexError(f"spec has only {len(self.levels)} levels, asked for k={k}")
            return self.levels[k - 1]
        lv = self._cache.get(k)
        if lv is None:
            lv = self._cache[k] = self.generator(k)
        return lv

    def size(self, k: int) -> tuple:
        if self.sizes is not None:
            return self.sizes(k)
        lv = self.level(k)
        return len(lv.G), lv.C

    @classmethod
    def from_sequence(cls, spec: SequenceSpec) -> MoranSpec:
        """c_k = m_k - 1 and C_k = N_k for specs with R_k = N_k I."""

        def gen(k):
            lv = spec.level(k)
            N = lv.R.scalar_value()
            if N is None or lv.m is None:
                raise ValueError(f"level {k} needs a scalar R_k and an m_k")
            return MoranLevel(lv.m - 1, N, B=lv.B)

        return cls(spec.d, generator=gen, family=spec.family, params=dict(spec.params))


def _moran_scale(spec: MoranSpec, k: int) -> Fraction:
    p = Fraction(1)
    for j in range(1, k + 1):
        p /= spec.level(j).C
    return p


def _scaled_sets(spec, K: int, digits: str = "B", cap: int | None = None) -> list[list[Vec]]:
    if isinstance(spec, SequenceSpec):
        return [spec.scaled_digits(k, cap) for k in range(1, K + 1)]
    if isinstance(spec, MoranSpec):
        out = []
        p = Fraction(1)
        for k in range(1, K + 1):
            lv = spec.level(k)
            p /= lv.C
            D = lv.G if digits == "G" else lv.B
            out.append([scale(p, b) for b in D.points(cap)])
        return out
    sets = list(spec)[:K]
    return [list(A.points(cap)) if isinstance(A, DigitSet) else [vec(a) for a in A] for A in sets]


def sumset(sets: Sequence, cap: int | None = None) -> set:
    """Exact Minkowski sum of finite point sets, deduplicating as it goes."""
    cap = enumeration_cap() if cap is None else cap
    sets = [list(s) for s in sets]
    if not sets:
        return set()
    acc = {tuple(p) for p in sets[0]}
    for k, A in enumerate(sets[1:], start=2):
        if len(acc) * len(A) > cap:
            raise CapExceeded(f"sum-set at depth {k} would enumerate {len(acc) * len(A)} > {cap} sums")
        acc = {add(x, a) for x in acc for a in A}
    return acc


def truncated_sumset(spec, K: int, cap: int | None = None, digits: str = "B") -> set:
    """Σ_{k<=K} of the scaled digit sets of a SequenceSpec, MoranSpec or list of sets."""
    cap = enumeration_cap() if cap is None else cap
    return sumset(_scaled_sets(spec, K, digits, cap), cap)


@dataclass
class DimensionReport:
    K: int
    window: int
    ks: np.ndarray
    log_num: np.ndarray
    log_den: np.ndarray
    box_count_agreement: bool | None = None

    @property
    def ratios(self) -> np.ndarray:
        return self.log_num / self.log_den

    @property
    def window_liminf(self) -> float:
        return float(self.ratios[-self.window :].min())

    @property
    def window_limsup(self) -> float:
        return float(self.ratios[-self.window :].max())

    def ratio_at(self, k: int) -> float:
        i = int(np.searchsorted(self.ks, k))
        if i >= len(self.ks) or self.ks[i] != k:
            raise KeyError(f"k={k} was not kept in this report")
        return float(self.ratios[i])

    def csv_rows(self):
        yield "k,log_num,log_den,ratio"
        for k, a, b in zip(self.ks, self.log_num, self.log_den):
            yield f"{int(k)},{float(a)!r},{float(b)!r},{float(a / b)!r}"


def ratio_scan(spec: MoranSpec, K: int):
    """Yield (k, log Π#G_j, log ΠC_j) for k = 1..K with running float sums."""
    num = den = 0.0
    for k in range(1, K + 1):
        g, C = spec.size(k)
        num += math.log(g)
        den += _log(C)
        yield k, num, den


def dim_formula(spec: MoranSpec, K: int, window: int, keep_all: bool = True) -> DimensionReport:
    """Ratios r_k = log Π#G / log ΠC with window min/max as liminf/limsup estimates.

    With ``keep_all=False`` only the trailing window is stored, which keeps
    memory flat for very long scans.
    """
    if window < 1 or K < 1:
        raise ValueError("K and window must be positive")
    if keep_all:
        rows = list(ratio_scan(spec, K))
    else:
        from collections import deque

        rows = deque(maxlen=window)
        for r in ratio_scan(spec, K):
            rows.append(r)
        rows = list(rows)
    arr = np.array(rows, dtype=float).reshape(-1, 3)
    rep = DimensionReport(K, min(window, len(rows)), arr[:, 0].astype(np.int64), arr[:, 1], arr[:, 2])
    depth, total = 0, 1
    for k in range(1, min(K, 8) + 1):
        total *= spec.size(k)[0]
        if total > 10**4:
            break
        depth = k
    if depth and (spec.levels or spec.generator is not None):
        try:
            bc = box_count_oracle(spec, depth)
            rep.box_count_agreement = bc.agree
        except (CapExceeded, IndexError):
            rep.box_count_agreement = None
    return rep


@dataclass(frozen=True)
class BoxCount:
    formula_count: int
    enumerated_count: int
    msc_ok: bool
    nesting_ok: bool

    @property
    def agree(self) -> bool:
        return self.formula_count == self.enumerated_count and self.msc_ok and self.nesting_ok


def box_count_oracle(spec: MoranSpec, k: int, cap: int = 10**6) -> BoxCount:
    """Compare Π#G_j with the number of distinct level-k Moran cells.

    Cells J_w = Σ_j C_1^{-1}...C_j^{-1} w_j + C_1^{-1}...C_k^{-1}[0,1]^d all
    have the same size, so distinct cells are distinct corners.  Sibling
    cells u ≠ v have disjoint interiors iff some coordinate of u - v has
    modulus >= 1, and a child sits in its parent iff w + [0,1]^d ⊆ [0,C]^d.
    """
    formula = 1
    for j in range(1, k + 1):
        formula *= len(spec.level(j).G)
        if formula > cap:
            raise CapExceeded(f"{formula} words at depth {j} exceed cap {cap}")
    corners = {tuple(Fraction(0) for _ in range(spec.d))}
    p = Fraction(1)
    msc = nesting = True
    for j in range(1, k + 1):
        lv = spec.level(j)
        p /= lv.C
        G = lv.G.points(cap)
        nesting &= all(x >= 0 and x + 1 <= lv.C for g in G for x in g)
        if len(G) <= 2000:
            for i, u in enumerate(G):
                for v in G[i + 1 :]:
                    if not any(abs(a - b) >= 1 for a, b in zip(u, v)):
                        msc = False
        step = [scale(p, g) for g in G]
        corners = {add(x, s) for x in corners for s in step}
    return BoxCount(formula, len(corners), msc, nesting)


@dataclass(frozen=True)
class NullReport:
    log_product: float
    product: float
    slope: float | None
    log_products: np.ndarray


def _slope(x, y) -> float | None:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2 or np.ptp(x) == 0:
        return None
    return float(np.polyfit(x, y, 1)[0])


def lebesgue_null_partial(spec: MoranSpec, K: int) -> NullReport:
    """Π_{k<=K} #G_k / C_k^d accumulated in log space, with its slope in k."""
    logs = np.empty(K)
    acc = 0.0
    for k in range(1, K + 1):
        g, C = spec.size(k)
        acc += math.log(g) - spec.d * _log(C)
        logs[k - 1] = acc
    return NullReport(acc, math.exp(acc), _slope(np.arange(1, K + 1), logs), logs)


def reduction_identity_check(A: Sequence, Aprime: Sequence, K: int, cap: int | None = None) -> bool:
    """Σ_{k<=K}(A_k ∪ A'_k) == ∪_{1<=p<=K} (Σ_{k<=p}(A_k ∪ A'_k) + Σ_{p<k<=K} A_k)."""
    As = _scaled_sets(A, K, cap=cap)
    Ap = _scaled_sets(Aprime, K, cap=cap) if Aprime is not None else [[] for _ in range(K)]
    Ap += [[] for _ in range(K - len(Ap))]
    unions = [list(dict.fromkeys(a + b)) for a, b in zip(As, Ap)]
    lhs = sumset(unions, cap)
    rhs = set()
    for p in range(1, K + 1):
        rhs |= sumset(unions[:p] + As[p:], cap)
    return lhs == rhs


def _sup(v) -> Fraction:
    return max(abs(x) for x in v)


def _euclid(v) -> float:
    return math.sqrt(sum(float(x) ** 2 for x in v))


@dataclass
class ClosednessReport:
    K: int
    sign_failures: list  # k with A'_k not inside [0, ∞)^d
    max_norms: list  # exact sup norms max_{a ∈ A_k} ||a||
    partial_sums: list  # running sums of max_norms
    far_min_norms: list  # min_{a ∈ A'_k} ||a|| (None for empty A'_k)
    sum_trend: str
    divergence_trend: str
    moran_cap: Fraction | None = None  # Σ c_k / Π(c_j + 1), bounded by 1
    divergence_declared: bool | None = None

    @property
    def sign_ok(self) -> bool:
        return not self.sign_failures

    def summary(self) -> str:
        sign = "ok" if self.sign_ok else f"fails at k={self.sign_failures[0]}"
        decl = {None: "not declared", True: "declared by spec", False: "declared false"}[self.divergence_declared]
        return (
            f"sign condition {sign}; Σ max|a| partial={float(self.partial_sums[-1]):.6g} ({self.sum_trend}); "
            f"far-digit norms {self.divergence_trend} for k<={self.K}, divergence {decl}"
        )


def _trend_terms(terms) -> str:
    ks = [k for k, t in enumerate(terms, start=1) if t > 0]
    ts = [float(terms[k - 1]) for k in ks]
    if len(ks) < 2:
        return "summable-trend"
    s = _slope(np.log(ks), np.log(ts))
    return "summable-trend" if s is not None and s < -1.1 else "unbounded-trend"


def _trend_growth(norms) -> str:
    pts = [(k, float(n)) for k, n in enumerate(norms, start=1) if n is not None and n > 0]
    if len(pts) < 2:
        return "no-far-digits"
    s = _slope(np.log([p[0] for p in pts]), np.log([p[1] for p in pts]))
    if s is None:
        return "inconclusive"
    if s > 0.5:
        return "diverging-trend"
    if s < 0.1:
        return "bounded-trend"
    return "inconclusive"


def closedness_from_sets(A: Sequence, Aprime: Sequence, K: int, divergence_declared: bool | None = None) -> ClosednessReport:
    """Finite checks of the closedness conditions for Σ(A_k ∪ A'_k).

    Sum and growth behaviour is reported as trend evidence from the first K
    terms; none of it is a proof of the limit statements.
    """
    As = _scaled_sets(A, K)
    Ap = _scaled_sets(Aprime, K)
    maxes, partial, mins, fails = [], [], [], []
    run = Fraction(0)
    for k in range(1, K + 1):
        m = max((_sup(a) for a in As[k - 1]), default=Fraction(0))
        run += m
        maxes.append(m)
        partial.append(run)
        far = Ap[k - 1]
        if any(x < 0 for a in far for x in a):
            fails.append(k)
        mins.append(min((_sup(a) for a in far), default=None))
    return ClosednessReport(K, fails, maxes, partial, mins, _trend_terms(maxes), _trend_growth(mins), None, divergence_declared)


def closedness_conditions(spec, K: int, Aprime: Sequence | None = None) -> ClosednessReport:
    """Closedness checks for a MoranSpec, or for explicit lists (A, A')."""
    if not isinstance(spec, MoranSpec):
        return closedness_from_sets(spec, Aprime or [[] for _ in range(K)], K)
    maxes, partial, mins, fails = [], [], [], []
    run = Fraction(0)
    cap = Fraction(0)
    denom = Fraction(1)
    p = Fraction(1)
    for k in range(1, K + 1):
        lv = spec.level(k)
        p /= lv.C
        m = p * lv.G.max_sup_norm()
        run += m
        maxes.append(m)
        partial.append(run)
        if not lv.signs_ok():
            fails.append(k)
        f = lv.far_min_sup_norm()
        mins.append(None if f is None else p * f)
        denom *= lv.c + 1
        cap += lv.c / denom
    declared = spec.params.get("far_divergence")
    return ClosednessReport(K, fails, maxes, partial, mins, _trend_terms(maxes), _trend_growth(mins), cap, declared)


def compactness_partial(spec, K: int) -> list[Fraction]:
    """Exact partial sums of Σ_k max_{a ∈ A_k} ||a|| (sup norm).

    A_k is R_1^{-1}...R_k^{-1}B_k for a SequenceSpec, C_1^{-1}...C_k^{-1}B_k for
    a MoranSpec, or the k-th entry of an explicit list.
    """
    out = []
    run = Fraction(0)
    if isinstance(spec, SequenceSpec):
        for k in range(1, K + 1):
            lv = spec.level(k)
            c = spec.scale(k).scalar_value()
            if c is not None:
                m = abs(c) * lv.B.max_sup_norm()
            else:
                P = spec.scale(k)
                m = max(_sup(P @ b) for b in lv.B.points())
            run += m
            out.append(run)
        return out
    if isinstance(spec, MoranSpec):
        p = Fraction(1)
        for k in range(1, K + 1):
            lv = spec.level(k)
            p /= lv.C
            run += p * lv.B.max_sup_norm()
            out.append(run)
        return out
    for A in _scaled_sets(spec, K):
        run += max((_sup(a) for a in A), default=Fraction(0))
        out.append(run)
    return out
