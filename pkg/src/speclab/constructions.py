"""Explicit families: compact and non-compact spectral measures with prescribed
dimension targets, the quarter Cantor family, and a non-closed infinite sum.
"""

from __future__ import annotations

import decimal
import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2

from .exact_linalg import Mat
from .fractal_dim import MoranLevel, MoranSpec
from .sequence import DigitSet, Level, SequenceSpec

FAMILIES = ("quarter", "compact", "noncompact", "counterexample")


@dataclass(frozen=True)
class TargetDims:
    d: int
    alpha: Fraction
    beta: Fraction

    def __post_init__(self):
        a, b = Fraction(self.alpha), Fraction(self.beta)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        if self.d < 1:
            raise ValueError("d must be positive")
        if not 0 <= a <= b <= self.d:
            raise ValueError(f"need 0 <= alpha <= beta <= d, got alpha={a}, beta={b}, d={self.d}")


_LN_CTX = decimal.Context(prec=80)


def floor_ln(n: int) -> int:
    """⌊ln n⌋ for a positive integer, exact for any size of n."""
    if n < 1:
        raise ValueError("n must be positive")
    return int(_LN_CTX.ln(decimal.Decimal(n)).to_integral_value(rounding=decimal.ROUND_FLOOR))


def g_gamma(gamma, n: int) -> int:
    """n^{1+⌊ln n⌋} for γ = 0, ⌊n^{1/γ - 1}⌋·n for 0 < γ < 1, and 2n for γ = 1."""
    gamma = Fraction(gamma)
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be positive")
    if gamma == 0:
        return n ** (1 + floor_ln(n))
    if gamma == 1:
        return 2 * n
    p, q = gamma.numerator, gamma.denominator
    # n^{(q-p)/p} floored, as the integer p-th root of n^{q-p}
    return int(gmpy2.iroot(gmpy2.mpz(n) ** (q - p), p)[0]) * n


def block_sequence(j: int) -> int:
    """l_1 = 0 and l_j = 2^{j²} for j >= 2."""
    if j < 1:
        raise ValueError("j must be positive")
    return 0 if j == 1 else 2 ** (j * j)


def block_index(k: int) -> int:
    """The j with l_j < k <= l_{j+1}."""
    if k < 1:
        raise ValueError("k must be positive")
    j = 1
    while k > block_sequence(j + 1):
        j += 1
    return j


def block_quotients(J: int = 12) -> list[float]:
    """l_j ln l_j / (l_{j+1} - l_j) for j = 1..J (0 at j = 1 where l_1 = 0)."""
    out = []
    for j in range(1, J + 1):
        l, nxt = block_sequence(j), block_sequence(j + 1)
        out.append(0.0 if l == 0 else l * math.log(l) / (nxt - l))
    return out


def m_seq(k: int) -> int:
    return 2 if k == 1 else k * k


class _NCache:
    """N_k and the prefix products N_1...N_k for a target pair, built on demand."""

    def __init__(self, t: TargetDims):
        self.t = t
        self.N = [None]
        self.P = [1]

    def gamma(self, k: int) -> Fraction:
        return (self.t.alpha if block_index(k) % 2 == 1 else self.t.beta) / self.t.d

    def n(self, k: int) -> int:
        while len(self.N) <= k:
            j = len(self.N)
            self.N.append(g_gamma(self.gamma(j), m_seq(j)))
        return self.N[k]

    def prefix(self, k: int) -> int:
        # prefix products are only built on demand: they grow without bound
        while len(self.P) <= k:
            j = len(self.P)
            self.P.append(self.P[-1] * self.n(j))
        return self.P[k]


def compact_family(t: TargetDims) -> tuple[SequenceSpec, MoranSpec]:
    """m_1 = 2, m_k = k², R_k = N_k I and B_k = {0, ..., m_k-1}^d."""
    cache = _NCache(t)
    d = t.d

    def level(k):
        m, N = m_seq(k), cache.n(k)
        return Level(Mat.scalar(N, d), DigitSet.cube(m, d), m)

    def moran(k):
        return MoranLevel(m_seq(k) - 1, cache.n(k), B=DigitSet.cube(m_seq(k), d))

    params = {"alpha": t.alpha, "beta": t.beta, "d": d}
    seq = SequenceSpec(d, generator=level, family="compact", params=params, tail_bound=Fraction(0))
    mor = MoranSpec(d, generator=moran, sizes=lambda k: (m_seq(k) ** d, cache.n(k)), family="compact", params=dict(params))
    seq.n_cache = cache
    return seq, mor


def far_digit(cache: _NCache, k: int) -> int:
    """N_1...N_k·k + m_k - 1."""
    return cache.prefix(k) * k + m_seq(k) - 1


def noncompact_family(t: TargetDims) -> tuple[SequenceSpec, MoranSpec]:
    """Same m_k and N_k, with B_k = {0, ..., m_k-2, N_1...N_k·k + m_k-1}^d."""
    cache = _NCache(t)
    d = t.d

    def digits(k):
        m = m_seq(k)
        return DigitSet.power(list(range(m - 1)) + [far_digit(cache, k)], d)

    def level(k):
        return Level(Mat.scalar(cache.n(k), d), digits(k), m_seq(k))

    def moran(k):
        return MoranLevel(m_seq(k) - 1, cache.n(k), B=digits(k))

    params = {"alpha": t.alpha, "beta": t.beta, "d": d}
    # Σ_k c_k/m_k^d <= (1 - 2^{-d}) + Σ_{k>=2} d/k² < 1 + 2d/3
    tail = 1 + Fraction(2 * d, 3)
    seq = SequenceSpec(d, generator=level, family="noncompact", params=params, tail_bound=tail)
    mor = MoranSpec(
        d,
        generator=moran,
        sizes=lambda k: ((m_seq(k) - 1) ** d, cache.n(k)),
        family="noncompact",
        params=dict(params, far_divergence=True),
    )
    seq.n_cache = cache
    return seq, mor


def far_digit_certificate(t: TargetDims, K: int) -> list[tuple]:
    """(k, F_k, N_k, (F_k - (m_k - 1)) mod N_k == 0, F_k / (N_1...N_k) >= k) for k <= K."""
    cache = _NCache(t)
    out = []
    for k in range(1, K + 1):
        F, N = far_digit(cache, k), cache.n(k)
        out.append((k, F, N, (F - (m_seq(k) - 1)) % N == 0, Fraction(F, cache.prefix(k)) >= k))
    return out


def correction_factors(K: int) -> list[float]:
    """ln(m_k - 1) / ln m_k, the per-level loss from dropping the far digit."""
    return [math.log(m_seq(k) - 1) / math.log(m_seq(k)) for k in range(1, K + 1)]


def quarter_family(d: int = 1, spacing: int = 1) -> SequenceSpec:
    """R_k = 4I with B_k = {0, spacing}^d.

    spacing 1 is the lattice form (m_k = 2, canonical dual {0, 2}^d);
    spacing 2 is the classical quarter Cantor measure with dual {0, 1}^d.
    """
    if spacing not in (1, 2):
        raise ValueError("spacing must be 1 or 2")
    B = DigitSet.power([0, spacing], d)
    L = None if spacing == 1 else DigitSet.power([0, 1], d)
    lv = Level(Mat.scalar(4, d), B, 2, L)
    tail = Fraction(0) if spacing == 1 else None
    return SequenceSpec(d, generator=lambda k: lv, family="quarter", params={"d": d, "spacing": spacing}, tail_bound=tail)


# ---------------------------------------------------------------------------
# non-closed infinite sum


class ScheduleFailure(RuntimeError):
    def __init__(self, k: int, constraint: str):
        super().__init__(f"schedule violates '{constraint}' at k={k}")
        self.k = k
        self.constraint = constraint


def is_unit_fraction(x: Fraction) -> bool:
    return x > 0 and x.numerator == 1


def _floor_inv(x: Fraction) -> int:
    return math.floor(1 / x)


def schedule_a(k: int) -> Fraction:
    """a_k = (3/7)·10^{-s_k} with s_1 = 2, s_{k+1} = 2 s_k + 2."""
    s = 2
    for _ in range(k - 1):
        s = 2 * s + 2
    return Fraction(3, 7 * 10**s)


def r_values(a: list[Fraction]) -> list[Fraction]:
    """r_k = min{2^{-k}, 1/⌊1/a_j⌋ - a_j - ... - a_{k-1} : j < k} for k = 1..len(a)."""
    out = []
    for k in range(1, len(a) + 1):
        cands = [Fraction(1, 2**k)]
        for j in range(1, k):
            cands.append(Fraction(1, _floor_inv(a[j - 1])) - sum(a[j - 1 : k - 1], Fraction(0)))
        out.append(min(cands))
    return out


@dataclass
class CounterexamplePrefix:
    """Exact data for levels k <= K.

    ``a`` and ``r`` carry two look-ahead entries (k = K+1, K+2) and
    ``t_bracket`` one (k = K+1); they bound the tails used at depth K.
    """

    K: int
    a: list
    r: list
    t_bracket: list
    b: list = field(default_factory=list)
    A: list = field(default_factory=list)

    def floor_t(self, k: int) -> int:
        return _floor_inv(self.t_bracket[k - 1][0])

    def csv_rows(self):
        yield "k,a_num,a_den,r_num,r_den,floor_t"
        for k in range(1, self.K + 1):
            a, r = self.a[k - 1], self.r[k - 1]
            yield f"{k},{a.numerator},{a.denominator},{r.numerator},{r.denominator},{self.floor_t(k)}"

    def sequence_spec(self) -> SequenceSpec:
        I = Mat.identity(1)
        return SequenceSpec(1, levels=[Level(I, A) for A in self.A], family="counterexample", params={"K": self.K})


def _b_values(k: int, lo: Fraction, hi: Fraction) -> list[Fraction]:
    n = k * k
    step = (hi - lo) / (n + 1)
    out = []
    for i in range(1, n + 1):
        x = lo + i * step
        if is_unit_fraction(x):
            x = x + step / 2  # midpoint between this node and the next
        out.append(x)
    return out


def _constraint_checks(p: CounterexamplePrefix) -> list[tuple]:
    """(k, constraint, ok) for every construction constraint, recomputed from ``p.a``."""
    r = r_values(p.a)
    out = []
    for k in range(1, len(p.a) + 1):
        a = p.a[k - 1]
        out.append((k, "0 < a_k < r_k", 0 < a < r[k - 1]))
        out.append((k, "a_k not a unit fraction", not is_unit_fraction(a)))
        out.append((k, "r_k recorded exactly", k > len(p.r) or p.r[k - 1] == r[k - 1]))
        if k < len(p.a):
            out.append((k, "a_{k+1} <= a_k / 2", p.a[k] <= a / 2))
    for k in range(1, len(p.t_bracket) + 1):
        lo, hi = p.t_bracket[k - 1]
        out.append((k, "bracket = [a_k, a_k + 2a_{k+1}]", lo == p.a[k - 1] and hi == p.a[k - 1] + 2 * p.a[k]))
        out.append((k, "floor(1/lo) == floor(1/hi)", _floor_inv(lo) == _floor_inv(hi)))
    for k in range(1, p.K + 1):
        f = p.floor_t(k)
        a = p.a[k - 1]
        lo = Fraction(1, f + 1)
        bs = p.b[k - 1] if k <= len(p.b) else []
        out.append((k, "k² distinct b_{k,i}", len(bs) == k * k and len(set(bs)) == len(bs)))
        out.append((k, "b_{k,i} in (1/(floor(1/t_k)+1), a_k)", all(lo < x < a for x in bs)))
        out.append((k, "b_{k,i} not unit fractions", not any(is_unit_fraction(x) for x in bs)))
        if k <= len(p.A):
            A = p.A[k - 1]
            expect = {(Fraction(0),), (a,), (Fraction(k, k + 1),)} | {(x,) for x in bs}
            out.append((k, "A_k = {0} ∪ b ∪ {a_k, k/(k+1)}", set(A) == expect))
            out.append((k, "A_k ⊆ [0, 1]", all(0 <= x[0] <= 1 for x in A)))
    return out


def counterexample_prefix(K: int) -> CounterexamplePrefix:
    if K < 1:
        raise ValueError("K must be positive")
    a = [schedule_a(k) for k in range(1, K + 3)]
    r = r_values(a)
    brackets = [(a[k - 1], a[k - 1] + 2 * a[k]) for k in range(1, K + 2)]
    p = CounterexamplePrefix(K, a, r, brackets)
    for k in range(1, K + 1):
        lo = Fraction(1, p.floor_t(k) + 1)
        bs = _b_values(k, lo, a[k - 1])
        p.b.append(bs)
        pts = [Fraction(0)] + bs + [a[k - 1], Fraction(k, k + 1)]
        p.A.append(DigitSet([(x,) for x in pts]))
    for k, name, ok in _constraint_checks(p):
        if not ok:
            raise ScheduleFailure(k, name)
    return p


@dataclass
class InequalityReport:
    checks: list  # (k, name, ok)
    theorem_backed: tuple = ("1 is not in Σ A_k",)

    @property
    def ok(self) -> bool:
        return all(ok for _, _, ok in self.checks)

    def failures(self) -> list:
        return [(k, n) for k, n, ok in self.checks if not ok]


def witness_membership(p: CounterexamplePrefix, n: int) -> bool:
    """n/(n+1) as Σ x_k with x_n = n/(n+1) and x_k = 0 otherwise (k <= K)."""
    zero = (Fraction(0),)
    return (Fraction(n, n + 1),) in p.A[n - 1] and all(zero in p.A[k - 1] for k in range(1, p.K + 1) if k != n)


def counterexample_inequalities(p: CounterexamplePrefix) -> InequalityReport:
    checks = list(_constraint_checks(p))
    K = p.K
    total = sum(p.a[:K], Fraction(0)) + 2 * p.a[K]
    checks.append((K, "Σ_{k<=K} a_k + 2a_{K+1} < 1", total < 1))
    for n in range(1, K + 1):
        hi = p.t_bracket[n][1]
        checks.append((n, "n/(n+1) + t_{n+1} upper < 1", Fraction(n, n + 1) + hi < 1))
        checks.append((n, "t_{n+1} upper < 2^{-n}", hi < Fraction(1, 2**n)))
    for k in range(1, K + 1):
        checks.append((k, "a_k > 1/(floor(1/t_k)+1)", p.a[k - 1] > Fraction(1, p.floor_t(k) + 1)))
        checks.append((k, "witness k/(k+1) in the sum-set", witness_membership(p, k)))
    return InequalityReport(checks)


def make_family(name: str, params: dict | None = None) -> SequenceSpec:
    """SequenceSpec for a named family with parameters d, alpha, beta, spacing, K."""
    params = dict(params or {})
    if name == "quarter":
        return quarter_family(int(params.get("d", 1)), int(params.get("spacing", 1)))
    if name in ("compact", "noncompact"):
        d = int(params.get("d", 1))
        t = TargetDims(d, Fraction(params.get("alpha", d)), Fraction(params.get("beta", d)))
        return (compact_family if name == "compact" else noncompact_family)(t)[0]
    if name == "counterexample":
        return counterexample_prefix(int(params.get("K", 8))).sequence_spec()
    raise ValueError(f"unknown family {name!r}; expected one of {', '.join(FAMILIES)}")


def moran_family(name: str, params: dict | None = None) -> MoranSpec:
    params = dict(params or {})
    if name in ("compact", "noncompact"):
        d = int(params.get("d", 1))
        t = TargetDims(d, Fraction(params.get("alpha", d)), Fraction(params.get("beta", d)))
        return (compact_family if name == "compact" else noncompact_family)(t)[1]
    if name == "quarter":
        d = int(params.get("d", 1))
        s = int(params.get("spacing", 1))
        # C_k = 4 and G_k = {0, s}^d inside [0, c_k]^d with c_k = s
        lv = MoranLevel(s, 4, DigitSet.power([0, s], d))
        return MoranSpec(d, generator=lambda k: lv, sizes=lambda k: (2**d, Fraction(4)), family="quarter", params=params)
    return MoranSpec.from_sequence(make_family(name, params))
