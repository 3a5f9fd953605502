"""Candidate spectra for finite convolutions and their orthonormal-basis checks.

The tower spectrum of a list of Hadamard triples (R_k, B_k, L_k) is

    Λ_n = L_1 + R_1^T L_2 + R_1^T R_2^T L_3 + ... + R_1^T ... R_{n-1}^T L_n.

This ordering matches the pairing <R_k^{-1} b, l> in the unitary matrix of
each triple: for λ built from digits l_1, ..., l_n the phase of the k-th
factor of μ̂_n(λ - λ') only sees l_k - l'_k modulo integer shifts.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exact_linalg import Mat, add, vec
from .hadamard import HadamardTriple
from .measure_lab import AtomicMeasure
from .sequence import enumeration_cap

ORTHO_TOL = 1e-10
EXACT_BASIS_LIMIT = 1024


class CollisionError(ValueError):
    pass


class UnverifiedTriple(ValueError):
    pass


@dataclass(frozen=True)
class Spectrum:
    points: tuple
    provenance: str = "user"  # "tower(n)" or "user"

    def __post_init__(self):
        pts = tuple(vec(p) for p in self.points)
        if len(set(pts)) != len(pts):
            raise ValueError("spectrum points must be pairwise distinct")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def csv_rows(self):
        d = len(self.points[0]) if self.points else 0
        yield ",".join(f"lambda_{i + 1}" for i in range(d))
        for p in self.points:
            yield ",".join(str(x) for x in p)

    @classmethod
    def from_csv(cls, text: str) -> Spectrum:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if lines and not lines[0].replace(",", "").replace("-", "").replace("/", "").strip().isdigit():
            lines = lines[1:]
        return cls(tuple(tuple(Fraction(x) for x in ln.split(",")) for ln in lines), "user")


def tower_spectrum(triples: list[HadamardTriple], n: int) -> Spectrum:
    if n < 1 or n > len(triples):
        raise ValueError(f"need 1 <= n <= {len(triples)}")
    layers = []
    S = Mat.identity(triples[0].R.d)
    for t in triples[:n]:
        if not t.verified:
            raise UnverifiedTriple(f"triple failed verification: {t.describe()}")
        if not (t.R.is_integer() and t.L.is_integer()):
            raise UnverifiedTriple("tower spectra need integer R_k and L_k")
        layers.append([S @ l for l in t.L.points()])
        S = S @ t.R.T
    total = math.prod(len(x) for x in layers)
    if total > enumeration_cap():
        raise ValueError(f"tower of size {total} exceeds the enumeration cap")
    pts = set()
    for combo in itertools.product(*layers):
        p = combo[0]
        for q in combo[1:]:
            p = add(p, q)
        if p in pts:
            raise CollisionError(f"two formal sums coincide at {tuple(map(str, p))}")
        pts.add(p)
    return Spectrum(tuple(sorted(pts)), f"tower({n})")


def _int_phase_matrix(mu: AtomicMeasure, points) -> np.ndarray:
    """frac(<λ, x>) for each rational λ (rows) and atom x (columns), reduced exactly."""
    atoms = sorted(mu.atoms)
    out = np.empty((len(points), len(atoms)))
    for i, lam in enumerate(points):
        for j, x in enumerate(atoms):
            t = sum((a * b for a, b in zip(lam, x)), Fraction(0))
            out[i, j] = float(t - math.floor(t))
    return out


@dataclass(frozen=True)
class OrthogonalityReport:
    ok: bool
    worst_pair: tuple | None
    worst_modulus: float


def check_orthogonality(mu: AtomicMeasure, Lambda: Spectrum, tol: float = ORTHO_TOL) -> OrthogonalityReport:
    """Max of |μ̂(λ - λ')| over unordered pairs, with exact phase reduction."""
    pts = list(Lambda.points)
    if len(pts) < 2:
        return OrthogonalityReport(True, None, 0.0)
    diffs = {}
    for i, j in itertools.combinations(range(len(pts)), 2):
        diffs.setdefault(tuple(a - b for a, b in zip(pts[i], pts[j])), (i, j))
    keys = list(diffs)
    _, w = mu.arrays()
    vals = np.abs(np.exp(-2j * np.pi * _int_phase_matrix(mu, keys)) @ w)
    k = int(np.argmax(vals))
    i, j = diffs[keys[k]]
    worst = float(vals[k])
    return OrthogonalityReport(worst <= tol, (pts[i], pts[j]), worst)


@dataclass(frozen=True)
class ParsevalReport:
    grid_size: int
    max_defect: float
    worst_xi: tuple | None
    values: np.ndarray

    def csv_rows(self, grid):
        g = np.asarray(grid, dtype=float)
        d = g.shape[1]
        yield ",".join(f"xi_{i + 1}" for i in range(d)) + ",Q"
        for row, q in zip(g, self.values):
            yield ",".join(repr(float(x)) for x in row) + f",{float(q)!r}"


def parseval_values(mu: AtomicMeasure, Lambda: Spectrum, grid) -> np.ndarray:
    """Q(ξ) = Σ_λ |μ̂(ξ + λ)|² at every grid row.

    The λ-dependent phase is reduced mod 1 exactly, only <ξ, x> is float.
    """
    coords, w = mu.arrays()
    G = np.asarray(grid, dtype=float).reshape(-1, mu.d)
    lam_phase = np.exp(-2j * np.pi * _int_phase_matrix(mu, Lambda.points))  # (nλ, na)
    xi_phase = np.exp(-2j * np.pi * (G @ coords.T)) * w  # (ng, na)
    vals = xi_phase @ lam_phase.T  # (ng, nλ)
    return np.sum(np.abs(vals) ** 2, axis=1)


def check_parseval(mu: AtomicMeasure, Lambda: Spectrum, grid) -> ParsevalReport:
    if len(Lambda) != len(mu):
        warnings.warn(f"#Λ = {len(Lambda)} differs from the {len(mu)} atoms of μ", stacklevel=2)
    G = np.asarray(grid, dtype=float).reshape(-1, mu.d)
    Q = parseval_values(mu, Lambda, G)
    dev = np.abs(Q - 1.0)
    if len(dev) == 0:
        return ParsevalReport(0, 0.0, None, Q)
    i = int(np.argmax(dev))
    return ParsevalReport(len(G), float(dev[i]), tuple(G[i]), Q)


def exact_basis_defect(mu: AtomicMeasure, Lambda: Spectrum) -> float:
    """Unitarity defect of [sqrt(w_x) e^{-2πi<λ,x>}] when #atoms = #Λ <= 1024."""
    if len(mu) != len(Lambda):
        raise ValueError("the square basis check needs #atoms == #Λ")
    if len(mu) > EXACT_BASIS_LIMIT:
        raise ValueError(f"square basis check limited to {EXACT_BASIS_LIMIT} atoms")
    _, w = mu.arrays()
    V = np.exp(-2j * np.pi * _int_phase_matrix(mu, Lambda.points)).T * np.sqrt(w)[:, None]
    return float(np.max(np.abs(V.conj().T @ V - np.eye(len(mu)))))


def random_grid(d: int, count: int, seed: int) -> np.ndarray:
    """``count`` points uniform in [0,1)^d from the SplitMix64 stream of ``seed``."""
    from .measure_lab import splitmix64

    z = splitmix64(seed, np.arange(count * d, dtype=np.uint64))
    return ((z >> np.uint64(11)).astype(np.float64) / float(1 << 53)).reshape(count, d)
