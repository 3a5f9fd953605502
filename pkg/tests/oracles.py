"""Independent reference implementations used only by the tests."""

import cmath
import itertools
import math
from fractions import Fraction

MASK = (1 << 64) - 1


def splitmix64_ref(seed, n):
    """Textbook SplitMix64: advance the state by the golden gamma, then mix."""
    out = []
    state = seed & MASK
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        out.append(z ^ (z >> 31))
    return out


def inverse_2x2(rows):
    (a, b), (c, d) = rows
    det = Fraction(a) * d - Fraction(b) * c
    return ((d / det, -b / det), (-c / det, a / det))


def brute_residue_equal(B, U, Rinv):
    """Try every bijection B -> U and test integrality of R^{-1}(b - u)."""
    B, U = list(B), list(U)
    if len(B) != len(U):
        return False

    def congruent(b, u):
        diff = [Fraction(x) - Fraction(y) for x, y in zip(b, u)]
        return all(sum(r * x for r, x in zip(row, diff)).denominator == 1 for row in Rinv)

    return any(all(congruent(b, u) for b, u in zip(B, perm)) for perm in itertools.permutations(U))


def sumset_brute(sets):
    out = set()
    for combo in itertools.product(*sets):
        out.add(tuple(sum(c[i] for c in combo) for i in range(len(combo[0]))))
    return out


def dft_abs(points, xi):
    """|(1/#P) Σ e^{-2πi<p,ξ>}| by direct complex summation."""
    s = sum(cmath.exp(-2j * math.pi * sum(float(a) * b for a, b in zip(p, xi))) for p in points)
    return abs(s) / len(points)
