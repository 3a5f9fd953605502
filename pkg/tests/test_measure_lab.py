import math
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speclab.constructions import TargetDims, noncompact_family, quarter_family
from speclab.exact_linalg import Mat
from speclab.fractal_dim import truncated_sumset
from speclab.measure_lab import (
    AtomicMeasure,
    CapExceeded,
    DimensionMismatch,
    EmptySet,
    convolve,
    dirac_uniform,
    finite_convolution,
    fourier,
    fourier_many,
    jessen_wintner_partial,
    sample,
    splitmix64,
    subseed,
)
from speclab.sequence import DigitSet, Level, SequenceSpec
from oracles import dft_abs, splitmix64_ref


def pts(*xs):
    return [(F(x),) for x in xs]


def test_dirac_single():
    mu = dirac_uniform(pts(0))
    assert mu.atoms == {(F(0),): 1}


def test_dirac_pair_and_square():
    assert set(dirac_uniform(pts(0, 2)).atoms.values()) == {F(1, 2)}
    mu = dirac_uniform(DigitSet.cube(2, 2))
    assert len(mu) == 4 and set(mu.atoms.values()) == {F(1, 4)}


def test_dirac_empty():
    with pytest.raises(EmptySet):
        dirac_uniform([])


def test_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        AtomicMeasure({(F(0),): F(1, 2)})


def test_convolve_identity():
    mu = dirac_uniform(pts(0, F(1, 3), 5))
    assert convolve(dirac_uniform(pts(0)), mu) == mu


def test_convolve_distinct_sums():
    mu = convolve(dirac_uniform(pts(0, 1)), dirac_uniform(pts(0, 2)))
    assert mu == dirac_uniform(pts(0, 1, 2, 3))


def test_convolve_binomial_merge():
    mu = convolve(dirac_uniform(pts(0, 1)), dirac_uniform(pts(0, 1)))
    assert mu.atoms == {(F(0),): F(1, 4), (F(1),): F(1, 2), (F(2),): F(1, 4)}


def test_convolve_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        convolve(dirac_uniform(pts(0)), dirac_uniform(DigitSet.cube(1, 2)))


def test_finite_convolution_quarter():
    mu = finite_convolution(quarter_family(1, 2), 2)
    assert mu == dirac_uniform(pts(0, F(1, 8), F(1, 2), F(5, 8)))
    assert finite_convolution(quarter_family(1, 2), 1) == dirac_uniform(pts(0, F(1, 2)))


def test_finite_convolution_matches_sumset_noncompact():
    spec, _ = noncompact_family(TargetDims(1, F(1, 2), F(1)))
    mu = finite_convolution(spec, 2)
    assert mu.support() == truncated_sumset(spec, 2)
    assert len(mu) == 2 * 4


def test_finite_convolution_cap():
    with pytest.raises(CapExceeded):
        finite_convolution(quarter_family(2, 1), 6, cap=1000)


def test_csv_header():
    rows = list(dirac_uniform(pts(0, F(1, 2))).csv_rows())
    assert rows == ["coord_1,weight_num,weight_den", "0,1,2", "1/2,1,2"]


def test_fourier_at_zero():
    mu = finite_convolution(quarter_family(2, 1), 2)
    assert fourier(mu, (0, 0)) == 1


@pytest.mark.parametrize("m", [2, 3, 7])
def test_fourier_roots_of_unity(m):
    mu = dirac_uniform(pts(*range(m)))
    for j in range(1, m):
        assert abs(fourier(mu, (F(j, m),))) < 1e-12


def test_fourier_quarter_factorization():
    spec = quarter_family(1, 2)
    mu = finite_convolution(spec, 5)
    for xi in np.linspace(-3, 7, 41):
        rhs = np.prod([np.mean(np.exp(-2j * np.pi * np.array([0, 2]) * xi / 4**k)) for k in range(1, 6)])
        assert abs(fourier(mu, (float(xi),)) - rhs) < 1e-12


def test_fourier_dimension_check():
    with pytest.raises(DimensionMismatch):
        fourier(dirac_uniform(pts(0)), (0, 0))


def test_jessen_wintner_quarter():
    r = jessen_wintner_partial(quarter_family(1, 2), 20)
    assert r.partial_sum < 2
    expect = sum(0.5 * (2 / 4**k) / (1 + 2 / 4**k) for k in range(1, 21))
    assert abs(r.partial_sum - expect) < 1e-12


def test_jessen_wintner_single_atom():
    spec = SequenceSpec(1, levels=[Level(Mat.diag(3), DigitSet(pts(0)))] * 4)
    assert jessen_wintner_partial(spec, 4).partial_sum == 0


def test_jessen_wintner_noncompact():
    spec, _ = noncompact_family(TargetDims(1, F(1, 2), F(1)))
    r = jessen_wintner_partial(spec, 10)
    assert math.isfinite(r.partial_sum)
    near = 0.0
    for k in range(1, 11):
        P = float(spec.scale(k).rows[0][0])
        m = spec.level(k).m
        near += sum(P * b / (1 + P * b) for b in range(m - 1)) / m
    far_cap = sum(1 / spec.level(k).m for k in range(1, 11))
    assert near < r.partial_sum < near + far_cap


def test_jessen_wintner_cap_reported_for_lattice_families():
    r = jessen_wintner_partial(quarter_family(2, 1), 30)
    assert r.cap == 2 * 2 * math.sqrt(2) and r.partial_sum < r.cap


def test_splitmix_reference_values():
    assert int(splitmix64(0, [0])[0]) == 0xE220A8397B1DCDAF
    for seed in (0, 1, 12345, 2**64 - 1):
        assert [int(x) for x in splitmix64(seed, np.arange(8))] == splitmix64_ref(seed, 8)


def test_subseed_is_stream_entry():
    assert subseed(7, 3) == splitmix64_ref(7, 4)[3]


def test_sample_empty():
    assert sample(quarter_family(1, 2), 30, 0, 1).shape == (0, 1)


def test_sample_mean_quarter():
    X = sample(quarter_family(1, 2), 30, 10**5, 2024)
    assert abs(X.mean() - 1 / 3) < 5e-3


def test_sample_deterministic():
    a = sample(quarter_family(2, 1), 10, 500, 9)
    b = sample(quarter_family(2, 1), 10, 500, 9)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample(quarter_family(2, 1), 10, 500, 10))


def test_samples_near_truncated_sumset():
    spec = quarter_family(1, 2)
    K = 6
    S = np.array(sorted(float(p[0]) for p in truncated_sumset(spec, K)))
    radius = sum(2 / 4**k for k in range(K + 1, 40))
    X = sample(spec, 30, 2000, 5)[:, 0]
    dist = np.min(np.abs(X[:, None] - S[None, :]), axis=1)
    assert np.all(dist <= radius + 1e-12)


rat = st.fractions(-3, 3, max_denominator=8)
measures = st.lists(rat, min_size=1, max_size=5, unique=True).map(lambda xs: dirac_uniform([(x,) for x in xs]))


@given(measures, measures, measures)
def test_convolution_commutative_associative(a, b, c):
    assert convolve(a, b) == convolve(b, a)
    assert convolve(convolve(a, b), c) == convolve(a, convolve(b, c))


@given(measures, measures, st.floats(-20, 20, allow_nan=False))
def test_fourier_multiplicative(a, b, xi):
    lhs = fourier(convolve(a, b), (xi,))
    assert abs(lhs - fourier(a, (xi,)) * fourier(b, (xi,))) < 1e-12
    assert abs(lhs) <= 1 + 1e-12


@given(st.integers(2, 20), st.lists(st.floats(-50, 50, allow_nan=False), min_size=50, max_size=50))
@settings(max_examples=20)
def test_dirichlet_kernel(m, xis):
    mu = dirac_uniform(pts(*range(m)))
    X = np.array(xis)
    X = X[np.abs(X - np.round(X)) > 1e-6]
    lhs = np.abs(fourier_many(mu, X[:, None])) * m
    # the closed form is ill-conditioned near integers in floats, evaluate it in mpmath
    with mpmath.workdps(40):
        rhs = np.array([float(abs(mpmath.sin(m * mpmath.pi * mpmath.mpf(x)) / mpmath.sin(mpmath.pi * mpmath.mpf(x)))) for x in X])
    assert np.allclose(lhs, rhs, atol=1e-10, rtol=0)


@pytest.mark.parametrize("m", [2, 3, 5, 10, 20])
def test_stage_one_bound_on_grid(m):
    xs = np.linspace(-math.sqrt(6) / (m * math.pi), math.sqrt(6) / (m * math.pi), 1001)
    direct = np.array([dft_abs([(b,) for b in range(m)], (x,)) for x in xs])
    assert np.all(direct >= 1 - (m * math.pi * xs) ** 2 / 6 - 1e-12)
