import math
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speclab.constructions import (
    FAMILIES,
    ScheduleFailure,
    TargetDims,
    block_index,
    block_quotients,
    block_sequence,
    compact_family,
    correction_factors,
    counterexample_inequalities,
    counterexample_prefix,
    far_digit_certificate,
    floor_ln,
    g_gamma,
    is_unit_fraction,
    make_family,
    m_seq,
    moran_family,
    noncompact_family,
    quarter_family,
    r_values,
    schedule_a,
)
from speclab.exact_linalg import cube_in_image, entries_multiple_of
from speclab.hadamard import lattice_report, theorem11_check


@pytest.mark.parametrize("gamma,n,expect", [(1, 7, 14), (F(1, 2), 3, 9), (0, 3, 9), (F(1, 3), 4, 64), (F(2, 3), 8, 16)])
def test_g_gamma_examples(gamma, n, expect):
    assert g_gamma(gamma, n) == expect


def test_g_gamma_domain():
    with pytest.raises(ValueError):
        g_gamma(F(3, 2), 4)
    with pytest.raises(ValueError):
        g_gamma(F(1, 2), 0)


def test_floor_ln():
    assert [floor_ln(n) for n in (1, 2, 3, 7, 8, 20, 21)] == [0, 0, 1, 1, 2, 2, 3]
    assert floor_ln(10**100) == 230


@given(st.fractions(0, 1, max_denominator=12).filter(lambda g: 0 < g < 1), st.integers(1, 10**6))
@settings(max_examples=200)
def test_g_gamma_matches_mpmath(gamma, n):
    p, q = gamma.numerator, gamma.denominator
    with mpmath.workdps(60):
        c = int(mpmath.floor(mpmath.mpf(n) ** (mpmath.mpf(q - p) / p)))
    # mpmath lands just below exact integer roots, settle the floor with integers
    while (c + 1) ** p <= n ** (q - p):
        c += 1
    while c**p > n ** (q - p):
        c -= 1
    assert g_gamma(gamma, n) == c * n


@given(st.fractions(0, 1, max_denominator=12), st.integers(2, 10**4))
@settings(max_examples=100)
def test_g_gamma_multiple_of_n(gamma, n):
    assert g_gamma(gamma, n) % n == 0 and g_gamma(gamma, n) >= n


@pytest.mark.parametrize("gamma", [F(3, 7), F(5, 8), F(2, 3), F(1, 2)])
def test_g_gamma_growth_exponent(gamma):
    m = m_seq(10**4)
    ratio = math.log(g_gamma(gamma, m)) / math.log(m)
    assert abs(ratio - 1 / gamma) < 0.05


def test_block_sequence():
    assert [block_sequence(j) for j in range(1, 5)] == [0, 16, 512, 65536]
    assert block_index(1) == block_index(16) == 1
    assert block_index(17) == 2 and block_index(512) == 2 and block_index(513) == 3


def test_block_quotients_decrease_to_zero():
    q = block_quotients(12)
    assert q[0] == 0
    assert all(b < a for a, b in zip(q[1:], q[2:]))
    # l_j ln l_j / (l_{j+1} - l_j) ~ j² ln 2 / 2^{2j+1}
    assert abs(q[-1] - 144 * math.log(2) / 2**25) < 1e-7


def test_target_dims_validation():
    with pytest.raises(ValueError):
        TargetDims(1, F(1), F(1, 2))
    with pytest.raises(ValueError):
        TargetDims(1, F(1, 2), F(2))


def test_compact_first_levels():
    spec, _ = compact_family(TargetDims(1, F(1, 2), F(1)))
    # block 1 is odd so γ = α/d = 1/2 and N_k = m_k²
    assert [spec.level(k).R.scalar_value() for k in (1, 2, 3)] == [4, 16, 81]
    # block 2 (17 <= k <= 512) uses γ = β/d = 1 and N_k = 2 m_k
    assert spec.level(17).R.scalar_value() == 2 * 17**2


targets = st.integers(1, 2).flatmap(
    lambda d: st.tuples(st.just(d), st.fractions(0, d, max_denominator=4), st.fractions(0, d, max_denominator=4))
).map(lambda t: TargetDims(t[0], min(t[1], t[2]), max(t[1], t[2])))


@given(targets)
@settings(max_examples=5)
def test_compact_invariants(t):
    spec, _ = compact_family(t)
    K = 100
    for k in range(1, K + 1):
        lv = spec.level(k)
        assert lv.m == m_seq(k)
        assert entries_multiple_of(lv.R, lv.m)
        assert cube_in_image(lv.R.T, lv.m)
    assert theorem11_check(spec, K).holds


@given(targets)
@settings(max_examples=5)
def test_noncompact_invariants(t):
    spec, mspec = noncompact_family(t)
    rep = lattice_report(spec, 8)
    for k, r in enumerate(rep.rows, start=1):
        m = m_seq(k)
        assert r.residue_ok and r.excess_count == m**t.d - (m - 1) ** t.d
    for k in range(1, 9):
        assert mspec.level(k).has_far()


def test_far_digit_certificate():
    rows = far_digit_certificate(TargetDims(1, F(1, 2), F(1)), 8)
    assert all(r[3] and r[4] for r in rows)
    assert rows[0][1] == 4 * 1 + 1


def test_correction_factors_tend_to_one():
    c = correction_factors(1000)
    assert c[0] == 0 and abs(c[-1] - 1) < 0.01
    assert all(b >= a for a, b in zip(c[1:], c[2:]))


def test_quarter_family_forms():
    s1 = quarter_family(2, 1)
    assert s1.level(1).L is None and s1.tail_bound == 0
    s2 = quarter_family(1, 2)
    assert s2.level(3).B.points() == [(F(0),), (F(2),)]
    with pytest.raises(ValueError):
        quarter_family(1, 3)


def test_schedule_values():
    assert schedule_a(1) == F(3, 700)
    assert schedule_a(2) == F(3, 7 * 10**6)
    assert schedule_a(3) == F(3, 7 * 10**14)


def test_counterexample_k1():
    p = counterexample_prefix(1)
    assert p.a[0] == F(3, 700) and p.r[0] == F(1, 2)
    assert p.floor_t(1) == 233
    assert p.r[1] == F(1, 163100)
    assert list(p.csv_rows()) == ["k,a_num,a_den,r_num,r_den,floor_t", "1,3,700,1,2,233"]
    assert len(p.A[0]) == 1 + 1 + 2


def test_counterexample_k8_all_checks():
    p = counterexample_prefix(8)
    rep = counterexample_inequalities(p)
    assert rep.ok and not rep.failures()
    assert rep.theorem_backed == ("1 is not in Σ A_k",)


def test_counterexample_perturbed_schedule_fails():
    p = counterexample_prefix(1)
    p.a[1] = 2 * p.r[1]
    rep = counterexample_inequalities(p)
    assert (2, "0 < a_k < r_k") in rep.failures()


def test_counterexample_rejects_bad_K():
    with pytest.raises(ValueError):
        counterexample_prefix(0)


def test_schedule_failure_message():
    e = ScheduleFailure(3, "0 < a_k < r_k")
    assert e.k == 3 and "k=3" in str(e)


@given(st.integers(1, 8))
@settings(max_examples=8)
def test_counterexample_sets_in_unit_interval(K):
    p = counterexample_prefix(K)
    for k, A in enumerate(p.A, start=1):
        assert all(0 <= x[0] <= 1 for x in A)
        assert (F(k, k + 1),) in A and (F(0),) in A
        assert not any(is_unit_fraction(b) for b in p.b[k - 1])


def test_r_values_monotone_in_schedule():
    a = [schedule_a(k) for k in range(1, 6)]
    r = r_values(a)
    assert all(0 < x < y for x, y in zip(a, r))


def test_make_family_names():
    for name in FAMILIES:
        params = {"K": 2} if name == "counterexample" else {}
        spec = make_family(name, params)
        assert spec.level(1) is not None
    with pytest.raises(ValueError):
        make_family("nope")
    assert moran_family("quarter", {"d": 2, "spacing": 2}).level(1).c == 2
