from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from speclab.exact_linalg import (
    AmbiguousResidues,
    Mat,
    NonIntegerMatrix,
    SingularMatrix,
    cube_in_image,
    cube_witness,
    entries_multiple_of,
    invert,
    min_eigenvalue_modulus_at_least,
    residue_equal,
    to_rat,
)
from oracles import brute_residue_equal, inverse_2x2

EX = Mat.parse("4 -2 ; 0 2")


def cube(m, d):
    import itertools

    return [tuple(F(c) for c in p) for p in itertools.product(range(m), repeat=d)]


# --- invert


def test_invert_identity():
    assert invert(Mat.identity(2)) == Mat.identity(2)


def test_invert_example_matrix():
    assert invert(EX) == Mat(((F(1, 4), F(1, 4)), (0, F(1, 2))))


def test_invert_diagonal():
    assert invert(Mat.diag(4, 4)) == Mat.diag(F(1, 4), F(1, 4))


def test_invert_matches_closed_form_2x2():
    M = Mat.parse("3 7 ; -2 5")
    assert invert(M).rows == inverse_2x2(M.rows)


def test_invert_singular():
    with pytest.raises(SingularMatrix):
        invert(Mat.parse("1 2 ; 2 4"))


def test_floats_rejected():
    with pytest.raises(TypeError):
        to_rat(0.5)


def test_parse_rationals_and_format():
    M = Mat.parse("1/2 -3 ; 0 2/3")
    assert M.rows[0][0] == F(1, 2)
    assert Mat.parse(M.format()) == M


def test_det():
    assert EX.det() == 8
    assert Mat.parse("0 1 ; 1 0").det() == -1


int_mats = st.integers(1, 4).flatmap(
    lambda d: st.lists(st.lists(st.integers(-9, 9), min_size=d, max_size=d), min_size=d, max_size=d)
)


@given(int_mats)
@settings(max_examples=100)
def test_invert_roundtrip(rows):
    M = Mat(tuple(map(tuple, rows)))
    assume(M.det() != 0)
    assert invert(M) @ M == Mat.identity(M.d)
    assert M @ invert(M) == Mat.identity(M.d)


# --- cube containment


def test_cube_example_true():
    assert cube_in_image(EX, 2)


def test_cube_example_transpose_false_with_witness():
    assert EX.T == Mat.parse("4 0 ; -2 2")
    assert not cube_in_image(EX.T, 2)
    v, w = cube_witness(EX.T, 2)
    assert v == (2, 2) and w == (F(1, 2), F(3, 2))


@pytest.mark.parametrize("m,d", [(1, 1), (3, 2), (5, 3)])
def test_cube_diag_boundary(m, d):
    assert cube_in_image(Mat.scalar(m, d), m)
    assert not cube_in_image(Mat.scalar(m, d), m + F(1, 100))


def test_cube_singular_raises():
    with pytest.raises(SingularMatrix):
        cube_in_image(Mat.parse("1 1 ; 1 1"), 1)


@given(int_mats, st.fractions(0, 10), st.fractions(0, 1))
def test_cube_monotone(rows, m, t):
    M = Mat(tuple(map(tuple, rows)))
    assume(M.det() != 0)
    if cube_in_image(M, m):
        assert cube_in_image(M, m * t)


# --- divisibility


def test_entries_multiple_of():
    assert entries_multiple_of(EX, 2)
    assert not entries_multiple_of(Mat.identity(2), 2)
    assert entries_multiple_of(Mat.diag(6, 9), 3)


def test_entries_multiple_of_non_integer():
    with pytest.raises(NonIntegerMatrix):
        entries_multiple_of(Mat.diag(F(1, 2), 2), 2)


# --- eigenvalue moduli


def test_eigen_diag_cube():
    assert min_eigenvalue_modulus_at_least(Mat.diag(4, 4), 2).status == "proven_by_cube"


def test_eigen_triangular_proven():
    assert min_eigenvalue_modulus_at_least(EX, 2).proven


def test_eigen_triangular_numeric_path():
    # the cube test fails here, eigenvalues 4 and 2 settle it numerically
    r =min_eigenvalue_modulus_at_least(Mat.parse("4 -8 ; 0 2"), 2)
    assert r.status == "proven_numeric" and abs(r.min_modulus - 2) < 1e-9


def test_eigen_permutation_refuted():
    r = min_eigenvalue_modulus_at_least(Mat.parse("0 1 ; 1 0"), 2)
    assert r.status == "refuted" and abs(r.min_modulus - 1) < 1e-12


@given(int_mats, st.integers(0, 6))
def test_cube_implies_eigen_bound(rows, C):
    M = Mat(tuple(map(tuple, rows)))
    assume(M.det() != 0)
    if cube_in_image(M, C):
        assert min_eigenvalue_modulus_at_least(M, C).status != "refuted"


# --- residues

R4 = Mat.diag(4, 4)


def test_residue_identity():
    assert residue_equal(cube(2, 2), cube(2, 2), R4)


def test_residue_shifted():
    B = [(0, 0), (1, 0), (4, 1), (5, 1)]
    B = [tuple(map(F, b)) for b in B]
    assert residue_equal(B, cube(2, 2), R4)
    assert brute_residue_equal(B, cube(2, 2), invert(R4).rows)


def test_residue_missing_class():
    B = [tuple(map(F, b)) for b in [(0, 0), (2, 0), (0, 1), (1, 1)]]
    assert not residue_equal(B, cube(2, 2), R4)
    assert not brute_residue_equal(B, cube(2, 2), invert(R4).rows)


def test_residue_ambiguous_targets():
    with pytest.raises(AmbiguousResidues):
        residue_equal([(F(0),), (F(1),)], [(F(0),), (F(4),)], Mat.diag(4))


def test_residue_singular():
    with pytest.raises(SingularMatrix):
        residue_equal([(F(0), F(0))], [(F(0), F(0))], Mat.parse("1 1 ; 1 1"))


small_mats_2 = st.lists(st.lists(st.integers(-4, 4), min_size=2, max_size=2), min_size=2, max_size=2)


@given(small_mats_2, st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=4, max_size=4), st.data())
def test_residue_matches_brute_force(rows, shifts, data):
    R = Mat(tuple(map(tuple, rows)))
    assume(abs(R.det()) >= 4)
    U = cube(2, 2)
    try:
        invert(R)
        residue_equal(U, U, R)
    except AmbiguousResidues:
        assume(False)
    B = [tuple(F(u[i] + s[i]) for i in range(2)) for u, s in zip(U, shifts)]
    assume(len(set(B)) == 4)
    assert residue_equal(B, U, R) == brute_residue_equal(B, U, invert(R).rows)


@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=4, max_size=4), st.tuples(st.integers(-5, 5), st.integers(-5, 5)))
def test_residue_translation_invariant(shifts, z):
    R = Mat.parse("4 -2 ; 0 2")
    U = cube(2, 2)
    B = [tuple(F(u[i] + 4 * s[i]) for i in range(2)) for u, s in zip(U, shifts)]
    assume(len(set(B)) == 4)
    Rz = R @ tuple(map(F, z))
    moved = [tuple(b[i] + Rz[i] for i in range(2)) for b in B]
    assert residue_equal(B, U, R) == residue_equal(moved, U, R)
