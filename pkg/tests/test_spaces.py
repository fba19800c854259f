from fractions import Fraction
from math import sqrt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperorbit import SparseVec, ball_contains, c0, lp, norm, norm_sq_exact
from hyperorbit.errors import SpaceMismatchError, UsageError

L2 = lp(2.0)
L1 = lp(1.0)
SUP = c0()


def test_basis_norm_one():
    for space in (L2, L1, SUP):
        assert norm(SparseVec.basis(space, 0)) == 1.0


def test_pythagorean():
    v = SparseVec({0: 3.0, 1: 4.0}, L2)
    assert norm(v) == 5.0


def test_sup_norm():
    v = SparseVec({0: 1.0, 3: 1.0, 7: 1.0}, SUP)
    assert norm(v) == 1.0


def test_zero_norm_iff_zero():
    assert norm(SparseVec.zero(L2)) == 0.0
    assert norm(SparseVec({5: 1e-200}, L2)) > 0.0


def test_no_stored_zeros_and_support():
    v = SparseVec({0: 0.0, 2: 1.5}, L2)
    assert v.support() == [2]


def test_unilateral_rejects_negative_indices():
    with pytest.raises(UsageError):
        SparseVec({-1: 1.0}, L2)
    SparseVec({-1: 1.0}, lp(2.0, bilateral=True))  # fine


def test_ball_examples():
    e0 = SparseVec.basis(L2, 0)
    e1 = SparseVec.basis(L2, 1)
    assert ball_contains(e0, 1.0, e0)
    assert not ball_contains(e0, 1.0, e1)  # distance sqrt(2)
    assert abs(norm(e0 - e1) - sqrt(2)) < 1e-15
    small = SparseVec({2: 0.49}, SUP)
    assert ball_contains(SparseVec.zero(SUP), 0.5, small)


def test_ball_strictness():
    e0 = SparseVec.basis(L2, 0)
    assert not ball_contains(SparseVec.zero(L2), 1.0, e0)  # open ball


def test_ball_space_mismatch():
    with pytest.raises(SpaceMismatchError):
        ball_contains(SparseVec.basis(L2, 0), 1.0, SparseVec.basis(L1, 0))


def test_exact_norm_square():
    v = SparseVec({0: Fraction(1, 2), 10: Fraction(1, 3)}, L2)
    assert norm_sq_exact(v) == Fraction(1, 4) + Fraction(1, 9)


def test_exact_tiny_entries_survive():
    v = SparseVec({0: Fraction(1, 2**8000)}, L2)
    assert norm_sq_exact(v) == Fraction(1, 2**16000)


sparse_floats = st.dictionaries(
    st.integers(0, 30),
    st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False).filter(
        lambda x: x == 0.0 or abs(x) > 1e-100  # keep squares inside the normal range
    ),
    max_size=8,
)


@given(sparse_floats, sparse_floats)
@settings(max_examples=80, deadline=None)
def test_triangle_inequality(a, b):
    for space in (L2, L1, SUP):
        u, v = SparseVec(a, space), SparseVec(b, space)
        lhs = norm(u + v)
        rhs = norm(u) + norm(v)
        assert lhs <= rhs + 1e-9 * max(1.0, rhs)


@given(sparse_floats, st.integers(-20, 20))
@settings(max_examples=60, deadline=None)
def test_power_of_two_homogeneity_exact(a, e):
    lam = 2.0**e
    for space in (L2, SUP):
        v = SparseVec(a, space)
        assert norm(v.scale(lam)) == abs(lam) * norm(v)


@given(sparse_floats)
@settings(max_examples=40, deadline=None)
def test_scaling_never_exceeds_f_norm_bound(a):
    # |lambda| + 1 dominates the scaling of any norm we expose
    for lam in (-2.5, -1.0, 0.25, 3.0):
        v = SparseVec(a, L2)
        assert norm(v.scale(lam)) <= (abs(lam) + 1) * norm(v) + 1e-9


def test_ball_translation_invariance():
    center = SparseVec({0: Fraction(1, 4), 2: Fraction(-3, 8)}, L2)
    v = SparseVec({0: Fraction(1, 2)}, L2)
    shift = SparseVec({1: Fraction(7, 16), 2: Fraction(1, 8)}, L2)
    for r in (0.1, 0.5, 1.0):
        assert ball_contains(center, r, v) == ball_contains(center + shift, r, v + shift)
