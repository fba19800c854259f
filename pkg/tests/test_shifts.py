from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperorbit import (
    ConstantWeights,
    DoublingResetWeights,
    RatioPowerWeights,
    ShiftOperator,
    SparseVec,
    TableWeights,
    apply_backward,
    apply_right_inverse,
    lp,
    mixing_test,
    norm,
    product_exponent,
    reciprocal_product_series,
)
from hyperorbit.errors import ZeroWeightError

L2 = lp(2.0)
DOUBLING = ShiftOperator(ConstantWeights(2.0), L2)


def test_constant_shift_example():
    v = SparseVec.basis(L2, 5)
    out = apply_backward(DOUBLING, v, 5)
    assert out.entries == {0: 32.0}


def test_annihilates_low_entries():
    out = apply_backward(DOUBLING, SparseVec.basis(L2, 0), 1)
    assert not out


def test_reset_weights_shift_matches_brute_product():
    # product of w_1..w_101 computed by direct multiplication
    w = DoublingResetWeights()
    prod = Fraction(1)
    for k in range(1, 102):
        prod *= Fraction(w.weight(k)).limit_denominator(1 << 60)
    assert prod == Fraction(8)
    T = ShiftOperator(w, lp(2.0))
    out = apply_backward(T, SparseVec.basis(lp(2.0), 101, Fraction(1)), 101)
    assert out.entries == {0: Fraction(8)}
    assert product_exponent(101) == 3


def test_right_inverse_examples():
    out = apply_right_inverse(DOUBLING, SparseVec.basis(L2, 0, Fraction(1)), 3)
    assert out.entries == {3: Fraction(1, 8)}
    v = SparseVec({2: 0.75}, L2)
    assert apply_right_inverse(DOUBLING, v, 0) is v


def test_zero_weight_rejected():
    T = ShiftOperator(TableWeights([1.0, 0.0, 1.0]), L2)
    with pytest.raises(ZeroWeightError) as err:
        apply_right_inverse(T, SparseVec.basis(L2, 0), 3)
    assert err.value.index == 2


dyadic_vec = st.dictionaries(
    st.integers(0, 40),
    st.fractions(min_value=-8, max_value=8).map(lambda f: f.limit_denominator(64)),
    min_size=1,
    max_size=6,
)


@given(dyadic_vec, st.integers(0, 50))
@settings(max_examples=60, deadline=None)
def test_round_trip_identity(entries, n):
    v = SparseVec(entries, L2)
    assert apply_backward(DOUBLING, apply_right_inverse(DOUBLING, v, n), n) == v


@given(dyadic_vec, dyadic_vec, st.integers(0, 12))
@settings(max_examples=50, deadline=None)
def test_linearity_exact_on_dyadics(a, b, n):
    u, v = SparseVec(a, L2), SparseVec(b, L2)
    lhs = apply_backward(DOUBLING, u + v, n)
    rhs = apply_backward(DOUBLING, u, n) + apply_backward(DOUBLING, v, n)
    assert lhs == rhs


@given(dyadic_vec, st.integers(0, 10), st.integers(0, 10))
@settings(max_examples=50, deadline=None)
def test_semigroup_property(entries, m, n):
    v = SparseVec(entries, L2)
    two_step = apply_backward(DOUBLING, apply_backward(DOUBLING, v, m), n)
    assert two_step == apply_backward(DOUBLING, v, m + n)


@pytest.mark.parametrize("w", [ConstantWeights(2.0), DoublingResetWeights()])
@pytest.mark.parametrize("m,n", [(0, 3), (2, 5), (7, 11)])
def test_basis_norm_matches_log_product(w, m, n):
    T = ShiftOperator(w, L2)
    out = apply_backward(T, SparseVec.basis(L2, m + n, Fraction(1)), n)
    got = norm(out)
    expo = w.log2_product_range(m + 1, m + n)
    assert got == float(2.0**expo)


# ---------------------------------------------------------------------------
# series and mixing


def test_geometric_series_to_one_third():
    rep = reciprocal_product_series(ConstantWeights(2.0), 2.0, 2000)
    assert abs(rep.partial_sum - 1 / 3) < 1e-6
    assert rep.converging()


def test_slow_growth_series_diverges():
    # products (n+1)^(1/p): terms 1/(n+1), the tail never settles
    rep = reciprocal_product_series(RatioPowerWeights(2.0), 2.0, 5000)
    harmonic = sum(1.0 / (n + 1) for n in range(1, 5001))
    assert abs(rep.partial_sum - harmonic) < 1e-9
    assert not rep.converging()


def test_unit_weights_series_diverges():
    rep = reciprocal_product_series(ConstantWeights(1.0), 2.0, 500)
    assert rep.partial_sum == 500.0
    assert not rep.converging()


def test_mixing_verdicts():
    assert mixing_test(RatioPowerWeights(2.0), 10000).tends_to_infinity
    assert mixing_test(ConstantWeights(2.0), 1000).tends_to_infinity
    assert not mixing_test(ConstantWeights(1.0), 1000).tends_to_infinity


def test_reset_weights_not_mixing():
    # the partial product returns to 1 at every index outside the driving set
    rep = mixing_test(DoublingResetWeights(), 10000)
    assert not rep.tends_to_infinity
    assert min(rep.block_minima) == 0.0
