import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperorbit import (
    ExplicitSet,
    FactorialBlockSet,
    GeometricSet,
    IntervalUnionSet,
    PeriodicSet,
    SetFamily,
    SquareSet,
    check_gap_family,
    count_window,
    difference_set,
    estimate_densities,
    is_syndetic,
    make_prescribed_density_set,
)
from hyperorbit.errors import NoDataError, UsageError, WindowGridError

from conftest import brute_count, brute_difference, brute_gap_ok, brute_window_extremes


# ---------------------------------------------------------------------------
# window counting against the scanning oracle


def test_count_window_evens():
    assert count_window(PeriodicSet(2, (0,)), 0, 9) == 5


def test_count_window_empty_point():
    assert count_window(PeriodicSet(2, (0,)), 3, 3) == 0


def test_count_window_rejects_reversed():
    with pytest.raises(UsageError):
        count_window(PeriodicSet(2, (0,)), 5, 4)


ZOO = [
    PeriodicSet(2, (0,)),
    PeriodicSet(7, (1, 3, 4)),
    PeriodicSet(1, (0,)),
    PeriodicSet(3, ()),
    ExplicitSet((0, 1, 5, 9, 40, 41, 42, 1000)),
    IntervalUnionSet(((2, 6), (10, 10), (50, 70))),
    SquareSet(),
    GeometricSet(2),
    GeometricSet(3, 1),
    FactorialBlockSet(),
]


@pytest.mark.parametrize("A", ZOO, ids=lambda a: a.describe())
def test_counts_match_scanning_oracle(A):
    rng = random.Random(7)
    for _ in range(25):
        a = rng.randrange(0, 500)
        b = a + rng.randrange(0, 300)
        assert A.count_in(a, b) == brute_count(A, a, b)
        assert A.members_in(a, b) == [n for n in range(a, b + 1) if A.contains(n)]


@given(
    period=st.integers(1, 40),
    res=st.sets(st.integers(0, 39), max_size=6),
    a=st.integers(0, 3000),
    width=st.integers(0, 400),
)
@settings(max_examples=60, deadline=None)
def test_periodic_counts_property(period, res, a, width):
    A = PeriodicSet(period, tuple(r for r in res if r < period))
    assert A.count_in(a, a + width) == brute_count(A, a, a + width)


# ---------------------------------------------------------------------------
# density estimation


def test_evens_densities_near_half():
    r = estimate_densities(PeriodicSet(2, (0,)), 100000, [10, 100, 1000])
    for x in r.as_tuple():
        assert abs(x - Fraction(1, 2)) <= Fraction(1, 1000)


def test_single_residue_periodic_within_window_tolerance():
    # one residue: every window of length s carries count within 1 of s/p
    for p in (2, 3, 7, 11):
        A = PeriodicSet(p, (0,))
        r = estimate_densities(A, 50000, [100, 500])
        for x in r.as_tuple():
            assert abs(x - Fraction(1, p)) <= Fraction(1, 500)


def test_multi_residue_periodic_within_m_over_s():
    A = PeriodicSet(6, (0, 1, 2))
    r = estimate_densities(A, 30000, [300])
    for x in r.as_tuple():
        assert abs(x - Fraction(1, 2)) <= Fraction(3, 300)


def test_factorial_blocks_profile():
    # full window at 9!, negligible prefix mass
    r = estimate_densities(FactorialBlockSet(), math.factorial(10), [9])
    assert r.upper_banach == 1
    assert r.banach_argmax in (math.factorial(9) - 1, math.factorial(9))
    assert r.upper_density < Fraction(1, 100)
    assert r.lower_banach == 0


def test_powers_of_two_upper_density():
    # |{2^k <= 1e6}| = 20: the oracle is the explicit count
    count = len(GeometricSet(2).members_in(0, 10**6))
    assert count == 20
    r = estimate_densities(GeometricSet(2), 10**6, [1000])
    assert r.upper_density <= Fraction(20, 10**6)


def test_window_grid_validation():
    with pytest.raises(WindowGridError):
        estimate_densities(PeriodicSet(2, (0,)), 50, [100])


def test_banach_bracket_matches_full_scan():
    # the scanned max/min window counts must bracket the exhaustive scan
    A = ExplicitSet(tuple(sorted(random.Random(3).sample(range(400), 120))))
    s = 40
    r = estimate_densities(A, 400, [s])
    lo, hi = brute_window_extremes(A, 400, s)
    assert r.upper_banach <= Fraction(hi, s)
    assert r.lower_banach >= Fraction(lo, s)
    # aligned positions are always scanned, so the bracket is attained there
    assert r.upper_banach >= Fraction(lo, s)


@given(
    period=st.integers(1, 30),
    res=st.sets(st.integers(0, 29), min_size=0, max_size=8),
    horizon=st.integers(200, 4000),
)
@settings(max_examples=50, deadline=None)
def test_density_chain_property(period, res, horizon):
    A = PeriodicSet(period, tuple(r for r in res if r < period))
    r = estimate_densities(A, horizon, [10, max(20, horizon // 20)])
    lb, ld, ud, ub = r.as_tuple()
    assert 0 <= lb <= ld <= ud <= ub <= 1


# ---------------------------------------------------------------------------
# syndeticity evidence


def test_evens_syndetic():
    ev = is_syndetic(PeriodicSet(2, (0,)), 100000)
    assert ev.syndetic and ev.gap_bound == 2


def test_squares_not_syndetic():
    ev = is_syndetic(SquareSet(), 10**4)
    assert not ev.syndetic
    assert ev.largest_gap == 199  # gap before 100^2 = 10000


def test_syndetic_needs_data():
    with pytest.raises(NoDataError):
        is_syndetic(ExplicitSet(()), 100)


def test_progression_difference_set_syndetic():
    # single-residue progressions have syndetic difference sets at any horizon
    A = PeriodicSet(128, (64,))
    D = difference_set(A, 100000)
    ev = is_syndetic(D, 50000)
    assert ev.syndetic and ev.gap_bound == 128


def test_dying_set_not_syndetic():
    ev = is_syndetic(ExplicitSet(tuple(range(0, 11))), 10000)
    assert not ev.syndetic


# ---------------------------------------------------------------------------
# difference sets


def test_difference_examples():
    assert difference_set(ExplicitSet((0, 3, 6)), 10).members == (0, 3, 6)
    assert difference_set(ExplicitSet((1, 4)), 10).members == (0, 3)


def test_difference_multiples_of_three():
    D = difference_set(PeriodicSet(3, (0,)), 30)
    assert D.members == tuple(range(0, 31, 3))


def test_difference_contains_zero_when_nonempty():
    assert 0 in difference_set(ExplicitSet((17,)), 100)


@given(st.sets(st.integers(0, 200), min_size=1, max_size=40))
@settings(max_examples=50, deadline=None)
def test_difference_matches_pair_oracle(members):
    A = ExplicitSet(tuple(members))
    D = difference_set(A, 200)
    assert list(D.members) == brute_difference(sorted(members))


def test_difference_numpy_path_matches_oracle():
    A = PeriodicSet(2, (0,))  # 2001 members below 4000: bitmap path
    D = difference_set(A, 4000)
    assert list(D.members) == list(range(0, 4001, 2))


# ---------------------------------------------------------------------------
# gap families


def test_gap_family_single_full_set():
    fam = SetFamily("full", (PeriodicSet(1, (0,)),))
    assert check_gap_family(fam, 200).ok


def test_gap_family_detects_collision():
    fam = SetFamily(
        "clash", (ExplicitSet((10, 20, 30)), ExplicitSet((21,)))
    )  # |21 - 20| = 1 < max(1, 2)
    res = check_gap_family(fam, 100)
    assert not res.ok
    assert res.violation[4] == 2


def test_gap_family_decade_progressions_overlap():
    # multiples of 100 and of 10000 share 10000 itself
    fam = SetFamily(
        "decades",
        (PeriodicSet(100, (0,)), PeriodicSet(10000, (0,))),
    )
    res = check_gap_family(fam, 20000)
    assert not res.ok
    v1, k1, v2, k2, _ = res.violation
    assert v1 == v2  # the shared member, reported as the witnessing pair


@given(
    st.lists(st.sets(st.integers(0, 300), max_size=12), min_size=1, max_size=4)
)
@settings(max_examples=60, deadline=None)
def test_gap_family_matches_pair_oracle(level_sets):
    fam = SetFamily("rand", tuple(ExplicitSet(tuple(s)) for s in level_sets))
    tagged = []
    for k, s in fam.enumerate_levels():
        tagged.extend((m, k) for m in s.members)
    got = check_gap_family(fam, 300).ok
    assert got == brute_gap_ok(sorted(tagged))


# ---------------------------------------------------------------------------
# prescribed densities


def test_prescribed_constant_half_is_periodic():
    A = make_prescribed_density_set(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))
    assert isinstance(A, PeriodicSet)
    r = estimate_densities(A, A.recommended_horizon, [A.recommended_window])
    for x in r.as_tuple():
        assert abs(x - Fraction(1, 2)) <= Fraction(1, 100)


def test_prescribed_block_extremes():
    A = make_prescribed_density_set(0, 0, 0, 1)
    r = estimate_densities(A, A.recommended_horizon, [A.recommended_window], A.recommended_tail_factor)
    lb, ld, ud, ub = r.as_tuple()
    assert lb == 0 and ub == 1
    assert ud <= Fraction(1, 20)


def test_prescribed_mixed_targets():
    targets = (0, Fraction(1, 5), Fraction(1, 2), 1)
    A = make_prescribed_density_set(*targets)
    r = estimate_densities(A, A.recommended_horizon, [A.recommended_window], A.recommended_tail_factor)
    for got, want in zip(r.as_tuple(), targets):
        assert abs(got - Fraction(want)) <= Fraction(1, 20)


def test_prescribed_rejects_bad_order():
    with pytest.raises(UsageError):
        make_prescribed_density_set(Fraction(1, 2), Fraction(1, 4), Fraction(3, 4), 1)


# ---------------------------------------------------------------------------
# serialization round trips


@pytest.mark.parametrize("A", ZOO, ids=lambda a: a.describe())
def test_describe_round_trip(A):
    from hyperorbit.io_text import parse_set_spec

    B = parse_set_spec(A.describe())
    for n in list(range(0, 60)) + [720, 5040, 1024]:
        assert A.contains(n) == B.contains(n)
