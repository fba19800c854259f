"""Shared brute-force oracles.

Every oracle recomputes from definitions by direct scanning, independent of
the closed forms in the package, so frozen expected values in the tests can
be traced to these.
"""

from fractions import Fraction

import pytest


def brute_count(A, a, b):
    return sum(1 for n in range(a, b + 1) if A.contains(n))


def brute_window_extremes(A, horizon, s):
    """(min, max) of |A ∩ ]k, k+s]| over every position k in [0, horizon-s]."""
    counts = [brute_count(A, k + 1, k + s) for k in range(0, horizon - s + 1)]
    return min(counts), max(counts)


def brute_gap_ok(tagged_members):
    """Pairwise scan of (value, level) pairs for the gap property."""
    for i, (v1, k1) in enumerate(tagged_members):
        for v2, k2 in tagged_members[i + 1 :]:
            if v1 == v2 or abs(v2 - v1) < max(k1, k2):
                return False
    return True


def brute_s_member(m, j_cap=12, l_factor=2):
    """Membership in the digit-neighborhood set by scanning (j, l) directly."""
    for j in range(1, j_cap + 1):
        step = 10**j
        for l in range(1, m // step + l_factor):
            if l * step - j < m < l * step + j:
                return True
    return False


def brute_difference(members):
    out = set()
    for a in members:
        for b in members:
            if a >= b:
                out.add(a - b)
    return sorted(out)


def periodic_eta(period, residues, k):
    """Exact density of {n : n in A and n + k in A} for a periodic set."""
    hits = sum(1 for r in range(period) if (r % period) in residues and ((r + k) % period) in residues)
    return Fraction(hits, period)


@pytest.fixture
def rng_seed():
    return 20240811
