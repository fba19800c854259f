"""Exact integer index sets, window counts, and density estimation.

A set of non-negative integers is exposed through a pure membership
predicate plus an exact counter over closed windows [a, b].  Structured
sets answer both symbolically, never by scanning from zero, so sets whose
interesting members sit near 10**100 remain usable.

Density estimates are `fractions.Fraction` ratios.  The estimator is
designed so that the chain

    lower_banach <= lower_density <= upper_density <= upper_banach

holds exactly, not merely up to rounding:

* the Banach bounds are the min/max count over every aligned window
  ]i*s, (i+1)*s] of the largest grid length s (plus structural anchor
  and uniformly sampled positions, which only widen the bracket);
* the upper density estimate is the prefix ratio over ]0, q*s] with
  q = horizon // s, and the lower density estimate is the minimum prefix
  ratio over tail checkpoints t*s (t within a configurable factor of q).
  Every such prefix is a disjoint union of aligned windows, hence its
  ratio is trapped between the scanned window minimum and maximum.

Finite-horizon numbers are evidence, never proofs; reports carry the
horizon and the positions that achieved each extreme.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, isqrt

from .errors import NoDataError, UsageError, WindowGridError

# ---------------------------------------------------------------------------
# set kinds


class IndexSet:
    """Base class: a subset of the non-negative integers.

    Subclasses implement `contains` and `members_in`; `count_in` has a
    generic implementation but structured kinds override it with closed
    forms.  All instances are immutable and safe to share.
    """

    kind = "derived"

    def contains(self, n) -> bool:
        raise NotImplementedError

    def __contains__(self, n) -> bool:
        return self.contains(n)

    def members_in(self, lo, hi) -> list:
        """Sorted members in the closed range [lo, hi]."""
        raise NotImplementedError

    def count_in(self, lo, hi) -> int:
        if lo > hi:
            return 0
        return len(self.members_in(lo, hi))

    def anchors(self, horizon) -> list:
        """Structural window-anchor candidates (block starts and the like)."""
        return self.members_in(0, horizon)[:32]

    def all_members(self):
        """All members, for finite sets only."""
        raise UsageError(f"{type(self).__name__} is not finitely enumerable")

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ExplicitSet(IndexSet):
    members: tuple

    kind = "explicit-list"

    def __post_init__(self):
        ms = tuple(sorted(set(self.members)))
        if ms and ms[0] < 0:
            raise UsageError("explicit sets live in the non-negative integers")
        object.__setattr__(self, "members", ms)

    def contains(self, n):
        i = bisect.bisect_left(self.members, n)
        return i < len(self.members) and self.members[i] == n

    def members_in(self, lo, hi):
        i = bisect.bisect_left(self.members, lo)
        j = bisect.bisect_right(self.members, hi)
        return list(self.members[i:j])

    def count_in(self, lo, hi):
        if lo > hi:
            return 0
        return bisect.bisect_right(self.members, hi) - bisect.bisect_left(self.members, lo)

    def all_members(self):
        return list(self.members)

    def anchors(self, horizon):
        ms = self.members_in(0, horizon)
        if len(ms) <= 48:
            return ms
        step = len(ms) // 48
        return ms[::step]

    def describe(self):
        return "explicit:" + ",".join(str(m) for m in self.members)


@dataclass(frozen=True)
class PeriodicSet(IndexSet):
    period: int
    residues: tuple

    kind = "periodic"

    def __post_init__(self):
        if self.period < 1:
            raise UsageError("period must be >= 1")
        rs = tuple(sorted({r % self.period for r in self.residues}))
        object.__setattr__(self, "residues", rs)

    def contains(self, n):
        return n >= 0 and (n % self.period) in self.residues

    def _count_upto(self, n):
        # members in [0, n]
        if n < 0:
            return 0
        q, rem = divmod(n + 1, self.period)
        extra = sum(1 for r in self.residues if r < rem)
        return q * len(self.residues) + extra

    def count_in(self, lo, hi):
        if lo > hi:
            return 0
        return self._count_upto(hi) - self._count_upto(max(lo, 0) - 1)

    def members_in(self, lo, hi):
        lo = max(lo, 0)
        if lo > hi:
            return []
        out = []
        base = (lo // self.period) * self.period
        n = base
        while n <= hi:
            for r in self.residues:
                m = n + r
                if lo <= m <= hi:
                    out.append(m)
            n += self.period
        return out

    def anchors(self, horizon):
        return [r for r in self.residues if r <= horizon][:8]

    def describe(self):
        return f"periodic:{self.period}:" + ",".join(str(r) for r in self.residues)


@dataclass(frozen=True)
class IntervalUnionSet(IndexSet):
    """Finite union of closed integer intervals [a, b]."""

    intervals: tuple

    kind = "interval-union"

    def __post_init__(self):
        merged = merge_intervals(self.intervals)
        if merged and merged[0][0] < 0:
            raise UsageError("intervals live in the non-negative integers")
        object.__setattr__(self, "intervals", tuple(merged))

    def contains(self, n):
        i = bisect.bisect_right(self.intervals, (n, float("inf"))) - 1
        return i >= 0 and self.intervals[i][0] <= n <= self.intervals[i][1]

    def count_in(self, lo, hi):
        if lo > hi:
            return 0
        total = 0
        for a, b in self.intervals:
            u, v = max(a, lo), min(b, hi)
            if u <= v:
                total += v - u + 1
        return total

    def members_in(self, lo, hi):
        out = []
        for a, b in self.intervals:
            u, v = max(a, lo), min(b, hi)
            if u <= v:
                out.extend(range(u, v + 1))
        return out

    def all_members(self):
        return self.members_in(self.intervals[0][0], self.intervals[-1][1]) if self.intervals else []

    def anchors(self, horizon):
        return [a for a, _ in self.intervals if a <= horizon][:64]

    def describe(self):
        return "intervals:" + ",".join(f"{a}-{b}" for a, b in self.intervals)


class BlockFunctionSet(IndexSet):
    """Union of blocks [start(j), end(j)], j >= j_min, with strictly growing starts."""

    kind = "block-family"

    def __init__(self, j_min=1):
        self.j_min = j_min

    def block(self, j):
        raise NotImplementedError

    def _blocks_upto(self, hi):
        out = []
        j = self.j_min
        while True:
            a, b = self.block(j)
            if a > hi:
                break
            out.append((a, min(b, hi)))
            j += 1
        return merge_intervals(out)

    def contains(self, n):
        if n < 0:
            return False
        j = self.j_min
        while True:
            a, b = self.block(j)
            if a > n:
                return False
            if a <= n <= b:
                return True
            j += 1

    def count_in(self, lo, hi):
        if lo > hi:
            return 0
        total = 0
        for a, b in self._blocks_upto(hi):
            u, v = max(a, lo), min(b, hi)
            if u <= v:
                total += v - u + 1
        return total

    def members_in(self, lo, hi):
        out = []
        for a, b in self._blocks_upto(hi):
            u, v = max(a, lo), min(b, hi)
            if u <= v:
                out.extend(range(u, v + 1))
        return out

    def anchors(self, horizon):
        return [a for a, _ in self._blocks_upto(horizon)][:64]


class FactorialBlockSet(BlockFunctionSet):
    """Union of blocks [j!, j! + j]: density zero along prefixes, full windows at j!."""

    def block(self, j):
        f = factorial(j)
        return f, f + j

    def describe(self):
        return "factorial-blocks"

    def __reduce__(self):
        return (FactorialBlockSet, ())


class GeometricSet(IndexSet):
    """Powers base**j, j >= min_exponent."""

    kind = "derived"

    def __init__(self, base, min_exponent=0):
        if base < 2:
            raise UsageError("base must be >= 2")
        self.base = base
        self.min_exponent = min_exponent

    def contains(self, n):
        if n < 1:
            return False
        p = self.base ** self.min_exponent
        while p < n:
            p *= self.base
        return p == n

    def members_in(self, lo, hi):
        out = []
        p = self.base ** self.min_exponent
        while p <= hi:
            if p >= lo:
                out.append(p)
            p *= self.base
        return out

    def anchors(self, horizon):
        return self.members_in(0, horizon)

    def describe(self):
        if self.min_exponent:
            return f"powers:{self.base}:{self.min_exponent}"
        return f"powers:{self.base}"


class SquareSet(IndexSet):
    """Perfect squares k*k, k >= 0."""

    kind = "derived"

    def contains(self, n):
        return n >= 0 and isqrt(n) ** 2 == n

    def members_in(self, lo, hi):
        lo = max(lo, 0)
        if lo > hi:
            return []
        k = isqrt(max(lo - 1, 0))
        while k * k < lo:
            k += 1
        out = []
        while k * k <= hi:
            out.append(k * k)
            k += 1
        return out

    def count_in(self, lo, hi):
        if hi < 0 or lo > hi:
            return 0
        lo = max(lo, 0)
        below = isqrt(hi)
        above = isqrt(lo - 1) if lo > 0 else -1
        return below - above

    def describe(self):
        return "squares"


@dataclass(frozen=True)
class SegmentPatternSet(IndexSet):
    """Piecewise-periodic set: on [start, end) membership is (n - start) % den < num.

    Segments are disjoint, sorted, and the set is empty beyond the last one.
    This is the output shape of the prescribed-density generator.
    """

    segments: tuple  # tuple of (start, end, num, den)

    kind = "block-family"

    def contains(self, n):
        if n < 0:
            return False
        starts = [seg[0] for seg in self.segments]
        i = bisect.bisect_right(starts, n) - 1
        if i < 0:
            return False
        start, end, num, den = self.segments[i]
        return n < end and (n - start) % den < num

    @staticmethod
    def _seg_count(start, num, den, u, v):
        # members of the segment pattern in [u, v], both inside the segment
        if num == 0 or u > v:
            return 0

        def upto(x):
            # offsets 0..x
            q, r = divmod(x + 1, den)
            return q * num + min(r, num)

        return upto(v - start) - (upto(u - start - 1) if u > start else 0)

    def count_in(self, lo, hi):
        if lo > hi:
            return 0
        lo = max(lo, 0)
        total = 0
        for start, end, num, den in self.segments:
            u, v = max(start, lo), min(end - 1, hi)
            if u <= v:
                total += self._seg_count(start, num, den, u, v)
        return total

    def members_in(self, lo, hi):
        lo = max(lo, 0)
        out = []
        for start, end, num, den in self.segments:
            u, v = max(start, lo), min(end - 1, hi)
            for n in range(u, v + 1):
                if (n - start) % den < num:
                    out.append(n)
        return out

    def anchors(self, horizon):
        out = []
        for start, end, _, _ in self.segments:
            if start <= horizon:
                out.append(start)
            if end <= horizon:
                out.append(end)
        return out[:128]

    def describe(self):
        parts = [f"{s}:{e}:{n}:{d}" for s, e, n, d in self.segments]
        return "segments:" + ";".join(parts)


def merge_intervals(intervals):
    ivs = sorted((a, b) for a, b in intervals if a <= b)
    merged = []
    for a, b in ivs:
        if merged and a <= merged[-1][1] + 1:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return merged


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class SetFamily:
    """An ordered family A_1, ..., A_K of index sets."""

    label: str
    sets: tuple

    def __len__(self):
        return len(self.sets)

    def level(self, k) -> IndexSet:
        return self.sets[k - 1]

    def enumerate_levels(self):
        return [(k + 1, s) for k, s in enumerate(self.sets)]


@dataclass(frozen=True)
class GapCheckResult:
    ok: bool
    pairs_checked: int
    violation: tuple | None = None  # (value, k, value', k', required)

    def __bool__(self):
        return self.ok


def _gap_at_least(x, y, bound):
    """|y - x| >= bound for plain ints or lazily huge values (x <= y)."""
    if isinstance(x, int) and isinstance(y, int):
        return y - x >= bound
    # lazily huge values implement gap_at_least themselves
    big, small = (x, y) if not isinstance(x, int) else (y, x)
    return big.gap_at_least(small, bound)


def check_gap_family(family: SetFamily, horizon=None) -> GapCheckResult:
    """Verify |j - j'| >= max(k, k') for distinct members across all levels.

    Checking consecutive members of the merged sorted list suffices: gaps of
    non-adjacent members are sums of consecutive gaps, and each consecutive
    gap already dominates the larger of its two level indices.
    """
    tagged = []
    for k, s in family.enumerate_levels():
        members = s.all_members() if horizon is None else s.members_in(0, horizon)
        tagged.extend((m, k) for m in members)
    tagged.sort(key=lambda t: t[0])
    for (v1, k1), (v2, k2) in itertools.pairwise(tagged):
        need = max(k1, k2)
        if v1 == v2 or not _gap_at_least(v1, v2, need):
            return GapCheckResult(False, len(tagged), (v1, k1, v2, k2, need))
    return GapCheckResult(True, len(tagged))


# ---------------------------------------------------------------------------
# window counts and densities


def count_window(A: IndexSet, a, b) -> int:
    """Exact |A ∩ [a, b]| over the closed window."""
    if a > b:
        raise UsageError(f"window [{a}, {b}] is empty the wrong way around")
    return A.count_in(a, b)


@dataclass(frozen=True)
class WindowStats:
    window: int
    min_ratio: Fraction
    max_ratio: Fraction
    argmin: int
    argmax: int


@dataclass(frozen=True)
class DensityReport:
    lower_banach: Fraction
    lower_density: Fraction
    upper_density: Fraction
    upper_banach: Fraction
    horizon: int
    effective_horizon: int
    window_grid: tuple
    window: int
    tail_factor: int
    banach_argmin: int
    banach_argmax: int
    lower_density_at: int
    per_window: dict = field(default_factory=dict)
    anchor_positions: tuple = ()

    def __post_init__(self):
        chain = (self.lower_banach, self.lower_density, self.upper_density, self.upper_banach)
        for x in chain:
            if not 0 <= x <= 1:
                raise AssertionError(f"density estimate {x} outside [0, 1]")
        if not (chain[0] <= chain[1] <= chain[2] <= chain[3]):
            raise AssertionError(f"density chain violated: {chain}")

    def as_tuple(self):
        return (self.lower_banach, self.lower_density, self.upper_density, self.upper_banach)


def estimate_densities(
    A: IndexSet,
    horizon: int,
    window_grid=None,
    tail_factor: int = 8,
    workers: int = 1,
) -> DensityReport:
    """Four finite-horizon density estimates with the exact chain property.

    See the module docstring for the estimator definition.  `tail_factor`
    bounds how deep into the prefix the lower-density checkpoints reach:
    checkpoints are the multiples of the largest window length s inside
    [effective_horizon / tail_factor, effective_horizon].
    """
    if window_grid is None:
        grid = tuple(s for s in (10, 100, 1000, 10000) if s <= max(1, horizon // 4)) or (1,)
    else:
        grid = tuple(sorted(set(int(s) for s in window_grid)))
        if not grid or grid[0] < 1:
            raise WindowGridError("window lengths must be >= 1")
        if horizon < grid[-1]:
            raise WindowGridError(
                f"horizon {horizon} is smaller than the largest window {grid[-1]};"
                " shrink the grid or extend the horizon"
            )
    s = grid[-1]
    q = horizon // s
    if q < 1:
        raise WindowGridError(f"horizon {horizon} holds no window of length {s}")

    counts = _aligned_counts(A, s, q, workers)

    best_max, argmax = counts[0], 0
    best_min, argmin = counts[0], 0
    for i, c in enumerate(counts):
        if c > best_max:
            best_max, argmax = c, i * s
        if c < best_min:
            best_min, argmin = c, i * s

    anchor_pos = _anchor_positions(A, horizon, s)
    for k in anchor_pos:
        c = A.count_in(k + 1, k + s)
        if c > best_max:
            best_max, argmax = c, k
        if c < best_min:
            best_min, argmin = c, k

    upper_banach = Fraction(best_max, s)
    lower_banach = Fraction(best_min, s)

    prefix = list(itertools.accumulate(counts))
    upper_density = Fraction(prefix[-1], q * s)
    t0 = max(1, -(-q // tail_factor))  # ceil(q / tail_factor)
    lower_density = upper_density
    lower_at = q * s
    for t in range(t0, q + 1):
        r = Fraction(prefix[t - 1], t * s)
        if r < lower_density:
            lower_density, lower_at = r, t * s

    per_window = {}
    for si in grid:
        if si == s:
            per_window[si] = WindowStats(si, lower_banach, upper_banach, argmin, argmax)
            continue
        qi = horizon // si
        stride = max(1, qi // 2048)
        mn = mx = None
        ami = amx = 0
        for i in range(0, qi, stride):
            c = A.count_in(i * si + 1, i * si + si)
            if mx is None or c > mx:
                mx, amx = c, i * si
            if mn is None or c < mn:
                mn, ami = c, i * si
        per_window[si] = WindowStats(si, Fraction(mn, si), Fraction(mx, si), ami, amx)

    return DensityReport(
        lower_banach=lower_banach,
        lower_density=lower_density,
        upper_density=upper_density,
        upper_banach=upper_banach,
        horizon=horizon,
        effective_horizon=q * s,
        window_grid=grid,
        window=s,
        tail_factor=tail_factor,
        banach_argmin=argmin,
        banach_argmax=argmax,
        lower_density_at=lower_at,
        per_window=per_window,
        anchor_positions=tuple(anchor_pos[:64]),
    )


def _count_one_window(args):
    A, s, i = args
    return A.count_in(i * s + 1, i * s + s)


def _aligned_counts(A, s, q, workers):
    from ._parallel import pmap

    if workers > 1:
        return pmap(_count_one_window, [(A, s, i) for i in range(q)], workers)
    return [A.count_in(i * s + 1, i * s + s) for i in range(q)]


def _anchor_positions(A, horizon, s):
    out = set()
    try:
        raw = A.anchors(horizon)
    except NotImplementedError:
        raw = []
    for a in raw:
        if not isinstance(a, int):
            continue
        for k in (a - 1, a):
            if 0 <= k <= horizon - s:
                out.add(k)
    stride = max(1, (horizon - s) // 64)
    for k in range(0, horizon - s + 1, stride):
        out.add(k)
    return sorted(out)


# ---------------------------------------------------------------------------
# syndeticity evidence


@dataclass(frozen=True)
class SyndeticEvidence:
    syndetic: bool
    gap_bound: int
    largest_gap: int
    largest_gap_at: int
    horizon: int
    members: int

    def __bool__(self):
        return self.syndetic


def is_syndetic(A: IndexSet, horizon: int) -> SyndeticEvidence:
    """Bounded-gap evidence over [0, horizon].

    Verdict true means the gap pattern is not growing: the maximum gap
    whose start lies in the second half of the range does not exceed the
    maximum over the first half, and the second half is populated at all.
    This is evidence at the horizon, never a proof.
    """
    members = A.members_in(0, horizon)
    if not members:
        raise NoDataError(f"no members of the set in [0, {horizon}]")
    gaps = []  # (gap, start)
    prev = 0
    for m in members:
        gaps.append((m - prev, prev))
        prev = m
    gaps.append((horizon - members[-1], members[-1]))
    mid = horizon // 2
    g1 = max((g for g, at in gaps if at < mid), default=0)
    g2 = max((g for g, at in gaps if at >= mid), default=0)
    populated = members[-1] >= mid
    largest, at = max(gaps, key=lambda t: (t[0], t[1]))
    verdict = populated and g2 <= g1
    return SyndeticEvidence(
        syndetic=verdict,
        gap_bound=largest if verdict else 0,
        largest_gap=largest,
        largest_gap_at=at,
        horizon=horizon,
        members=len(members),
    )


# ---------------------------------------------------------------------------
# difference sets


def difference_set(A: IndexSet, horizon: int) -> ExplicitSet:
    """{a - a' : a, a' in A ∩ [0, horizon], a >= a'} as an explicit set."""
    members = A.members_in(0, horizon)
    if not members:
        return ExplicitSet(())
    if len(members) > 1500 and members[-1] < 2**62:
        return ExplicitSet(tuple(_difference_bitmap(members)))
    out = set()
    for i, a in enumerate(members):
        for b in members[: i + 1]:
            out.add(a - b)
    return ExplicitSet(tuple(sorted(out)))


def _difference_bitmap(members):
    import numpy as np

    arr = np.asarray(members, dtype=np.int64)
    top = int(arr[-1])
    hit = np.zeros(top + 1, dtype=bool)
    rows = max(1, min(len(arr), 10_000_000 // max(len(arr), 1)))
    for i in range(0, len(arr), rows):
        block = arr[i : i + rows, None] - arr[None, :]
        np.abs(block, out=block)
        hit[block.ravel()] = True
    return np.nonzero(hit)[0].tolist()


# ---------------------------------------------------------------------------
# prescribed-density generator


def make_prescribed_density_set(r1, r2, r3, r4, eras: int = 6, window: int = 1000):
    """Build a set whose four density estimates converge to (r1, r2, r3, r4).

    Construction: alternate long stretches of local density r4 (pushing the
    prefix ratio up to a peak near r3) with long stretches of local density
    r1 (pulling it down to a trough near r2).  Stretch lengths at least
    4 * window guarantee that aligned windows of the recommended length sit
    fully inside both extremes, so the Banach estimates see r1 and r4; the
    prefix ratio oscillates between r2 and r3 with per-era tolerance 2**-(e+2).

    The returned set carries `recommended_horizon` (the final peak, where
    the full-prefix ratio sits at r3), `recommended_window`, and
    `recommended_tail_factor` (large enough that the final trough lies
    inside the lower-density checkpoint range).  Convergence speed is a
    property of this construction, not of anything it models.
    """
    def _rat(r):
        if isinstance(r, float):
            return Fraction(r).limit_denominator(10**6)
        return Fraction(r)

    r1, r2, r3, r4 = (_rat(r) for r in (r1, r2, r3, r4))
    if not (0 <= r1 <= r2 <= r3 <= r4 <= 1):
        raise UsageError(f"need 0 <= r1 <= r2 <= r3 <= r4 <= 1, got {(r1, r2, r3, r4)}")

    if r1 == r4:
        # constant density: a plain periodic pattern realizes all four at once
        num, den = r1.numerator, r1.denominator
        out = PeriodicSet(den, tuple(range(num)))
        object.__setattr__(out, "recommended_horizon", max(100 * den, 16 * window))
        object.__setattr__(out, "recommended_window", window)
        object.__setattr__(out, "recommended_tail_factor", 8)
        object.__setattr__(out, "targets", (r1, r2, r3, r4))
        return out

    hi_num, hi_den = r4.numerator, r4.denominator
    lo_num, lo_den = r1.numerator, r1.denominator
    min_len = 4 * window

    segments = []
    pos = 0
    cnt = 0
    trough_pos = 1

    def run(num, den, length):
        nonlocal pos, cnt
        length = -(-length // den) * den  # round up to a full pattern cycle
        segments.append((pos, pos + length, num, den))
        pos += length
        cnt += (length // den) * num

    for era in range(1, eras + 1):
        tol = Fraction(1, 2 ** (era + 2))
        # rise: local density r4 until the prefix ratio reaches the peak target
        peak = r3 if r4 > r3 else r3 - min(tol, r3 / 2 if r3 > 0 else tol)
        length = min_len
        if r4 > peak and peak * (pos + min_len) > cnt + Fraction(min_len * hi_num, hi_den):
            need = (peak * pos - cnt) / (Fraction(hi_num, hi_den) - peak)
            length = max(min_len, int(need) + hi_den)
        run(hi_num, hi_den, length)
        if era == eras:
            break
        # fall: local density r1 until the prefix ratio reaches the trough target
        trough = r2 if r1 < r2 else r2 + min(tol, Fraction(1, 4))
        if trough <= r1:
            trough = r1 + tol
        length = min_len
        cur = Fraction(cnt, pos)
        if cur > trough and Fraction(lo_num, lo_den) < trough:
            need = (cnt - trough * pos) / (trough - Fraction(lo_num, lo_den))
            length = max(min_len, int(need) + lo_den)
        run(lo_num, lo_den, length)
        trough_pos = pos

    out = SegmentPatternSet(tuple(segments))
    tail = max(8, -(-pos // max(trough_pos, 1)) + 1)
    object.__setattr__(out, "recommended_horizon", pos)
    object.__setattr__(out, "recommended_window", window)
    object.__setattr__(out, "recommended_tail_factor", tail)
    object.__setattr__(out, "targets", (r1, r2, r3, r4))
    return out
