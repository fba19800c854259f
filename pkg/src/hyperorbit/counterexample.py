"""A c0 weighted shift whose products double inside a structured set and reset outside.

The driving set is

    S = union over j, l >= 1 of the open intervals ]l*10^j - j, l*10^j + j[,

i.e. radius-j digit neighborhoods of multiples of 10^j.  The weights are 2
inside S, reset the running product back to 1 on leaving S, and are 1
elsewhere, so the partial product at n is exactly 2**c(n) where c(n) is
the length of the maximal S-run ending at n.  Everything here is exact:
membership by digit arithmetic, enumeration by interval merging (an
independent route used to cross-check membership), run lengths by walking
back through S, and the block family by lazy power-tower integers, since
the construction forces each block's exponent past the largest previously
built element.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction

from .errors import HyperorbitError, UsageError
from .indexsets import IndexSet, SetFamily, merge_intervals
from .shifts import WeightSequence


# ---------------------------------------------------------------------------
# the set S


def s_contains(m: int) -> bool:
    """Exact membership of m in S by per-scale digit arithmetic."""
    if m <= 0:
        return False
    scale = 10
    j = 1
    while scale < m + j:
        r = m % scale
        if r < j:
            if m // scale >= 1:
                return True
        elif scale - r < j:
            return True
        scale *= 10
        j += 1
    return False


def s_intervals_in(lo: int, hi: int) -> list:
    """Merged closed intervals of S ∩ [lo, hi], enumerated scale by scale.

    Independent of `s_contains`: this walks the defining intervals
    ]l*10^j - j, l*10^j + j[ directly.
    """
    lo = max(lo, 0)
    if lo > hi:
        return []
    raw = []
    scale = 10
    j = 1
    while scale <= hi + j:
        l_min = max(1, (lo - j + 1 + scale - 1) // scale - 1)
        l_max = (hi + j) // scale
        for l in range(l_min, l_max + 1):
            center = l * scale
            a, b = center - j + 1, center + j - 1
            if b >= lo and a <= hi:
                raw.append((max(a, lo), min(b, hi)))
        scale *= 10
        j += 1
    return merge_intervals(raw)


class DigitNeighborhoodSet(IndexSet):
    """S as an index set: digit-scale neighborhoods of multiples of 10^j."""

    kind = "derived"

    def contains(self, n):
        if isinstance(n, HugeInt):
            return n.in_digit_neighborhoods()
        return s_contains(n)

    def members_in(self, lo, hi):
        out = []
        for a, b in s_intervals_in(lo, hi):
            out.extend(range(a, b + 1))
        return out

    def count_in(self, lo, hi):
        if lo > hi:
            return 0
        return sum(b - a + 1 for a, b in s_intervals_in(lo, hi))

    def anchors(self, horizon):
        out = []
        scale = 10
        j = 1
        while scale <= horizon:
            out.append(scale - j)
            scale *= 10
            j += 1
        return out

    def describe(self):
        return "s-set"

    def __reduce__(self):
        return (DigitNeighborhoodSet, ())


def product_exponent(n: int) -> int:
    """Length of the maximal S-run ending at n (0 when n is outside S)."""
    if n < 0:
        raise UsageError("indices are non-negative")
    run = 0
    m = n
    while m >= 1 and s_contains(m):
        run += 1
        m -= 1
    return run


def run_length_array(horizon: int):
    """Vector of run lengths c(1..horizon) via a single vectorized pass."""
    import numpy as np

    n = np.arange(1, horizon + 1, dtype=np.int64)
    member = np.zeros(horizon, dtype=bool)
    scale = 10
    j = 1
    while scale < horizon + j:
        r = n % scale
        member |= (r < j) & (n // scale >= 1)
        member |= (scale - r) < j
        scale *= 10
        j += 1
    pos = np.arange(horizon, dtype=np.int64)
    last_out = np.maximum.accumulate(np.where(~member, pos, -1))
    runs = np.where(member, pos - last_out, 0)
    return runs  # runs[i] == c(i + 1)


class DoublingResetWeights(WeightSequence):
    """Weights 2 on S, product-reset on leaving S, 1 elsewhere.

    The partial product of w_1..w_n is exactly 2**c(n) with c the run
    length; log2-domain values are exact integers.
    """

    bilateral = False
    sup_bound = 2.0

    def weight(self, k):
        if k < 1:
            raise UsageError("weights are unilateral")
        if s_contains(k):
            return 2.0
        c = product_exponent(k - 1)
        return 1.0 if c == 0 else 2.0 ** (-c)

    def log2_weight(self, k):
        if s_contains(k):
            return 1
        return -product_exponent(k - 1)

    def log2_product(self, n):
        if n < 0:
            raise UsageError("prefix products need n >= 0")
        return product_exponent(n)

    def describe(self):
        return "counterexample-c0"

    def __reduce__(self):
        return (DoublingResetWeights, ())


# ---------------------------------------------------------------------------
# lazy power-tower integers


_MATERIAL_EXP_LIMIT = 20000  # 10**e is materialized only up to this many digits
_OFFSET_LIMIT = 10**18


def _int_lt_pow10(x: int, e) -> bool:
    """x < 10**e, with e an int or HugeInt."""
    if isinstance(e, HugeInt):
        return True  # 10**e has astronomically many digits
    if x < 0:
        return True
    if e <= _MATERIAL_EXP_LIMIT:
        return x < 10**e
    if x.bit_length() <= 3 * e:  # x < 8**e < 10**e
        return True
    raise UsageError("comparison of a huge plain int against a lazy power is out of range")


def _cmp_values(a, b) -> int:
    """Three-way compare of int | HugeInt values."""
    if isinstance(a, int) and isinstance(b, int):
        return (a > b) - (a < b)
    if isinstance(a, int):
        return -_cmp_values(b, a)
    # a is HugeInt
    if isinstance(b, int):
        if isinstance(a.exponent, int) and a.exponent <= _MATERIAL_EXP_LIMIT:
            av = a.to_int()
            return (av > b) - (av < b)
        return 1 if _int_lt_pow10(b, a.exponent) else -1
    ce = _cmp_values(a.exponent, b.exponent)
    if ce != 0:
        return ce
    return (a.offset > b.offset) - (a.offset < b.offset)


class HugeInt:
    """Exact value 10**exponent + offset with |offset| tiny against 10**exponent.

    `exponent` may itself be a HugeInt, so iterated-exponential values are
    representable and comparable without materialization.
    """

    __slots__ = ("exponent", "offset")

    def __init__(self, exponent, offset=0):
        if isinstance(exponent, int):
            if exponent < 19:
                raise UsageError("materialize small values as plain ints instead")
        elif not isinstance(exponent, HugeInt):
            raise UsageError("exponent must be an int or HugeInt")
        if abs(offset) > _OFFSET_LIMIT:
            raise UsageError("offset out of the supported range")
        self.exponent = exponent
        self.offset = offset

    def to_int(self) -> int:
        if isinstance(self.exponent, int) and self.exponent <= _MATERIAL_EXP_LIMIT:
            return 10**self.exponent + self.offset
        raise UsageError("value too large to materialize")

    def __add__(self, k: int):
        return HugeInt(self.exponent, self.offset + k)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, int):
            return HugeInt(self.exponent, self.offset - other)
        if _cmp_values(self.exponent, other.exponent) == 0:
            return self.offset - other.offset
        raise UsageError("difference of values at different magnitudes is not representable")

    def gap_at_least(self, other, bound: int) -> bool:
        """|self - other| >= bound, decided without materialization."""
        if bound > _OFFSET_LIMIT:
            raise UsageError("bound out of the supported range")
        if isinstance(other, int):
            if isinstance(self.exponent, int) and self.exponent <= _MATERIAL_EXP_LIMIT:
                return abs(self.to_int() - other) >= bound
            return True  # separated by >= 10**exponent / 2
        if _cmp_values(self.exponent, other.exponent) == 0:
            return abs(self.offset - other.offset) >= bound
        return True

    def in_digit_neighborhoods(self) -> bool:
        """Membership of 10**E + r in S, decided from (E, r) alone.

        Small scales are checked on the offset; any scale j with r < j <= E
        hits via the interval around 10**E itself.
        """
        r = self.offset
        if r < 0:
            raise UsageError("negative offsets unsupported here")
        scale = 10
        j = 1
        while scale < r + j + 2:
            rr = r % scale
            if rr < j or scale - rr < j:
                return True
            scale *= 10
            j += 1
        return _cmp_values(r, self.exponent) < 0 if isinstance(self.exponent, HugeInt) else r < self.exponent

    def __eq__(self, other):
        if isinstance(other, (int, HugeInt)):
            return _cmp_values(self, other) == 0
        return NotImplemented

    def __lt__(self, other):
        return _cmp_values(self, other) < 0

    def __le__(self, other):
        return _cmp_values(self, other) <= 0

    def __gt__(self, other):
        return _cmp_values(self, other) > 0

    def __ge__(self, other):
        return _cmp_values(self, other) >= 0

    def __hash__(self):
        return hash(("HugeInt", self._key()))

    def _key(self):
        e = self.exponent
        return (e._key() if isinstance(e, HugeInt) else e, self.offset)

    def __repr__(self):
        e = self.exponent
        es = f"({e!r})" if isinstance(e, HugeInt) else str(e)
        if self.offset:
            return f"10^{es}{self.offset:+d}"
        return f"10^{es}"


def pow10_ceil_exponent(value) -> object:
    """Minimal e with 10**e >= value (value an int or HugeInt)."""
    if isinstance(value, HugeInt):
        return value.exponent if value.offset <= 0 else _bump(value.exponent, 1)
    e = 0
    p = 1
    while p < value:
        p *= 10
        e += 1
    return e


def _bump(e, k: int):
    return e + k if isinstance(e, int) else HugeInt(e.exponent, e.offset + k)


def _max_value(a, b):
    return a if _cmp_values_mixed(a, b) >= 0 else b


def _cmp_values_mixed(a, b):
    if isinstance(a, int) and isinstance(b, int):
        return (a > b) - (a < b)
    if isinstance(a, HugeInt):
        return _cmp_values(a, b)
    return -_cmp_values(b, a)


# ---------------------------------------------------------------------------
# the block family


@dataclass(frozen=True)
class Block:
    index: int  # build order, 1-based
    level: int  # assigned level k
    exponent: object  # j0: members are 10**j0 + step*l
    step: int  # 10**(2k)
    count: int  # l0

    def members(self):
        return tuple(HugeInt(self.exponent, self.step * l) for l in range(self.count))

    def min_member(self):
        return HugeInt(self.exponent, 0)


class HugeExplicitSet(IndexSet):
    """Finite set of HugeInt members; supports symbolic family checks."""

    kind = "explicit-list"

    def __init__(self, members):
        self._members = tuple(sorted(members, key=_sort_key_huge))

    def contains(self, n):
        return any(_cmp_values_mixed(m, n) == 0 for m in self._members)

    def members_in(self, lo, hi):
        return [m for m in self._members if _cmp_values_mixed(m, lo) >= 0 and _cmp_values_mixed(m, hi) <= 0]

    def all_members(self):
        return list(self._members)

    def describe(self):
        return "huge-explicit:" + ",".join(repr(m) for m in self._members)


def _sort_key_huge(m):
    return _HugeKey(m)


@functools.total_ordering
class _HugeKey:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return _cmp_values_mixed(self.v, other.v) < 0

    def __eq__(self, other):
        return _cmp_values_mixed(self.v, other.v) == 0


@dataclass(frozen=True)
class BlockFamily:
    levels: int
    reps: int
    blocks: tuple  # Block, in build order

    def phi(self, index: int) -> int:
        return (index - 1) % self.levels + 1

    def level_blocks(self, k: int):
        return [b for b in self.blocks if b.level == k]

    def set_family(self) -> SetFamily:
        sets = []
        for k in range(1, self.levels + 1):
            members = []
            for b in self.level_blocks(k):
                members.extend(b.members())
            sets.append(HugeExplicitSet(members))
        return SetFamily(label=f"counterexample:{self.levels}:{self.reps}", sets=tuple(sets))


def build_block_family(k_max: int, reps: int) -> BlockFamily:
    """Recursive block construction with minimal admissible parameters.

    Block index i (level k cycling 1..k_max) is {10**j0 + 10**(2k)*l : 0 <= l < l0}
    where (l0, j0) is lexicographically minimal subject to

        1) l0 >= i,
        2) 10**j0 >= k + (max level so far) + (max element so far),
        3) j0 >= i and j0 - k > 10**(2k) * l0,
        4) j0 > (max element so far) + (max level so far) + 2k.

    Condition 4 forces j0 past the largest already-built element, so values
    grow as a power tower; members are HugeInt.
    """
    if k_max < 1 or reps < 1:
        raise UsageError("k_max and reps must be >= 1")
    blocks = []
    max_elem = 0  # includes the seed block {0}
    max_level_seen = 0
    for index in range(1, k_max * reps + 1):
        k = (index - 1) % k_max + 1
        l0 = index
        step = 10 ** (2 * k)
        lb2 = pow10_ceil_exponent(max_elem + k + max_level_seen)
        lb3 = max(index, step * l0 + k + 1)
        lb4 = max_elem + max_level_seen + 2 * k + 1
        j0 = _max_value(_max_value(lb2, lb3), lb4)
        # condition 3 keeps j0 >= 10**(2k)*l0 + k + 1 >= 102, so members are HugeInt
        blocks.append(Block(index=index, level=k, exponent=j0, step=step, count=l0))
        max_elem = HugeInt(j0, step * (l0 - 1))
        max_level_seen = max(max_level_seen, k)
    return BlockFamily(levels=k_max, reps=reps, blocks=tuple(blocks))


@dataclass(frozen=True)
class ConditionCheck:
    index: int
    ok: tuple  # four booleans

    def all_ok(self):
        return all(self.ok)


def verify_block_conditions(family: BlockFamily) -> list:
    """Re-verify conditions 1)-4) for every block from scratch."""
    out = []
    max_elem = 0
    max_level_seen = 0
    for b in family.blocks:
        k, l0, j0, step = b.level, b.count, b.exponent, b.step
        c1 = l0 >= b.index
        c2 = _cmp_values_mixed(_pow10(j0), max_elem + k + max_level_seen) >= 0
        c3 = _cmp_values_mixed(j0, b.index) >= 0 and _cmp_values_mixed(j0, step * l0 + k) > 0
        c4 = _cmp_values_mixed(j0, max_elem + max_level_seen + 2 * k) > 0
        out.append(ConditionCheck(b.index, (c1, c2, c3, c4)))
        members = b.members()
        max_elem = members[-1]
        max_level_seen = max(max_level_seen, k)
    return out


def _pow10(e):
    """10**e as an int (small e) or HugeInt."""
    if isinstance(e, int) and e <= 18:
        return 10**e
    return HugeInt(e, 0)


class InsufficientBlockError(HyperorbitError):
    pass


@dataclass(frozen=True)
class WindowRatioCheck:
    level: int
    block_index: int
    window: int
    count: int
    ratio: Fraction
    required: Fraction
    ok: bool


def banach_window_ratio(family: BlockFamily, k: int) -> WindowRatioCheck:
    """Window count of a level-k block over the window [min, min + s) with
    s = 10**(2k) * l0: exactly min(floor(s / 10**(2k)), l0) members, giving
    ratio 1 / 10**(2k) >= (1 - 1/l0) / 10**(2k).
    """
    candidates = [b for b in family.level_blocks(k) if b.count >= 2]
    if not candidates:
        raise InsufficientBlockError(f"level {k} has no block with l0 >= 2")
    b = candidates[0]
    s = b.step * b.count
    count = min(s // b.step, b.count)
    ratio = Fraction(count, s)
    required = Fraction(b.count - 1, b.count) / Fraction(b.step)
    return WindowRatioCheck(k, b.index, s, count, ratio, required, ratio >= required)


# ---------------------------------------------------------------------------
# exclusion sweep: repunit-perturbed multiples avoid all small scales


def _scale_count(k: int) -> int:
    """n with 10**(n-1) < k <= 10**n (0 for k = 1)."""
    if k < 1:
        raise UsageError("k >= 1")
    n = 0
    p = 1
    while p < k:
        p *= 10
        n += 1
    return n


def _hits_scale_at_most(m: int, k: int):
    """Smallest scale j1 <= k whose digit neighborhood contains m, else None."""
    scale = 10
    for j1 in range(1, k + 1):
        r = m % scale
        if (r < j1 and m // scale >= 1) or (scale - r < j1):
            return j1
        scale *= 10
    return None


@dataclass(frozen=True)
class ExclusionRow:
    k: int
    l: int
    m: int
    hit_scale: int | None

    @property
    def ok(self):
        return self.hit_scale is None


@dataclass(frozen=True)
class ExclusionReport:
    ok: bool
    checked: int
    violations: tuple
    rows: tuple


def _exclusion_cell(args):
    k, l = args
    n = _scale_count(k)
    repunit = (10 ** (n + 1) - 1) // 9
    base = l * 10**k
    return [ExclusionRow(k, l, m, _hits_scale_at_most(m, k)) for m in (base - repunit, base + repunit)]


def verify_scale_exclusion(k_max: int, l_max: int, workers: int = 1, keep_rows: bool = False) -> ExclusionReport:
    """For every k <= k_max, l <= l_max, both repunit perturbations of l*10^k
    avoid every digit neighborhood of scale <= k (so any S-witness they admit
    must live at a scale above k).  Exhaustive over the requested ranges.
    """
    from ._parallel import pmap

    cells = [(k, l) for k in range(1, k_max + 1) for l in range(1, l_max + 1)]
    rows = [r for chunk in pmap(_exclusion_cell, cells, workers) for r in chunk]
    violations = tuple(r for r in rows if not r.ok)
    return ExclusionReport(
        ok=not violations,
        checked=len(rows),
        violations=violations,
        rows=tuple(rows) if keep_rows else (),
    )


# ---------------------------------------------------------------------------
# threshold sets D_j = {n : product >= 2^j} and their envelope


def envelope_contains(n: int, j: int) -> bool:
    """Membership in the union over k >= ceil(j/30) of ]l*10^k - 31k, l*10^k + 31k[."""
    if n < 0:
        return False
    k_min = -(-j // 30)
    scale = 10**k_min
    k = k_min
    while scale < n + 31 * k + 1:
        r = n % scale
        if (r < 31 * k and n // scale >= 1) or (scale - r < 31 * k):
            return True
        scale *= 10
        k += 1
    return False


def threshold_bound(j: int) -> Fraction:
    """Decay bound 8 * (9*ceil(j/30) + 1) * 10**(1 - ceil(j/30)) on prefix ratios."""
    c = -(-j // 30)
    return Fraction(8 * (9 * c + 1)) * Fraction(10) ** (1 - c)


@dataclass(frozen=True)
class ThresholdScanRow:
    prefix: int
    count: int
    ratio: Fraction
    bound: Fraction


@dataclass(frozen=True)
class ThresholdScanReport:
    j: int
    horizon: int
    rows: tuple
    bound_respected: bool  # wherever bound < 1
    envelope_ok: bool
    envelope_samples: int


def product_threshold_scan(j: int, horizon: int, envelope_samples: int = 500) -> ThresholdScanReport:
    """Prefix densities of D_j at powers of ten, against the decay bound,
    plus sampled containment of D_j in its envelope set."""
    if horizon < 100:
        raise UsageError("horizon must be at least 100")
    if j < 1:
        raise UsageError("j must be >= 1")
    runs = run_length_array(horizon)
    member = runs >= j

    import numpy as np

    csum = np.cumsum(member)
    rows = []
    bound = threshold_bound(j)
    ok = True
    prefix = 100
    while prefix <= horizon:
        count = int(csum[prefix - 1])
        ratio = Fraction(count, prefix)
        if bound < 1 and ratio > bound:
            ok = False
        rows.append(ThresholdScanRow(prefix, count, ratio, bound))
        prefix *= 10
    if prefix // 10 != horizon:
        count = int(csum[horizon - 1])
        ratio = Fraction(count, horizon)
        if bound < 1 and ratio > bound:
            ok = False
        rows.append(ThresholdScanRow(horizon, count, ratio, bound))

    idx = np.nonzero(member)[0]
    if len(idx) > envelope_samples:
        stride = len(idx) // envelope_samples
        idx = idx[::stride]
    env_ok = all(envelope_contains(int(i) + 1, j) for i in idx)
    return ThresholdScanReport(
        j=j,
        horizon=horizon,
        rows=tuple(rows),
        bound_respected=ok,
        envelope_ok=env_ok,
        envelope_samples=len(idx),
    )
