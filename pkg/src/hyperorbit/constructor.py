"""Constructive assembly of vectors with prescribed recurrent orbits.

Given a backward shift whose right inverse contracts fast enough and a
family of disjoint progressions A_1, A_2, ... with the pairwise-gap
property, the vector

    x = sum over selected levels l, n in A_{k_l} of S^n y_l

returns close to y_l at every time n in A_{k_l}.  Level selection is
greedy (smallest admissible k each round) and every choice is backed by a
certificate: a closed-form geometric tail bound, exact in rational
arithmetic for power-of-two weights.  Disjoint supports make the lp-power
of a block sum equal the sum of term powers, so the certificates bound
every finite sub-sum at once.

Assembly keeps entries as exact dyadic fractions; bound verification
compares squared norms rationally, with the truncation contribution
reported as a separate additive term.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import FamilyExhaustedError, UsageError
from .indexsets import GeometricSet, PeriodicSet, SetFamily, check_gap_family
from .shifts import ShiftOperator, apply_backward, apply_right_inverse
from .spaces import SparseVec, SpaceSpec, norm, norm_sq_exact


# ---------------------------------------------------------------------------
# built-in families

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def dyadic_block_family(k_max: int, spread: int = 6) -> SetFamily:
    """A_k = {n >= 0 : n = 2**(k+spread-1) mod 2**(k+spread)}.

    Distinct levels occupy distinct dyadic valuations, so the sets are
    disjoint with pairwise gaps >= 2**spread; level k has density
    2**-(k+spread).  The gap property is machine-verified by callers.
    """
    if k_max < 1:
        raise UsageError("k_max must be >= 1")
    sets = tuple(
        PeriodicSet(2 ** (k + spread), (2 ** (k + spread - 1),)) for k in range(1, k_max + 1)
    )
    return SetFamily(label=f"dyadic-block:{k_max}:{spread}", sets=sets)


def prime_power_family(k_max: int, min_exponent: int = 5) -> SetFamily:
    """A_k = {p_k**j : j >= min_exponent} for the k-th prime.

    Low exponents are excluded so that desk-scale members keep the pairwise
    gap property (8 and 9 would violate it); verify with check_gap_family.
    """
    if k_max < 1 or k_max > len(_PRIMES):
        raise UsageError(f"k_max must be in 1..{len(_PRIMES)}")
    sets = tuple(GeometricSet(_PRIMES[k - 1], min_exponent) for k in range(1, k_max + 1))
    return SetFamily(label=f"prime-power:{k_max}:{min_exponent}", sets=sets)


# ---------------------------------------------------------------------------
# dense sequence of dyadic vectors


class DenseDyadicSequence:
    """Deterministic enumeration of all finitely supported dyadic vectors.

    Stage t covers support within [0, t) and coordinates m / 2**t with
    0 < |m| <= t * 2**t; a vector is emitted at the first stage containing
    it, so each one appears exactly once.  Within a stage, coordinates are
    ordered simplest-first (integers, then halves, quarters, ...), which
    puts e_0 first overall.
    """

    def __init__(self, space: SpaceSpec):
        if space.bilateral:
            raise UsageError("the dense enumeration is unilateral")
        self.space = space
        self._cache = []
        self._gen = self._generate()

    def item(self, l: int) -> SparseVec:
        """1-based deterministic enumeration."""
        if l < 1:
            raise UsageError("items are 1-based")
        while len(self._cache) < l:
            self._cache.append(next(self._gen))
        return self._cache[l - 1]

    @staticmethod
    def _stage_coords(t: int):
        vals = []
        for m in range(1, t * 2**t + 1):
            v = Fraction(m, 2**t)
            vals.append(v)
            vals.append(-v)
        vals.sort(key=lambda v: (v.denominator, abs(v), v < 0))
        return vals

    @staticmethod
    def _belongs_to_earlier(coords, t: int) -> bool:
        if t == 1:
            return False
        prev = t - 1
        if any(i >= prev for i, c in enumerate(coords) if c != 0):
            return False
        for c in coords:
            if c == 0:
                continue
            if (c * 2**prev).denominator != 1 or abs(c) > prev:
                return False
        return True

    def _generate(self):
        for t in itertools.count(1):
            options = [Fraction(0)] + self._stage_coords(t)
            for tup in itertools.product(options, repeat=t):
                if all(c == 0 for c in tup):
                    continue
                if self._belongs_to_earlier(tup, t):
                    continue
                yield SparseVec({i: c for i, c in enumerate(tup) if c != 0}, self.space)


# ---------------------------------------------------------------------------
# certificates and plan selection


@dataclass(frozen=True)
class Certificate:
    condition: str  # "i" | "ii" | "iii" | "iv" | "support-gap"
    level: int
    against_level: int | None
    bound: float
    required: float
    ok: bool  # decided in exact arithmetic, not from the float fields
    detail: str


@dataclass(frozen=True)
class ConstructionPlan:
    family: SetFamily
    selected: tuple  # level indices k_1 < k_2 < ...
    targets: tuple  # y_1, ..., y_depth
    certificates: tuple
    horizon: int
    operator: str

    def level_set(self, l: int):
        return self.family.level(self.selected[l - 1])

    def serialize(self) -> str:
        lines = [
            f"family {self.family.label}",
            f"operator {self.operator}",
            f"selected {','.join(str(k) for k in self.selected)}",
            f"horizon {self.horizon}",
        ]
        for c in self.certificates:
            against = "-" if c.against_level is None else str(c.against_level)
            lines.append(
                f"cert {c.condition} l={c.level} j={against} bound={c.bound!r}"
                f" required={c.required!r} {c.detail}"
            )
        return "\n".join(lines) + "\n"


class _Unsupported(Exception):
    pass


def _progression(s) -> tuple:
    """(gap, offset) for a single-residue periodic set."""
    if isinstance(s, PeriodicSet) and len(s.residues) == 1:
        return s.period, s.residues[0]
    raise _Unsupported("certificates need single-residue periodic levels")


def _pow2_rate(T: ShiftOperator):
    """Exact per-step log2 growth of partial products, for dyadic weights."""
    exp = T.weights.expansion()
    if exp is None:
        return None
    rate, start = exp
    if isinstance(rate, int) and start == 0 and rate > 0:
        return rate
    return None


def _int_p(space: SpaceSpec):
    if space.kind == "c0":
        return None
    if space.p == int(space.p):
        return int(space.p)
    raise _Unsupported("certificates need an integer lp exponent or c0")


def _norm_pow(y: SparseVec, ip) -> Fraction:
    """Sum of |coord|**p (max for c0) as an exact fraction."""
    if ip is None:
        return max((abs(Fraction(v)) for v in y.entries.values()), default=Fraction(0))
    return sum((abs(Fraction(v)) ** ip for v in y.entries.values()), Fraction(0))


def _geom_tail(rate_bits: int, ip, first_exp: int, gap: int, weight: Fraction) -> Fraction:
    """Bound for sums/maxima of 2**(-rate*p*n) over n = first, first+gap, ...

    lp: geometric series; c0: the first term.
    """
    if ip is None:
        return weight * Fraction(2) ** (-rate_bits * first_exp)
    r = Fraction(2) ** (-rate_bits * ip)
    head = weight * r**first_exp if first_exp >= 0 else weight * r**first_exp
    return head / (1 - r**gap)


def _first_member_at_least(gap: int, offset: int, cutoff: int) -> int:
    if offset >= cutoff:
        return offset
    return offset + -((offset - cutoff) // gap) * gap


def _min_cross_distance(family: SetFamily, k: int, forward: bool) -> int:
    """Minimum positive distance from any family member to the next level-k
    member (forward=True), or from a level-k member to the next family
    member (forward=False).  Exact via residue arithmetic: all levels are
    single-residue progressions whose periods divide or contain each other.
    """
    gk, ok = _progression(family.level(k))
    best = None
    for _, s in family.enumerate_levels():
        gm, om = _progression(s)
        if gm <= gk:
            if gk % gm:
                raise _Unsupported("periods must be nested")
            residues = [(om + t * gm) % gk for t in range(gk // gm)]
        else:
            if gm % gk:
                raise _Unsupported("periods must be nested")
            residues = [om % gk]
        for r in residues:
            d = (ok - r) % gk if forward else (r - ok) % gk
            if d == 0:
                d = gk
            if best is None or d < best:
                best = d
    return best


def _support_width(targets) -> int:
    width = 0
    for y in targets:
        sup = y.support()
        if sup:
            width = max(width, sup[-1] + 1)
    return width


def select_subsequence(
    T: ShiftOperator,
    family: SetFamily,
    dense: DenseDyadicSequence,
    depth: int,
    horizon: int,
) -> ConstructionPlan:
    """Greedy level selection with certified tail bounds.

    For each l = 1..depth the smallest unused level k is taken whose
    certificates all hold:

      i   the full right-inverse tail over each chosen progression is below
          1/(l*2**l) in norm,
      ii  block sums of S-terms hit by any shifted family time stay below
          1/2**l,
      iii cross-level block sums stay below 1/(l*2**l),
      iv  the exact right-inverse identity B**n S**n y = y (zero error),

    plus a support-gap certificate making all backward cross-terms vanish.
    Certificates are closed geometric forms; weights without a positive
    exact growth rate cannot be certified and exhaust the family.
    """
    gaps = check_gap_family(family, horizon)
    if not gaps.ok:
        raise UsageError(f"family fails the pairwise gap property: {gaps.violation}")
    rate = _pow2_rate(T)
    if rate is None:
        raise FamilyExhaustedError(
            "i",
            1,
            "condition i: no positive exact growth rate, right-inverse tails do not shrink",
        )
    try:
        ip = _int_p(T.space)
        targets = tuple(dense.item(l) for l in range(1, depth + 1))
        width = _support_width(targets)
        min_gap = min(_progression(s)[0] for _, s in family.enumerate_levels())
        if min_gap <= width:
            raise FamilyExhaustedError(
                "support-gap", 1, f"family gap {min_gap} does not clear support width {width}"
            )

        certificates = [
            Certificate(
                "support-gap",
                0,
                None,
                float(width),
                float(min_gap),
                min_gap > width,
                f"backward cross-terms vanish: min gap {min_gap} > support width {width}",
            )
        ]
        selected: list[int] = []
        for l in range(1, depth + 1):
            y_l = targets[l - 1]
            placed = False
            first_failure = None
            for k in range((selected[-1] + 1) if selected else 1, len(family) + 1):
                certs = _certify_level(T, family, selected, k, l, targets, rate, ip)
                bad = next((c for c in certs if not c.ok), None)
                if bad is None:
                    selected.append(k)
                    certificates.extend(certs)
                    placed = True
                    break
                if first_failure is None:
                    first_failure = bad
            if not placed:
                cond = first_failure.condition if first_failure else "i"
                raise FamilyExhaustedError(
                    cond, l, f"no admissible level for l={l}; condition {cond} failed last"
                )
        return ConstructionPlan(
            family=family,
            selected=tuple(selected),
            targets=targets,
            certificates=tuple(certificates),
            horizon=horizon,
            operator=T.describe(),
        )
    except _Unsupported as exc:
        raise FamilyExhaustedError("structure", 0, str(exc)) from exc


def _pow_need(need: Fraction, ip):
    return need if ip is None else need**ip


def _certify_level(T, family, selected, k, l, targets, rate, ip):
    certs = []
    need_i = Fraction(1, l * 2**l)
    need_ii = Fraction(1, 2**l)

    # condition i: full tails of earlier levels past position k, and of level
    # k itself, must stay below 1/(l 2^l)
    for j in range(1, l + 1):
        kj = selected[j - 1] if j < l else k
        gj, oj = _progression(family.level(kj))
        n0 = _first_member_at_least(gj, oj, k)
        wt = _norm_pow(targets[j - 1], ip)
        tail = _geom_tail(rate, ip, n0, gj, wt)
        certs.append(
            Certificate(
                "i",
                l,
                j,
                _root_float(tail, ip),
                float(need_i),
                tail <= _pow_need(need_i, ip),
                f"tail over level {kj} from n={n0}, gap {gj}",
            )
        )

    # condition ii: sums over the candidate level seen from any family time
    gk, okr = _progression(family.level(k))
    d0 = _min_cross_distance(family, k, forward=True)
    wt = _norm_pow(targets[l - 1], ip)
    tail_ii = _geom_tail(rate, ip, d0, gk, wt)
    certs.append(
        Certificate(
            "ii",
            l,
            None,
            _root_float(tail_ii, ip),
            float(need_ii),
            tail_ii <= _pow_need(need_ii, ip),
            f"forward terms from distance {d0}, gap {gk}",
        )
    )

    # condition iii: sums over earlier chosen levels seen from level-k times
    for j in range(1, l):
        kj = selected[j - 1]
        gj, oj = _progression(family.level(kj))
        dj = _min_distance_between(family, k, kj)
        wt = _norm_pow(targets[j - 1], ip)
        tail = _geom_tail(rate, ip, dj, gj, wt)
        certs.append(
            Certificate(
                "iii",
                l,
                j,
                _root_float(tail, ip),
                float(need_i),
                tail <= _pow_need(need_i, ip),
                f"level {kj} seen from level {k}, distance {dj}",
            )
        )

    # condition iv: the right inverse is exact, checked on the first time
    n0 = _first_member_at_least(gk, okr, 0)
    y = targets[l - 1]
    back = apply_backward(T, apply_right_inverse(T, y, n0), n0)
    iv_err = norm(back - y)
    certs.append(
        Certificate("iv", l, None, iv_err, float(need_ii), iv_err <= float(need_ii), f"identity at n={n0}")
    )
    return certs


def _min_distance_between(family, k_from, k_to) -> int:
    """Min positive distance from a level-k_from member to a later level-k_to member."""
    gf, of = _progression(family.level(k_from))
    gt, ot = _progression(family.level(k_to))
    g = max(gf, gt)
    if g % min(gf, gt):
        raise _Unsupported("periods must be nested")
    best = None
    for a in range(0, g, gf):
        for b in range(0, g, gt):
            d = ((ot + b) - (of + a)) % g
            if d == 0:
                d = g
            if best is None or d < best:
                best = d
    return best


def _root_float(x: Fraction, ip) -> float:
    if ip is None or ip == 1:
        return float(x)
    return float(x) ** (1.0 / ip)


# ---------------------------------------------------------------------------
# assembly and verification


@dataclass(frozen=True)
class HCVector:
    x: SparseVec
    plan: ConstructionPlan
    truncation: int


def assemble_vector(plan: ConstructionPlan, T: ShiftOperator, truncation: int) -> HCVector:
    """x = sum of S^n y_l over n in A_{k_l} ∩ [0, truncation], exact dyadic entries."""
    if truncation < 0:
        raise UsageError("truncation must be >= 0")
    entries: dict = {}
    for l, k in enumerate(plan.selected, start=1):
        y = plan.targets[l - 1]
        for n in plan.family.level(k).members_in(0, truncation):
            piece = apply_right_inverse(T, y, n)
            for idx, val in piece.entries.items():
                entries[idx] = entries.get(idx, 0) + val
    return HCVector(SparseVec(entries, T.space), plan, truncation)


@dataclass(frozen=True)
class OrbitBoundRow:
    level: int
    time: int
    achieved: float
    bound: float
    truncation_term: float
    ok: bool


@dataclass(frozen=True)
class OrbitBoundReport:
    rows: tuple
    worst_slack: dict  # level -> smallest (bound + trunc - achieved)
    violations: tuple
    horizon: int

    @property
    def ok(self):
        return not self.violations


def proof_bound(l: int) -> Fraction:
    """Certified orbit-error bound at level l: 2/2**(l-2) + 1/2**l."""
    return Fraction(2) ** (2 - l) + Fraction(2) ** (2 - l) + Fraction(2) ** (-l)


def verify_orbit_bounds(hc: HCVector, T: ShiftOperator, horizon: int) -> OrbitBoundReport:
    """Check ‖B^n x - y_l‖ against the certified bound at every level time n.

    The comparison is exact and conservative: the squared l2 error, in
    rational arithmetic, must not exceed bound**2 + truncation**2, which is
    at most (bound + truncation)**2.  The truncation term covers members
    beyond the assembly cutoff and is reported separately per row.
    """
    plan = hc.plan
    rate = _pow2_rate(T)
    ip = _int_p(T.space)
    if ip != 2:
        raise UsageError("exact verification is implemented for the l2 norm")
    rows = []
    violations = []
    worst: dict = {}
    for l, k in enumerate(plan.selected, start=1):
        y = plan.targets[l - 1]
        bound = proof_bound(l)
        for n in plan.family.level(k).members_in(0, horizon):
            trunc_sq = _truncation_sq(plan, T, rate, ip, hc.truncation, n)
            orbit = apply_backward(T, hc.x, n)
            err_sq = norm_sq_exact(orbit - y)
            ok = err_sq <= bound * bound + trunc_sq
            try:
                achieved = float(err_sq) ** 0.5
            except OverflowError:
                achieved = float("inf")
            trunc = _root_float(trunc_sq, ip)
            row = OrbitBoundRow(l, n, achieved, float(bound), trunc, ok)
            rows.append(row)
            slack = float(bound) + trunc - achieved
            if l not in worst or slack < worst[l]:
                worst[l] = slack
            if not ok:
                violations.append(row)
    return OrbitBoundReport(tuple(rows), worst, tuple(violations), horizon)


def _truncation_sq(plan, T, rate, ip, truncation, n) -> Fraction:
    """Upper bound (as the p-power sum) for the orbit contribution of members
    beyond the truncation cutoff, seen at time n."""
    total = Fraction(0)
    for l, k in enumerate(plan.selected, start=1):
        g, o = _progression(plan.family.level(k))
        first = _first_member_at_least(g, o, truncation + 1)
        wt = _norm_pow(plan.targets[l - 1], ip)
        total += _geom_tail(rate, ip, first - n, g, wt)
    return total
