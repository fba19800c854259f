"""Weighted backward shifts, their right inverses, and product-based tests.

Weight sequences are function-backed and never materialized to a horizon.
Partial products live in the log2 domain; classes whose weights are powers
of two return exact integer exponents, so products like 2**600 neither
overflow nor lose precision.  Vector entries that are dyadic `Fraction`s
are transformed exactly; float entries go through `ldexp`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ldexp, log2

from .errors import UsageError, ZeroWeightError
from .spaces import SparseVec, SpaceSpec


class WeightSequence:
    """Base: bounded weights w_k, k >= 1 (all k when bilateral)."""

    bilateral = False
    sup_bound = float("inf")

    def weight(self, k: int) -> float:
        raise NotImplementedError

    def log2_weight(self, k: int):
        """log2 w_k; an exact int for power-of-two weights."""
        w = self.weight(k)
        if w == 0:
            raise ZeroWeightError(k)
        return log2(abs(w))

    def log2_product(self, n: int):
        """log2 of the product of w_1 .. w_n (0 for n = 0)."""
        if n < 0:
            raise UsageError("prefix products need n >= 0")
        total = 0
        for k in range(1, n + 1):
            total = total + self.log2_weight(k)
        return total

    def log2_product_range(self, a: int, b: int):
        """log2 of the product of w_a .. w_b (empty product when a > b)."""
        if a > b:
            return 0
        if a >= 1:
            return self.log2_product(b) - self.log2_product(a - 1)
        if not self.bilateral:
            raise UsageError("weights are unilateral but the range reaches k <= 0")
        total = 0
        for k in range(a, b + 1):
            total = total + self.log2_weight(k)
        return total

    def has_zero_in(self, a: int, b: int) -> bool:
        return False

    def expansion(self):
        """(rate, start): log2-product grows by >= rate per step from `start` on.

        None when no positive linear growth rate is available; series tails
        then have no closed bound.
        """
        return None

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantWeights(WeightSequence):
    value: float
    bilateral = True

    def __post_init__(self):
        if self.value == 0:
            raise UsageError("constant weight must be nonzero")
        object.__setattr__(self, "sup_bound", abs(self.value))
        e = log2(abs(self.value))
        object.__setattr__(self, "_exp2", int(e) if e == int(e) else None)

    def weight(self, k):
        return self.value

    def log2_weight(self, k):
        return self._exp2 if self._exp2 is not None else log2(abs(self.value))

    def log2_product(self, n):
        return n * self.log2_weight(1)

    def log2_product_range(self, a, b):
        if a > b:
            return 0
        return (b - a + 1) * self.log2_weight(1)

    def expansion(self):
        rate = self.log2_weight(1)
        return (rate, 0) if rate > 0 else None

    def describe(self):
        v = self.value
        return f"constant:{int(v) if v == int(v) else v}"


@dataclass(frozen=True)
class RatioPowerWeights(WeightSequence):
    """w_k = ((k+1)/k)**(1/p): partial products grow like n**(1/p)."""

    p: float

    def __post_init__(self):
        if self.p < 1:
            raise UsageError("exponent must be >= 1")
        object.__setattr__(self, "sup_bound", 2.0 ** (1.0 / self.p))

    def weight(self, k):
        if k < 1:
            raise UsageError("ratio-power weights are unilateral")
        return ((k + 1) / k) ** (1.0 / self.p)

    def log2_weight(self, k):
        return (log2(k + 1) - log2(k)) / self.p

    def log2_product(self, n):
        return log2(n + 1) / self.p if n else 0.0

    def describe(self):
        p = self.p
        return f"ratio-power:{int(p) if p == int(p) else p}"


class TableWeights(WeightSequence):
    """Explicit finite table for k = 1..len(values); `fill` beyond it."""

    def __init__(self, values, fill=1.0):
        self.values = tuple(float(v) for v in values)
        self.fill = float(fill)
        self.sup_bound = max([abs(v) for v in self.values] + [abs(self.fill)], default=1.0)

    def weight(self, k):
        if k < 1:
            raise UsageError("table weights are unilateral")
        if k <= len(self.values):
            return self.values[k - 1]
        return self.fill

    def has_zero_in(self, a, b):
        lo = max(a, 1)
        hi = min(b, len(self.values))
        if any(self.values[k - 1] == 0 for k in range(lo, hi + 1)):
            return True
        return self.fill == 0 and b > len(self.values)

    def describe(self):
        return "table:" + ",".join(repr(v) for v in self.values)


@dataclass(frozen=True)
class ShiftOperator:
    """Backward shift (B x)_m = w_{m+1} x_{m+1} on the given space."""

    weights: WeightSequence
    space: SpaceSpec

    def __post_init__(self):
        if self.space.bilateral and not self.weights.bilateral:
            raise UsageError("bilateral space needs a bilateral weight sequence")

    def describe(self):
        return f"{self.weights.describe()} on {self.space.describe()}"


def _scale_pow2(value, exponent):
    """value * 2**exponent, exactly for Fraction values with int exponents."""
    if isinstance(exponent, int):
        if isinstance(value, Fraction):
            return value * Fraction(2) ** exponent
        if isinstance(value, int):
            return value * Fraction(2) ** exponent
        return ldexp(value, exponent)
    return float(value) * (2.0 ** exponent)


def apply_backward(T: ShiftOperator, v: SparseVec, n: int) -> SparseVec:
    """B^n v: entry m picks up v_{m+n} times the product of w_{m+1}..w_{m+n}."""
    if n < 0:
        raise UsageError("n must be >= 0")
    if n == 0:
        return v
    out = {}
    for idx, val in v.entries.items():
        m = idx - n
        if m < 0 and not T.space.bilateral:
            continue
        e = T.weights.log2_product_range(m + 1, m + n)
        out[m] = _scale_pow2(val, e)
    return SparseVec(out, T.space)


def apply_right_inverse(T: ShiftOperator, v: SparseVec, n: int) -> SparseVec:
    """S^n v: entry m moves to m + n divided by the product of w_{m+1}..w_{m+n}.

    Exact right inverse: apply_backward(T, apply_right_inverse(T, v, n), n) == v.
    """
    if n < 0:
        raise UsageError("n must be >= 0")
    if n == 0:
        return v
    out = {}
    for idx, val in v.entries.items():
        if T.weights.has_zero_in(idx + 1, idx + n):
            bad = next(
                k for k in range(idx + 1, idx + n + 1) if T.weights.weight(k) == 0
            )
            raise ZeroWeightError(bad)
        e = T.weights.log2_product_range(idx + 1, idx + n)
        out[idx + n] = _scale_pow2(val, -e if isinstance(e, int) else -float(e))
    return SparseVec(out, T.space)


# ---------------------------------------------------------------------------
# series and growth evidence


@dataclass(frozen=True)
class SeriesReport:
    partial_sum: float
    verdict: str  # "converging-evidence" | "diverging-evidence"
    horizon: int
    increment_ratio: float | None

    def converging(self) -> bool:
        return self.verdict == "converging-evidence"


def reciprocal_product_series(w: WeightSequence, p: float, horizon: int) -> SeriesReport:
    """Partial sum of 1 / (w_1 ... w_n)**p up to the horizon, with a verdict.

    The verdict compares the mass added over (horizon/2, horizon] with the
    mass over (horizon/4, horizon/2]: a geometric-style drop reads as
    converging evidence, anything flat or growing as diverging.  Evidence
    only; no tail is certified.
    """
    if p < 1:
        raise UsageError("p must be >= 1")
    if horizon < 8:
        raise UsageError("horizon too small to split into comparison blocks")
    h2, h4 = horizon // 2, horizon // 4
    total = 0.0
    inc_mid = 0.0
    inc_last = 0.0
    for n in range(1, horizon + 1):
        x = -p * float(w.log2_product(n))  # log2 of the term
        if x <= -1074:
            term = 0.0
        elif x >= 1024:
            term = float("inf")
        else:
            term = 2.0 ** x
        total += term
        if h4 < n <= h2:
            inc_mid += term
        elif n > h2:
            inc_last += term
    if inc_last == 0.0 or inc_last <= 1e-14 * max(total, 1.0):
        verdict = "converging-evidence"
        ratio = 0.0 if inc_mid == 0 else inc_last / inc_mid
    else:
        ratio = inc_last / inc_mid if inc_mid > 0 else float("inf")
        verdict = "converging-evidence" if ratio <= 0.75 else "diverging-evidence"
    return SeriesReport(total, verdict, horizon, ratio)


@dataclass(frozen=True)
class MixingReport:
    tends_to_infinity: bool
    block_minima: tuple
    horizon: int


def mixing_test(w: WeightSequence, horizon: int, blocks: int = 4, margin: float = 0.5) -> MixingReport:
    """Evidence that the partial products tend to infinity.

    Splits (0, horizon] into dyadic blocks and records the minimum
    log2-product on each; verdict true when the minima increase from block
    to block and gain at least `margin` overall.  Products that return to 1
    infinitely often keep a block minimum at 0 and read as not mixing.
    """
    if horizon < 2 ** (blocks + 1):
        raise UsageError("horizon too small for the requested block count")
    edges = [horizon >> t for t in range(blocks, -1, -1)]  # ascending
    minima = []
    lo = 0
    for hi in edges:
        if hi <= lo:
            continue
        m = None
        for n in range(lo + 1, hi + 1):
            e = float(w.log2_product(n))
            if m is None or e < m:
                m = e
        minima.append(m)
        lo = hi
    ascending = all(minima[i] < minima[i + 1] for i in range(len(minima) - 1))
    grew = minima[-1] - minima[0] >= margin
    return MixingReport(ascending and grew, tuple(minima), horizon)
