"""Text formats: set/weight/family/target specs, vector files, CSV, manifests.

Everything round-trips through plain strings so configurations hash stably
and outputs stay byte-identical across runs and worker counts.
"""

from __future__ import annotations

import hashlib
import json
import sys
from fractions import Fraction

# exact dyadic vector entries can carry denominators with tens of thousands
# of decimal digits; lift the int-to-str guard high enough to print them
if hasattr(sys, "set_int_max_str_digits") and sys.get_int_max_str_digits() < 200_000:
    sys.set_int_max_str_digits(200_000)

from . import counterexample as cx
from .constructor import dyadic_block_family, prime_power_family
from .errors import UsageError
from .indexsets import (
    ExplicitSet,
    FactorialBlockSet,
    GeometricSet,
    IntervalUnionSet,
    PeriodicSet,
    SegmentPatternSet,
    SetFamily,
    SquareSet,
    make_prescribed_density_set,
)
from .shifts import ConstantWeights, RatioPowerWeights, TableWeights
from .spaces import SparseVec, SpaceSpec, c0, lp


# ---------------------------------------------------------------------------
# fractions and numbers


def parse_fraction(text: str) -> Fraction:
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse {text!r} as a rational") from exc


def format_fraction(x) -> str:
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


# ---------------------------------------------------------------------------
# set specs


def parse_set_spec(spec: str):
    spec = spec.strip()
    if spec == "evens":
        return PeriodicSet(2, (0,))
    if spec == "squares":
        return SquareSet()
    if spec == "s-set":
        return cx.DigitNeighborhoodSet()
    if spec == "factorial-blocks":
        return FactorialBlockSet()
    head, _, rest = spec.partition(":")
    if head == "periodic":
        p, _, residues = rest.partition(":")
        rs = tuple(int(r) for r in residues.split(",") if r != "")
        return PeriodicSet(int(p), rs)
    if head == "arith":
        g, _, o = rest.partition(":")
        return PeriodicSet(int(g), (int(o or 0),))
    if head == "explicit":
        return ExplicitSet(tuple(int(x) for x in rest.split(",") if x != ""))
    if head == "explicit-file":
        with open(rest, "r", encoding="utf-8") as fh:
            return ExplicitSet(tuple(int(line) for line in fh if line.strip()))
    if head == "intervals":
        ivs = []
        for part in rest.split(","):
            a, _, b = part.partition("-")
            ivs.append((int(a), int(b)))
        return IntervalUnionSet(tuple(ivs))
    if head == "powers":
        parts = rest.split(":")
        base = int(parts[0])
        min_exp = int(parts[1]) if len(parts) > 1 else 0
        return GeometricSet(base, min_exp)
    if head == "segments":
        segs = []
        for part in rest.split(";"):
            s, e, n, d = (int(x) for x in part.split(":"))
            segs.append((s, e, n, d))
        return SegmentPatternSet(tuple(segs))
    if head == "prescribed":
        rs = [parse_fraction(x) for x in rest.split(",")]
        if len(rs) != 4:
            raise UsageError("prescribed sets take four target densities")
        return make_prescribed_density_set(*rs)
    raise UsageError(f"unknown set spec {spec!r}")


def write_explicit_set(path, s: ExplicitSet):
    with open(path, "w", encoding="utf-8") as fh:
        for m in s.members:
            fh.write(f"{m}\n")


# ---------------------------------------------------------------------------
# weight and operator specs


def parse_weight_spec(spec: str):
    spec = spec.strip()
    if spec == "rolewicz2":  # the doubling shift, by its usual name
        return ConstantWeights(2.0)
    head, _, rest = spec.partition(":")
    if head == "constant":
        return ConstantWeights(float(Fraction(rest)))
    if head == "ratio-power":
        return RatioPowerWeights(float(Fraction(rest)))
    if head == "counterexample-c0" or spec == "counterexample-c0":
        return cx.DoublingResetWeights()
    if head == "table":
        with open(rest, "r", encoding="utf-8") as fh:
            values = [float(line) for line in fh if line.strip()]
        return TableWeights(values)
    raise UsageError(f"unknown weight spec {spec!r}")


def parse_space_spec(spec: str) -> SpaceSpec:
    spec = spec.strip()
    bilateral = spec.endswith(":bilateral")
    if bilateral:
        spec = spec[: -len(":bilateral")]
    if spec == "c0":
        return c0(bilateral)
    if spec in ("l1", "l2"):
        return lp(float(spec[1]), bilateral)
    head, _, rest = spec.partition(":")
    if head == "lp":
        return lp(float(Fraction(rest)), bilateral)
    raise UsageError(f"unknown space spec {spec!r}")


def parse_family_spec(spec: str) -> SetFamily:
    head, _, rest = spec.strip().partition(":")
    parts = [p for p in rest.split(":") if p != ""]
    if head == "dyadic-block":
        k_max = int(parts[0])
        spread = int(parts[1]) if len(parts) > 1 else 6
        return dyadic_block_family(k_max, spread)
    if head == "prime-power":
        k_max = int(parts[0])
        min_exp = int(parts[1]) if len(parts) > 1 else 5
        return prime_power_family(k_max, min_exp)
    if head == "counterexample":
        k_max = int(parts[0])
        reps = int(parts[1]) if len(parts) > 1 else 3
        return cx.build_block_family(k_max, reps).set_family()
    raise UsageError(f"unknown family spec {spec!r}")


# ---------------------------------------------------------------------------
# vectors and targets


def write_vector(path, v: SparseVec):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# space {v.space.describe()}\n")
        for idx in v.support():
            val = v.entries[idx]
            fh.write(f"{idx} {format_fraction(val) if isinstance(val, (int, Fraction)) else repr(val)}\n")


def read_vector(path) -> SparseVec:
    space = None
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("# space"):
                space = parse_space_spec(line.removeprefix("# space").strip())
                continue
            idx, _, val = line.partition(" ")
            entries[int(idx)] = Fraction(val) if "/" in val or val.lstrip("-").isdigit() else float(val)
    if space is None:
        raise UsageError(f"{path} is missing its space header")
    return SparseVec(entries, space)


def parse_vector_spec(spec: str, space: SpaceSpec, dense=None) -> SparseVec:
    spec = spec.strip()
    head, _, rest = spec.partition(":")
    if head == "e":
        return SparseVec.basis(space, int(rest))
    if head == "zero":
        return SparseVec.zero(space)
    if head == "dense":
        if dense is None:
            raise UsageError("dense targets need a dense sequence")
        return dense.item(int(rest))
    if head == "ones":
        a, _, b = rest.partition("-")
        return SparseVec({i: 1 for i in range(int(a), int(b) + 1)}, space)
    if head == "file":
        return read_vector(rest)
    raise UsageError(f"unknown vector spec {spec!r}")


def parse_target_spec(spec: str, space: SpaceSpec, dense=None):
    """`<vector-spec>@<radius>` -> (center, radius)."""
    body, _, radius = spec.rpartition("@")
    if not body:
        raise UsageError(f"target spec {spec!r} needs the form <vector>@<radius>")
    return parse_vector_spec(body, space, dense), float(Fraction(radius))


# ---------------------------------------------------------------------------
# CSV and manifests


def format_value(x) -> str:
    if isinstance(x, Fraction):
        return format_fraction(x)
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(x) for x in row) + "\n")


def config_hash(params: dict) -> str:
    canon = json.dumps(params, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def write_manifest(path, command: str, params: dict, wall_time: float, workers: int):
    from . import __version__

    lines = [
        f"command: {command}",
        f"config_hash: {config_hash(params)}",
        f"package_version: {__version__}",
        f"workers: {workers}",
        f"wall_time_s: {wall_time:.3f}",
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
