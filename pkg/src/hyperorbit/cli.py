"""Reproducible experiment runner.

Every analysis is a subcommand writing CSV tables plus a manifest into an
output directory.  Identical configurations produce byte-identical CSVs,
whatever the worker count; run variability (wall time) lives only in the
manifest.  Exit codes: 0 success, 2 usage, 3 a verification check failed,
4 numeric overflow forced truncation (partial outputs are kept).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from . import constructor, counterexample as cx, recurrence
from ._parallel import resolve_workers
from .errors import FamilyExhaustedError, HyperorbitError, UsageError
from .indexsets import (
    check_gap_family,
    difference_set,
    estimate_densities,
    is_syndetic,
    make_prescribed_density_set,
)
from .io_text import (
    format_fraction,
    parse_family_spec,
    parse_fraction,
    parse_set_spec,
    parse_space_spec,
    parse_target_spec,
    parse_vector_spec,
    parse_weight_spec,
    write_csv,
    write_explicit_set,
    write_manifest,
    write_vector,
)
from .shifts import ShiftOperator, mixing_test, reciprocal_product_series

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VERIFICATION = 3
EXIT_OVERFLOW = 4


def _density_rows(tag, report):
    return [
        (
            tag,
            format_fraction(report.lower_banach),
            format_fraction(report.lower_density),
            format_fraction(report.upper_density),
            format_fraction(report.upper_banach),
            report.effective_horizon,
            report.window,
            report.banach_argmin,
            report.banach_argmax,
        )
    ]


DENSITY_HEADER = (
    "target",
    "lower_banach",
    "lower_density",
    "upper_density",
    "upper_banach",
    "effective_horizon",
    "window",
    "banach_argmin",
    "banach_argmax",
)


def run_densities(args, out):
    A = parse_set_spec(args.set)
    grid = [int(s) for s in args.window_grid.split(",")] if args.window_grid else None
    report = estimate_densities(A, args.horizon, grid, args.tail_factor, workers=args.workers)
    write_csv(os.path.join(out, "densities.csv"), DENSITY_HEADER, _density_rows(args.set, report))
    return EXIT_OK


def run_make_set(args, out):
    targets = [parse_fraction(x) for x in args.targets.split(",")]
    if len(targets) != 4:
        raise UsageError("make-set takes four target densities")
    A = make_prescribed_density_set(*targets, eras=args.eras, window=args.window)
    with open(os.path.join(out, "set.txt"), "w", encoding="utf-8") as fh:
        fh.write(A.describe() + "\n")
    report = estimate_densities(
        A, A.recommended_horizon, [A.recommended_window], A.recommended_tail_factor
    )
    rows = _density_rows(args.targets, report)
    write_csv(os.path.join(out, "self_check.csv"), DENSITY_HEADER, rows)
    achieved = report.as_tuple()
    bad = [abs(a - t) for a, t in zip(achieved, targets)]
    if max(bad) > Fraction(1, 20):
        print(f"make-set: worst deviation {float(max(bad)):.4f} exceeds 0.05", file=sys.stderr)
        return EXIT_VERIFICATION
    return EXIT_OK


def run_check_family(args, out):
    family = parse_family_spec(args.family)
    horizon = args.horizon if args.horizon > 0 else None
    result = check_gap_family(family, horizon)
    rows = [(family.label, result.ok, result.pairs_checked, repr(result.violation))]
    write_csv(
        os.path.join(out, "gap_check.csv"),
        ("family", "ok", "members_checked", "violation"),
        rows,
    )
    return EXIT_OK if result.ok else EXIT_VERIFICATION


def run_verify_counterexample(args, out):
    report = cx.verify_scale_exclusion(args.kmax, args.lmax, workers=args.workers, keep_rows=True)
    write_csv(
        os.path.join(out, "exclusion.csv"),
        ("k", "l", "m", "hit_scale", "ok"),
        [(r.k, r.l, r.m, "" if r.hit_scale is None else r.hit_scale, r.ok) for r in report.rows],
    )

    mism = 0
    product = Fraction(1)
    weights = cx.DoublingResetWeights()
    rows = []
    for n in range(1, args.product_horizon + 1):
        product *= Fraction(weights.weight(n)).limit_denominator(1 << 62)
        c = cx.product_exponent(n)
        ok = product == Fraction(2) ** c and (c == 0) == (not cx.s_contains(n))
        if not ok:
            mism += 1
        if n % max(1, args.product_horizon // 20) == 0:
            rows.append((n, c, ok))
    write_csv(os.path.join(out, "products.csv"), ("n", "run_exponent", "ok"), rows)

    family = cx.build_block_family(args.family_levels, args.family_reps)
    conds = cx.verify_block_conditions(family)
    gap = check_gap_family(family.set_family())
    write_csv(
        os.path.join(out, "blocks.csv"),
        ("block", "level", "count", "cond1", "cond2", "cond3", "cond4"),
        [(c.index, family.blocks[c.index - 1].level, family.blocks[c.index - 1].count, *c.ok) for c in conds],
    )

    ok = report.ok and mism == 0 and all(c.all_ok() for c in conds) and gap.ok
    return EXIT_OK if ok else EXIT_VERIFICATION


def run_dj_scan(args, out):
    js = [int(j) for j in args.j.split(",")]
    rows = []
    all_ok = True
    for j in js:
        rep = cx.product_threshold_scan(j, args.horizon)
        all_ok = all_ok and rep.bound_respected and rep.envelope_ok
        for r in rep.rows:
            rows.append((j, r.prefix, r.count, r.ratio, r.bound, rep.envelope_ok))
    write_csv(
        os.path.join(out, "threshold_scan.csv"),
        ("j", "N", "count", "ratio", "bound", "envelope_ok"),
        rows,
    )
    return EXIT_OK if all_ok else EXIT_VERIFICATION


def run_construct(args, out):
    space = parse_space_spec(args.space)
    T = ShiftOperator(parse_weight_spec(args.operator), space)
    family = parse_family_spec(args.family)
    dense = constructor.DenseDyadicSequence(space)
    plan = constructor.select_subsequence(T, family, dense, args.depth, args.horizon)
    with open(os.path.join(out, "plan.txt"), "w", encoding="utf-8") as fh:
        fh.write(plan.serialize())
    write_csv(
        os.path.join(out, "certificates.csv"),
        ("condition", "level", "against", "bound", "required", "ok"),
        [
            (c.condition, c.level, "" if c.against_level is None else c.against_level, c.bound, c.required, c.ok)
            for c in plan.certificates
        ],
    )
    hc = constructor.assemble_vector(plan, T, args.horizon + args.truncation_margin)
    write_vector(os.path.join(out, "vector.txt"), hc.x)
    report = constructor.verify_orbit_bounds(hc, T, args.horizon)
    write_csv(
        os.path.join(out, "orbit_bounds.csv"),
        ("level", "n", "achieved", "bound", "truncation_term", "ok"),
        [(r.level, r.time, r.achieved, r.bound, r.truncation_term, r.ok) for r in report.rows],
    )
    return EXIT_OK if report.ok else EXIT_VERIFICATION


def _parse_targets(args, space):
    dense = constructor.DenseDyadicSequence(space) if "dense:" in args.targets else None
    return [parse_target_spec(t, space, dense) for t in args.targets.split(";") if t]


def run_orbit(args, out):
    space = parse_space_spec(args.space)
    T = ShiftOperator(parse_weight_spec(args.operator), space)
    x = parse_vector_spec(args.vector, space, constructor.DenseDyadicSequence(space))
    targets = _parse_targets(args, space)
    reports = recurrence.hitting_times(T, x, targets, args.horizon)
    hit_rows = []
    dens_rows = []
    for rep in reports:
        for n in rep.times.members:
            hit_rows.append((rep.target_index, n))
        if rep.densities:
            dens_rows.extend(_density_rows(str(rep.target_index), rep.densities))
    write_csv(os.path.join(out, "hits.csv"), ("target", "n"), hit_rows)
    write_csv(os.path.join(out, "hit_densities.csv"), DENSITY_HEADER, dens_rows)
    if any(rep.truncated for rep in reports):
        print(f"orbit: overflow truncation at n={reports[0].truncated_at}", file=sys.stderr)
        return EXIT_OVERFLOW
    return EXIT_OK


def run_classify(args, out):
    space = parse_space_spec(args.space)
    T = ShiftOperator(parse_weight_spec(args.operator), space)
    x = parse_vector_spec(args.vector, space, constructor.DenseDyadicSequence(space))
    targets = _parse_targets(args, space)
    reports = recurrence.hitting_times(T, x, targets, args.horizon)
    label = recurrence.classify(reports, parse_fraction(args.theta))
    rows = [
        (
            t.target_index,
            t.level,
            format_fraction(t.lower_density),
            format_fraction(t.upper_density),
            format_fraction(t.upper_banach),
            format_fraction(label.theta),
            label.horizon,
        )
        for t in label.per_target
    ]
    rows.append(("overall", label.overall, "", "", "", format_fraction(label.theta), label.horizon))
    write_csv(
        os.path.join(out, "classification.csv"),
        ("target", "level", "lower_density", "upper_density", "upper_banach", "theta", "horizon"),
        rows,
    )
    if any(rep.truncated for rep in reports):
        return EXIT_OVERFLOW
    return EXIT_OK


def run_return_set(args, out):
    space = parse_space_spec(args.space)
    T = ShiftOperator(parse_weight_spec(args.operator), space)
    dense = constructor.DenseDyadicSequence(space)
    U = parse_target_spec(args.u, space, dense)
    V = parse_target_spec(args.v, space, dense)
    rep = recurrence.return_set(T, U, V, args.horizon, args.probes, args.stride)
    write_csv(os.path.join(out, "return_times.csv"), ("n",), [(n,) for n in rep.times.members])
    synd = rep.syndetic
    write_csv(
        os.path.join(out, "return_summary.csv"),
        ("times_found", "syndetic_subset", "gap_bound", "largest_gap", "horizon"),
        [
            (
                len(rep.times.members),
                bool(synd) if synd else False,
                synd.gap_bound if synd else "",
                synd.largest_gap if synd else "",
                rep.horizon,
            )
        ],
    )
    return EXIT_OK


def run_correlate(args, out):
    A = parse_set_spec(args.set)
    windows = []
    for part in args.windows.split(","):
        m, _, s = part.partition(":")
        windows.append((int(m), int(s)))
    rep = recurrence.correlation_scan(A, parse_fraction(args.epsilon), args.kmax, windows)
    write_csv(
        os.path.join(out, "correlation.csv"),
        ("k", "eta_k", "in_f"),
        [(k, format_fraction(rep.eta[k]), k in rep.levels_in_f.members) for k in sorted(rep.eta)],
    )
    synd = rep.syndetic
    write_csv(
        os.path.join(out, "correlation_summary.csv"),
        ("delta", "f_syndetic", "f_gap", "antichain_size", "antichain_bound"),
        [
            (
                format_fraction(rep.delta),
                bool(synd) if synd else False,
                synd.gap_bound if synd else "",
                len(rep.antichain),
                format_fraction(rep.antichain_bound),
            )
        ],
    )
    return EXIT_OK if rep.antichain_ok else EXIT_VERIFICATION


def run_beta(args, out):
    A = parse_set_spec(args.set)
    profile = recurrence.AlphaProfile(kind=args.alpha, cutoff=args.cutoff)
    rep = recurrence.return_weight_sums(A, profile, args.horizon)
    write_csv(
        os.path.join(out, "beta.csv"),
        ("n", "beta"),
        sorted(rep.betas.items()),
    )
    write_csv(
        os.path.join(out, "beta_growth.csv"),
        ("cut", "max_beta", "growing"),
        [(c, b, rep.growing) for c, b in rep.growth_curve],
    )
    return EXIT_OK


def run_eqbeta(args, out):
    w = parse_weight_spec(args.operator)
    A = parse_set_spec(args.set)
    if args.n:
        ns = [int(x) for x in args.n.split(",")]
    else:
        ns = A.members_in(1, args.horizon)[: args.sample]
    rows = []
    ok = True
    for n in ns:
        sums = recurrence.bilateral_tail_sums(w, args.p, A, n, args.horizon)
        ok = ok and sums.both_within(1.0)
        rows.append((n, sums.left, sums.right, sums.left_terms, sums.right_terms))
    write_csv(
        os.path.join(out, "tail_sums.csv"),
        ("n", "left", "right", "left_terms", "right_terms"),
        rows,
    )
    return EXIT_OK if ok else EXIT_VERIFICATION


def run_series_tests(args, out):
    rows = []
    for spec in args.weights.split(";"):
        w = parse_weight_spec(spec)
        series = reciprocal_product_series(w, args.p, args.horizon)
        mixing = mixing_test(w, args.horizon)
        rows.append(
            (
                spec,
                series.partial_sum,
                series.verdict,
                mixing.tends_to_infinity,
                args.horizon,
            )
        )
    write_csv(
        os.path.join(out, "series.csv"),
        ("weights", "partial_sum", "series_verdict", "mixing", "horizon"),
        rows,
    )
    return EXIT_OK


def run_diff_set(args, out):
    A = parse_set_spec(args.set)
    D = difference_set(A, args.horizon)
    write_explicit_set(os.path.join(out, "difference.txt"), D)
    # gaps are judged over the realizable difference range: beyond the largest
    # member every gap is a truncation artifact
    evidence = is_syndetic(D, D.members[-1] if D.members else args.horizon)
    write_csv(
        os.path.join(out, "difference_summary.csv"),
        ("members", "syndetic", "gap_bound", "largest_gap"),
        [(len(D.members), evidence.syndetic, evidence.gap_bound, evidence.largest_gap)],
    )
    return EXIT_OK


_RUNNERS = {}


def _sub(subparsers, name, fn, **kwargs):
    p = subparsers.add_parser(name, **kwargs)
    p.add_argument("--out", default=f"out-{name}", help="output directory")
    p.add_argument("--workers", type=int, default=None, help="worker count (default: HYPERORBIT_WORKERS or auto)")
    p.add_argument("--config", default=None, help="JSON config file; flags override its values")
    _RUNNERS[name] = fn
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hyperorbit",
        description="Exact desk-scale experiments on orbit recurrence of weighted backward shifts.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = _sub(sub, "densities", run_densities, help="four density estimates for a set")
    p.add_argument("--set", required=True)
    p.add_argument("--horizon", type=int, default=100000)
    p.add_argument("--window-grid", default=None)
    p.add_argument("--tail-factor", type=int, default=8)

    p = _sub(sub, "make-set", run_make_set, help="build a set with prescribed densities")
    p.add_argument("--targets", required=True, help="r1,r2,r3,r4 as rationals")
    p.add_argument("--eras", type=int, default=6)
    p.add_argument("--window", type=int, default=1000)

    p = _sub(sub, "check-family", run_check_family, help="pairwise gap check for a family")
    p.add_argument("--family", required=True)
    p.add_argument("--horizon", type=int, default=0, help="0 checks all members of finite families")

    p = _sub(sub, "verify-counterexample", run_verify_counterexample, help="exclusion sweep, product law, block conditions")
    p.add_argument("--kmax", type=int, default=6)
    p.add_argument("--lmax", type=int, default=100)
    p.add_argument("--product-horizon", type=int, default=100000)
    p.add_argument("--family-levels", type=int, default=3)
    p.add_argument("--family-reps", type=int, default=3)

    p = _sub(sub, "dj-scan", run_dj_scan, help="prefix densities of product-threshold sets")
    p.add_argument("--j", default="1,5,31,61,91")
    p.add_argument("--horizon", type=int, default=1000000)

    p = _sub(sub, "construct", run_construct, help="plan, assemble, and verify a recurrent vector")
    p.add_argument("--operator", default="constant:2")
    p.add_argument("--space", default="l2")
    p.add_argument("--family", default="dyadic-block:8")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--horizon", type=int, default=10000)
    p.add_argument("--truncation-margin", type=int, default=64)

    p = _sub(sub, "orbit", run_orbit, help="hitting times of an orbit against target balls")
    p.add_argument("--operator", default="constant:2")
    p.add_argument("--space", default="l2")
    p.add_argument("--vector", required=True)
    p.add_argument("--targets", required=True, help="semicolon-separated <vector>@<radius>")
    p.add_argument("--horizon", type=int, default=10000)

    p = _sub(sub, "classify", run_classify, help="recurrence classification of hitting sets")
    p.add_argument("--operator", default="constant:2")
    p.add_argument("--space", default="l2")
    p.add_argument("--vector", required=True)
    p.add_argument("--targets", required=True)
    p.add_argument("--horizon", type=int, default=10000)
    p.add_argument("--theta", default="1/100")

    p = _sub(sub, "return-set", run_return_set, help="verified subset of a return-time set")
    p.add_argument("--operator", default="constant:2")
    p.add_argument("--space", default="l2")
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p.add_argument("--horizon", type=int, default=10000)
    p.add_argument("--probes", type=int, default=8)
    p.add_argument("--stride", type=int, default=50)

    p = _sub(sub, "correlate", run_correlate, help="shift-correlation scan over windows")
    p.add_argument("--set", required=True)
    p.add_argument("--epsilon", default="1/2")
    p.add_argument("--kmax", type=int, default=12)
    p.add_argument("--windows", default="0:3000,3000:3000,6000:3000")

    p = _sub(sub, "beta", run_beta, help="weighted return sums over a set")
    p.add_argument("--set", required=True)
    p.add_argument("--alpha", choices=("constant", "harmonic"), default="constant")
    p.add_argument("--cutoff", type=int, default=None)
    p.add_argument("--horizon", type=int, default=2000)

    p = _sub(sub, "eqbeta", run_eqbeta, help="two-sided reciprocal-product tail sums")
    p.add_argument("--operator", default="constant:2")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--set", required=True)
    p.add_argument("--n", default=None, help="comma-separated times; default samples members")
    p.add_argument("--sample", type=int, default=5)
    p.add_argument("--horizon", type=int, default=10000)

    p = _sub(sub, "series-tests", run_series_tests, help="reciprocal-product series and mixing evidence")
    p.add_argument("--weights", default="constant:2;ratio-power:2;counterexample-c0")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--horizon", type=int, default=10000)

    p = _sub(sub, "diff-set", run_diff_set, help="difference set with syndeticity evidence")
    p.add_argument("--set", required=True)
    p.add_argument("--horizon", type=int, default=10000)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                stored = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"usage error: cannot read config {args.config}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        merged = dict(stored)
        explicit = _explicit_flags(argv if argv is not None else sys.argv[1:])
        for key, val in vars(args).items():
            if key in ("command", "config"):
                continue
            if key in explicit or key not in merged:
                merged[key] = val
        for key, val in merged.items():
            setattr(args, key, val)
    args.workers = resolve_workers(args.workers)
    out = args.out
    os.makedirs(out, exist_ok=True)
    params = {k: v for k, v in vars(args).items() if k not in ("config",)}
    started = time.monotonic()
    try:
        code = _RUNNERS[args.command](args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FamilyExhaustedError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    except HyperorbitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    write_manifest(
        os.path.join(out, "manifest.txt"),
        args.command,
        params,
        time.monotonic() - started,
        args.workers,
    )
    return code


def _explicit_flags(argv):
    keys = set()
    for token in argv:
        if token.startswith("--"):
            keys.add(token[2:].split("=")[0].replace("-", "_"))
    return keys


if __name__ == "__main__":
    sys.exit(main())
