"""Deterministic work partitioning.

Results are assembled in submission order, so output never depends on the
worker count.  Small inputs run inline; the pool is only worth its startup
cost for wide sweeps.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

_MIN_PARALLEL_ITEMS = 512


def resolve_workers(requested: int | None = None) -> int:
    if requested is not None and requested >= 1:
        return int(requested)
    env = os.environ.get("HYPERORBIT_WORKERS", "")
    if env.strip().isdigit() and int(env) >= 1:
        return int(env)
    return min(os.cpu_count() or 1, 8)


def pmap(fn, items, workers: int = 1):
    """Map `fn` over `items`, preserving order exactly.

    `fn` must be picklable (top-level) when workers > 1.
    """
    items = list(items)
    if workers <= 1 or len(items) < _MIN_PARALLEL_ITEMS:
        return [fn(it) for it in items]
    chunk = max(1, len(items) // (workers * 4))
    try:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items, chunksize=chunk))
    except (OSError, ValueError):
        return [fn(it) for it in items]
