"""Deterministic ensemble evaluation with optional threading.

BILATTICE_THREADS caps the worker count (default 1, i.e. serial;
heavy linear algebra already threads inside BLAS). Results are
collected in input order, so output never depends on the degree of
parallelism.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("BILATTICE_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def ensemble_map(fn, items):
    items = list(items)
    n = worker_count()
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
