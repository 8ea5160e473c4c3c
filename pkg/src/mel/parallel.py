"""Order-preserving parallel map capped by the MEL_THREADS environment variable."""
from __future__ import annotations

import os
import pickle
from concurrent.futures import ProcessPoolExecutor


def worker_count(requested=None) -> int:
    cap = os.environ.get("MEL_THREADS")
    n = requested or os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, n)


def pmap(func, items, workers=None, min_items=64):
    """map(func, items) with results in input order.

    Falls back to a serial loop for short inputs, a single worker, or
    arguments that cannot be pickled.
    """
    items = list(items)
    n = worker_count(workers)
    if n == 1 or len(items) < min_items:
        return [func(x) for x in items]
    try:
        pickle.dumps((func, items[:1]))
    except Exception:
        return [func(x) for x in items]
    chunk = max(1, len(items) // (4 * n))
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(func, items, chunksize=chunk))
