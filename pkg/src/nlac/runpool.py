"""Ordered process-pool map with a serial fallback.

All heavy grid sweeps in the package are embarrassingly parallel over
evaluation points, so this is the only concurrency primitive needed.
Results come back in input order regardless of worker count, keeping
every pipeline deterministic for a fixed configuration.
"""

import os
from concurrent.futures import ProcessPoolExecutor


def default_workers():
    return os.cpu_count() or 1


def pmap(fn, items, workers=None, chunksize=8):
    """Map fn over items, preserving order; workers <= 1 runs serially."""
    items = list(items)
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
