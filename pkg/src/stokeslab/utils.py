"""Small shared helpers: deterministic parallel maps and thread-count resolution."""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "STOKESLAB_THREADS"


def resolve_threads(flag_value=None):
    """Thread count: explicit flag wins, then the environment variable, then 1."""
    if flag_value is not None:
        return max(1, int(flag_value))
    env = os.environ.get(ENV_THREADS)
    if env:
        return max(1, int(env))
    return 1


def map_ordered(fn, items, threads=1):
    """Map fn over items, returning results in input order.

    Work items must be independent and pure; results are collected in
    submission order so the output is identical for any worker count.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
