"""Ordered thread-pool map capped by ``SWAGG_THREADS``."""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count() -> int:
    env = os.environ.get("SWAGG_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def pmap(fn, items):
    """``list(map(fn, items))``, run on up to ``thread_count()`` threads."""
    items = list(items)
    n = min(thread_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
