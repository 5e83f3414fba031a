"""Index-ordered parallel map capped by the LIPDIFF_THREADS environment variable."""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    try:
        return max(1, int(os.environ.get("LIPDIFF_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    """``[fn(x) for x in items]``, run on up to LIPDIFF_THREADS threads."""
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
