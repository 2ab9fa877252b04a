"""Order-preserving map honouring the ``MONOCONE_THREADS`` cap."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("MONOCONE_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    items = list(items)
    n = thread_cap()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))
