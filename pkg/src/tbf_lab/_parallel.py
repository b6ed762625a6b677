"""Worker-count policy and an order-preserving parallel map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "TBF_LAB_THREADS"


def worker_count() -> int:
    """Number of workers allowed, capped by ``TBF_LAB_THREADS`` when set."""
    cpus = os.cpu_count() or 1
    raw = os.environ.get(ENV_THREADS, "").strip()
    if not raw:
        return cpus
    try:
        cap = int(raw)
    except ValueError:
        return cpus
    return max(1, min(cap, cpus))


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Map ``fn`` over ``items``; results come back in input order."""
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
