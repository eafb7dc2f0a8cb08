"""Runtime helpers: thread budget and order-stable parallel mapping."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")

__all__ = ["thread_count", "parallel_map"]


def thread_count() -> int:
    """Parallelism cap from FREEMAX_THREADS (default 1, i.e. serial)."""
    raw = os.environ.get("FREEMAX_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"FREEMAX_THREADS must be a positive integer, got {raw!r}")
    if n < 1:
        raise ValueError(f"FREEMAX_THREADS must be a positive integer, got {raw!r}")
    return n


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Map preserving input order; results are schedule-independent."""
    seq = list(items)
    workers = thread_count()
    if workers <= 1 or len(seq) <= 1:
        return [fn(item) for item in seq]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seq))
