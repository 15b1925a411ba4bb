"""Small shared helpers: worker pool sizing and ordered parallel map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

__all__ = ["worker_count", "ordered_map"]


def worker_count() -> int:
    """Worker pool size from GEVREY_EVP_THREADS (0 = auto, unset = serial)."""
    raw = os.environ.get("GEVREY_EVP_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"GEVREY_EVP_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("GEVREY_EVP_THREADS must be >= 0")
    if n == 0:
        return min(os.cpu_count() or 1, 8)
    return n


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Map with an optional thread pool; results always in input order.

    Every item is computed independently and the reduction happens in input
    order afterwards, so results do not depend on scheduling.
    """
    seq: Sequence[T] = list(items)
    n = worker_count()
    if n <= 1 or len(seq) <= 1:
        return [fn(x) for x in seq]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, seq))
