"""Order-preserving parallel map capped by ``DEFORMA_THREADS``."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

__all__ = ["thread_count", "pmap"]


def thread_count() -> int:
    """Worker cap from ``DEFORMA_THREADS`` (default 1; invalid values raise)."""
    raw = os.environ.get("DEFORMA_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"DEFORMA_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"DEFORMA_THREADS must be a positive integer, got {raw!r}")
    return n


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """``[fn(x) for x in items]``, computed on up to ``threads`` workers; results keep input order."""
    items = list(items)
    n = thread_count() if threads is None else threads
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as ex:
        return list(ex.map(fn, items))
