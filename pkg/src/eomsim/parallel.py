"""Order-preserving parallel map with a worker cap from ``EOMSIM_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def worker_count(requested: int | None = None) -> int:
    """Number of workers; ``EOMSIM_THREADS=0`` (or unset) means one per CPU."""
    if requested is None:
        raw = os.environ.get("EOMSIM_THREADS", "0").strip() or "0"
        try:
            requested = int(raw)
        except ValueError:
            raise ValueError(f"EOMSIM_THREADS must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ValueError("worker count must be >= 0")
    return requested or (os.cpu_count() or 1)


def map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None,
                processes: bool = False) -> list[R]:
    items = list(items)
    n = min(worker_count(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    pool = ProcessPoolExecutor if processes else ThreadPoolExecutor
    with pool(max_workers=n) as ex:
        return list(ex.map(fn, items))
