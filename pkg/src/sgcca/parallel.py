"""In-process parallel helpers with deterministic result ordering."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV_VAR = "SGCCA_THREADS"


def thread_count(requested: int | None = None) -> int:
    """Resolve the worker count: explicit argument, else the
    ``SGCCA_THREADS`` environment variable, else all cores."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def map_in_order(fn, items, threads: int | None = None) -> list:
    """Apply ``fn`` to each item, possibly concurrently, returning results
    in input order. Items must be independent; ordering makes the output
    identical to the sequential run."""
    items = list(items)
    workers = min(thread_count(threads), len(items)) if items else 1
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
