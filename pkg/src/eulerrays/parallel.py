"""Fixed-chunk fan-out over a process pool.

Chunk boundaries never depend on the worker count, so every chunk is computed
identically whether it runs inline or in a worker process.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence

DEFAULT_CHUNK = 64


def chunk_bounds(n: int, chunk: int = DEFAULT_CHUNK) -> list[tuple[int, int]]:
    return [(i, min(i + chunk, n)) for i in range(0, n, chunk)]


def run_chunks(fn: Callable[..., Any], args: Sequence[tuple], workers: int = 1) -> list[Any]:
    """Apply ``fn(*a)`` for each tuple in ``args``; results keep input order."""
    if workers <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *a) for a in args]
        return [f.result() for f in futures]
