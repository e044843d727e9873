"""Deterministic data parallelism over frequency grids.

Work is always cut into chunks of :data:`CHUNK` items, independent of the
thread count, and results are reassembled in chunk order.  Every number a
caller sees is therefore bitwise independent of :func:`set_threads`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 64
_threads = 1


def set_threads(n: int) -> None:
    global _threads
    if n < 1:
        raise ValueError("thread count must be positive")
    _threads = int(n)


def get_threads() -> int:
    return _threads


def map_chunks(func, items: np.ndarray) -> np.ndarray:
    """Apply ``func`` to fixed-size chunks of ``items`` and concatenate."""
    chunks = [items[i:i + CHUNK] for i in range(0, len(items), CHUNK)]
    if _threads == 1 or len(chunks) == 1:
        results = [func(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=_threads) as pool:
            results = list(pool.map(func, chunks))
    return np.concatenate(results)
