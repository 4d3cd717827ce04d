"""Deterministic chunked Monte Carlo.

Replications are cut into fixed-size chunks; chunk ``c`` draws from
``stream(*words, c)`` and returns a vector of partial sums.  Partial sums are
reduced in chunk order, so results do not depend on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .rng import stream

CHUNK = 8192
THREADS_ENV = "PCIMPUTE_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def chunk_sizes(reps: int, chunk: int = CHUNK) -> list[int]:
    full, rest = divmod(reps, chunk)
    return [chunk] * full + ([rest] if rest else [])


def chunked_sums(
    fn: Callable[[np.random.Generator, int], np.ndarray],
    reps: int,
    words: tuple[int, ...],
    threads: int | None = None,
    chunk: int = CHUNK,
) -> np.ndarray:
    """Sum ``fn(rng_c, size_c)`` over chunks, reducing in chunk order."""
    sizes = chunk_sizes(reps, chunk)
    threads = default_threads() if threads is None else max(1, int(threads))

    def run(c: int) -> np.ndarray:
        return np.asarray(fn(stream(*words, c), sizes[c]), dtype=float)

    if threads == 1 or len(sizes) == 1:
        parts = [run(c) for c in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    total = np.zeros_like(parts[0])
    for part in parts:
        total = total + part
    return total
