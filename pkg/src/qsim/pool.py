"""Shot-level worker pool.

Experiments are maps over shot indices where each shot derives its own
stream from (seed, tag, shot); results land in a list indexed by shot and
reductions run in index order afterwards, so the output is bit-identical
for any thread count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import DomainError


def default_threads() -> int:
    return os.cpu_count() or 1


def shot_map(fn, shots: int, threads: int = 1) -> list:
    """[fn(0), fn(1), ..., fn(shots-1)], computed across `threads` workers."""
    if shots < 0:
        raise DomainError("shot count must be non-negative")
    if threads < 1:
        raise DomainError("thread count must be at least 1")
    if threads == 1 or shots <= 1:
        return [fn(i) for i in range(shots)]
    results = [None] * shots
    def work(start: int):
        for i in range(start, shots, threads):
            results[i] = fn(i)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(work, range(threads)))
    return results
