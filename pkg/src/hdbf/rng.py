"""Seeded random streams and the thread pool used by every resampling loop.

All randomness flows from an :class:`RngSeed`. A draw is addressed by a key
path ``(stream, *path)`` appended to the seed, and each address gets its own
counter-based Philox generator. Work is cut into blocks of fixed size whose
addresses do not depend on how many threads execute them, so results are
identical for any worker count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1

#: resampling draws generated per RNG block
BLOCK_SIZE = 64

# stream tags keep different consumers of one (seed, stream) pair apart
TAG_DATA = 0
TAG_SIGNS = 1
TAG_EB = 2
TAG_WB = 3
TAG_REFERENCE = 4
TAG_MIXTURE = 5
TAG_RESAMPLE = 6


@dataclass(frozen=True)
class RngSeed:
    """A 64-bit seed plus a stream index for replication-level splitting."""

    seed: int
    stream: int = 0

    def generator(self, *path: int) -> np.random.Generator:
        key = (self.stream & _MASK64,) + tuple(int(x) & _MASK64 for x in path)
        ss = np.random.SeedSequence(self.seed & _MASK64, spawn_key=key)
        return np.random.Generator(np.random.Philox(ss))


def as_seed(seed) -> RngSeed:
    if isinstance(seed, RngSeed):
        return seed
    if seed is None:
        seed = int(np.random.SeedSequence().entropy) & _MASK64
    return RngSeed(int(seed))


def default_workers() -> int:
    """Worker count from ``HDBF_THREADS``, else the CPU count."""
    env = os.environ.get("HDBF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"HDBF_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def blocks(total: int, size: int = BLOCK_SIZE):
    """Split ``range(total)`` into ``(block_index, start, stop)`` triples."""
    return [(i, s, min(s + size, total)) for i, s in enumerate(range(0, total, size))]


def parallel_map(func, items, workers: int | None = None) -> list:
    """Ordered map over ``items``; threads only change wall-clock time."""
    items = list(items)
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(func, items))
