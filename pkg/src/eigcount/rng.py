"""Per-replica random streams and a deterministic replica runner.

Each replica gets its own counter-based generator (Philox) whose 128-bit key
is built from the experiment seed and the replica index through the
splitmix64 finalizer. Serial and threaded runs therefore draw identical
numbers for every replica.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

DEFAULT_SEED = 20120601

_MASK64 = (1 << 64) - 1
_REPLICA_SALT = 0xD1B54A32D192ED03

T = TypeVar("T")


def splitmix64(x: int) -> int:
    """splitmix64 output function; a bijection on 64-bit integers."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def substream_key(seed: int, replica: int) -> int:
    if not (0 <= seed <= _MASK64):
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if replica < 0:
        raise ValueError("replica index must be nonnegative")
    hi = splitmix64(seed)
    lo = splitmix64((replica ^ _REPLICA_SALT) & _MASK64)
    return (hi << 64) | lo


def substream(seed: int, replica: int = 0) -> np.random.Generator:
    """Generator for one replica of an experiment."""
    return np.random.Generator(np.random.Philox(key=substream_key(seed, replica)))


def run_replicas(
    fn: Callable[[np.random.Generator, int], T],
    replicas: int,
    seed: int,
    threads: int = 1,
    start: int = 0,
) -> list[T]:
    """Evaluate ``fn(rng, index)`` for every replica, results in index order.

    Work is split into contiguous chunks over a thread pool; since each
    replica owns its stream, the output does not depend on ``threads``.
    """
    indices = range(start, start + replicas)
    if threads <= 1 or replicas < 2:
        return [fn(substream(seed, r), r) for r in indices]

    def chunk(rs: Sequence[int]) -> list[T]:
        return [fn(substream(seed, r), r) for r in rs]

    nchunks = min(replicas, 4 * threads)
    bounds = np.linspace(0, replicas, nchunks + 1).astype(int)
    pieces = [indices[bounds[k]:bounds[k + 1]] for k in range(nchunks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(chunk, pieces))
    return [item for part in results for item in part]
