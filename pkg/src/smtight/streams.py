"""Deterministic RNG streams and order-preserving parallel execution.

Every Monte Carlo entry point derives its generators through `spawn_rng`,
so a run is a pure function of the master seed and the structured key of
the computation unit (operation tag, cell index, ...).  Work units are
dispatched with `parallel_map`, which preserves input order; together the
two make reports bit-identical across worker counts and schedules.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def spawn_rng(master_seed: int, *key: object) -> np.random.Generator:
    """Create an independent generator addressed by (master_seed, *key).

    The key parts (ints, strings, tuples of those) are hashed into extra
    SeedSequence entropy, so distinct keys give statistically independent
    streams and the same key always gives the same stream.
    """
    digest = hashlib.sha256(repr((master_seed,) + key).encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "big") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([master_seed, *words]))


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    workers: int = 1,
) -> list[R]:
    """Map `fn` over `items`, optionally on a thread pool.

    Results come back in input order regardless of scheduling, so callers
    that seed each item independently get identical output for any worker
    count.
    """
    seq: Sequence[T] = list(items)
    if workers <= 1 or len(seq) <= 1:
        return [fn(item) for item in seq]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seq))
