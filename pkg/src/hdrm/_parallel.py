"""Chunked reductions and counter-based random streams.

Work is always cut into the same fixed-size chunks, each chunk owns a
Philox stream keyed by ``(tag..., chunk index)``, and partial sums are
combined in chunk order. Results are therefore identical for any worker
count, including the ``HDRM_THREADS`` override.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable

import numpy as np

CHUNK = 4096


def worker_count() -> int:
    raw = os.environ.get("HDRM_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def fresh_entropy() -> int:
    return int(np.random.SeedSequence().entropy)


def stream(entropy: int, key: tuple[int, ...]) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def chunked_sum(fn: Callable[[int, int, int], float], total: int, chunk: int = CHUNK) -> float:
    """Sum ``fn(c, start, stop)`` over consecutive chunks of ``range(total)``."""
    bounds = [(c, s, min(s + chunk, total)) for c, s in enumerate(range(0, total, chunk))]
    workers = min(worker_count(), len(bounds))
    if workers <= 1:
        parts = [fn(*b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: fn(*b), bounds))
    return float(np.sum(np.asarray(parts, dtype=float)))


#: Ordered tuples are drawn from a cached table when there are at most this many.
_TABLE_LIMIT = 250_000
#: Groups up to this size are permuted in place; larger ones use rank skipping.
_DENSE_DRAW_LIMIT = 256


@lru_cache(maxsize=32)
def _tuple_table(n: int, k: int) -> np.ndarray:
    table = np.array(list(itertools.permutations(range(n), k)), dtype=np.int64).reshape(-1, k)
    table.setflags(write=False)
    return table


def draw_distinct(rng: np.random.Generator, n: int, k: int, size: int) -> np.ndarray:
    """``size`` ordered samples of ``k`` distinct indices from ``range(n)``.

    Rejection-free in every branch: a uniform row of the table of all
    ordered tuples when it is small, a partial Fisher-Yates shuffle of each
    row for moderate ``n``, and for large ``n`` the j-th index is a uniform
    rank among the ``n - j`` unused values, mapped to a value by skipping
    the ones already taken.
    """
    if k > n:
        raise ValueError(f"cannot draw {k} distinct indices from {n}")
    if math.perm(n, k) <= _TABLE_LIMIT:
        table = _tuple_table(n, k)
        return table[rng.integers(0, len(table), size=size)]
    if n <= _DENSE_DRAW_LIMIT:
        perm = np.tile(np.arange(n, dtype=np.int64), (size, 1))
        rows = np.arange(size)
        for j in range(k):
            r = rng.integers(j, n, size=size)
            picked = perm[rows, r]
            perm[rows, r] = perm[:, j]
            perm[:, j] = picked
        return perm[:, :k].copy()
    out = np.empty((size, k), dtype=np.int64)
    for j in range(k):
        r = rng.integers(0, n - j, size=size)
        if j:
            taken = np.sort(out[:, :j], axis=1)
            for c in range(j):
                r += r >= taken[:, c]
        out[:, j] = r
    return out
