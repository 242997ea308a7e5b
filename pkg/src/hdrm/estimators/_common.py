from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass

import numpy as np

from .._parallel import CHUNK, chunked_sum, draw_distinct, fresh_entropy, stream
from ..data import Dataset
from ..exceptions import BudgetError, DimensionError, SampleSizeError
from ..hypotheses import ProjectionPair

#: Exact six-index enumerations beyond this many terms must use subsampling.
EXACT_TERM_CAP = 10_000_000

# stream tags, one per estimator family
TAG_B1, TAG_B3, TAG_B4, TAG_B6, TAG_C1, TAG_C2, TAG_C3 = 1, 2, 3, 6, 11, 12, 13


@dataclass(frozen=True)
class SubsampleBudget:
    """Number of random index tuples: a literal count or ``k * N``."""

    value: int
    per_n: bool = False

    _GRAMMAR = re.compile(r"^\s*(\d+)\s*(\*\s*N)?\s*$")

    @classmethod
    def parse(cls, expr: str | int | SubsampleBudget) -> SubsampleBudget:
        if isinstance(expr, SubsampleBudget):
            return expr
        if isinstance(expr, (int, np.integer)) and not isinstance(expr, bool):
            value, per_n = int(expr), False
        else:
            m = cls._GRAMMAR.match(str(expr))
            if m is None:
                raise BudgetError(f"budget {expr!r} must be '<int>' or '<int>*N'")
            value, per_n = int(m.group(1)), m.group(2) is not None
        if value < 1:
            raise BudgetError(f"budget must be positive, got {expr!r}")
        return cls(value, per_n)

    def resolve(self, n_total: int) -> int:
        return self.value * n_total if self.per_n else self.value

    def __str__(self) -> str:
        return f"{self.value}*N" if self.per_n else str(self.value)


@dataclass(frozen=True)
class GroupForms:
    """Per-group data mapped so that ``x' T_S y == left(x) . right(y)``.

    With the companion factor both sides are ``X L_S'`` (rank-many columns);
    without it ``left = X T_S`` and ``right = X``.
    """

    left: tuple[np.ndarray, ...]
    right: tuple[np.ndarray, ...]
    tw: np.ndarray

    @property
    def n(self) -> tuple[int, ...]:
        return tuple(x.shape[0] for x in self.right)

    @property
    def N(self) -> int:
        return sum(self.n)

    @property
    def a(self) -> int:
        return len(self.right)

    def gram(self, i: int, j: int) -> np.ndarray:
        return self.left[i] @ self.right[j].T


def group_forms(ds: Dataset, pair: ProjectionPair, am: bool = True) -> GroupForms:
    if ds.d != pair.d:
        raise DimensionError(f"hypothesis is {pair.d}-dimensional but data has d={ds.d}")
    if ds.a != pair.a:
        raise DimensionError(f"hypothesis has {pair.a} groups but data has a={ds.a}")
    if am and pair.ls is not None:
        right = tuple(x @ pair.ls.L.T for x in ds.groups)
        left = right
    else:
        right = tuple(ds.groups)
        left = tuple(x @ pair.ts.matrix for x in ds.groups)
    return GroupForms(left, right, pair.tw.matrix)


def require(n: int, k: int, what: str) -> None:
    if n < k:
        raise SampleSizeError(f"{what} requires n_i ≥ {k}, got a group with {n} subjects")


def falling(n: int, k: int) -> int:
    return math.perm(n, k)


def entropy_of(seed: int | None) -> int:
    return fresh_entropy() if seed is None else int(seed)


def subsampled_mean(kernel, budget: int, seed: int | None, key: tuple[int, ...]) -> float:
    """Average of ``kernel(rng, size)`` (which returns per-draw values) over ``budget`` draws."""
    if budget < 1:
        raise BudgetError(f"budget must be positive, got {budget}")
    entropy = entropy_of(seed)

    def part(c: int, start: int, stop: int) -> float:
        return float(np.sum(kernel(stream(entropy, key + (c,)), stop - start)))

    return chunked_sum(part, budget) / budget


def pair_differences(x: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Differences ``x[idx[:, 0]] - x[idx[:, 1]], x[idx[:, 2]] - x[idx[:, 3]], ...``.

    Returns shape ``(m, k // 2, r)`` for an ``(m, k)`` index array.
    """
    return x[idx[:, 0::2]] - x[idx[:, 1::2]]


def coupling_gram(forms: GroupForms, scale: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weighted Gram matrix over all subjects and the group offsets into it.

    Block ``(i, j)`` is ``T_W[i, j] s_i s_j (X_i T_S X_j')`` so that the
    bilinear form between two stacked difference vectors is a sum of four
    entries per group pair.
    """
    offsets = np.concatenate([[0], np.cumsum(forms.n)])
    h = np.zeros((offsets[-1], offsets[-1]))
    for i in range(forms.a):
        for j in range(forms.a):
            w = forms.tw[i, j] * scale[i] * scale[j]
            if w != 0.0:
                h[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]] = w * forms.gram(i, j)
    return h, offsets[:-1]


def cyclic_products(h: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """``Lambda_1 Lambda_2 Lambda_3 / 8`` for each row of ``idx``.

    ``idx`` has shape ``(m, a, 6)`` and holds, per draw and group, six
    global row indices of ``h``; consecutive index pairs define the three
    difference vectors and ``Lambda_k`` couples difference ``k`` with
    difference ``k + 1`` (cyclically).
    """
    a = idx.shape[1]
    n = h.shape[0]
    flat = h.ravel()
    out = np.full(idx.shape[0], 0.125)
    for k in range(3):
        nxt = (k + 1) % 3
        lam = 0.0
        for i in range(a):
            r1, r2 = idx[:, i, 2 * k] * n, idx[:, i, 2 * k + 1] * n
            for j in range(a):
                c1, c2 = idx[:, j, 2 * nxt], idx[:, j, 2 * nxt + 1]
                lam = lam + flat[r1 + c1] - flat[r1 + c2] - flat[r2 + c1] + flat[r2 + c2]
        out *= lam
    return out


def global_tuples(tuples: list[np.ndarray], offsets: np.ndarray) -> np.ndarray:
    """Stack per-group ``(m, 6)`` local index arrays into ``(m, a, 6)`` global ones."""
    return np.stack([t + off for t, off in zip(tuples, offsets)], axis=1)


def ordered_tuples(n: int, k: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n), k)), dtype=np.int64).reshape(-1, k)


def exact_mean(kernel, sizes: tuple[int, ...]) -> float:
    """Mean of ``kernel(list_of_index_arrays)`` over the Cartesian product of ``range(s)``."""
    total = math.prod(sizes)

    def part(c: int, start: int, stop: int) -> float:
        flat = np.arange(start, stop)
        return float(np.sum(kernel(list(np.unravel_index(flat, sizes)))))

    return chunked_sum(part, total, CHUNK * 4) / total


def draw_tuples(rng: np.random.Generator, sizes: tuple[int, ...], k: int, size: int) -> list[np.ndarray]:
    return [draw_distinct(rng, n, k, size) for n in sizes]
