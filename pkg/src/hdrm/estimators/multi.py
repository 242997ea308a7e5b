"""Heteroscedastic multi-group trace estimators built from within-group
differences ``Y = x_l1 - x_l2 ~ N(0, 2 Sigma_i)``.

Exact estimators use closed forms over Gram matrices where one exists; the
six-index estimator of ``tr((T Sigma_N)^3)`` enumerates ordered tuples up to
:data:`EXACT_TERM_CAP` terms and otherwise must be subsampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..data import Dataset
from ..exceptions import HdrmError, SampleSizeError
from ..hypotheses import ProjectionPair
from ._common import (
    EXACT_TERM_CAP,
    TAG_B1,
    TAG_B3,
    TAG_B4,
    TAG_B6,
    GroupForms,
    coupling_gram,
    cyclic_products,
    draw_tuples,
    exact_mean,
    falling,
    global_tuples,
    group_forms,
    ordered_tuples,
    pair_differences,
    require,
    subsampled_mean,
)
from .._parallel import draw_distinct


@dataclass(frozen=True)
class MultiTraces:
    b2: float
    b5: float
    b6: float
    b6_mode: str
    subsample_count: int


def pair_sum(g: np.ndarray) -> float:
    """``sum_{l1 > l2} (e_l1 - e_l2)' G (e_l1 - e_l2)`` in closed form."""
    n = g.shape[0]
    return float(n * np.trace(g) - np.sum(g))


def _groups_pairs(n: int) -> np.ndarray:
    p1, p2 = np.tril_indices(n, -1)
    return np.column_stack([p1, p2])


# B_{i,1}

def b_i1_from_forms(forms: GroupForms, i: int, budget: int | None = None, seed: int | None = None) -> float:
    n = forms.n[i]
    require(n, 2, "B_i1")
    if budget is None:
        return pair_sum(forms.gram(i, i)) / (n * (n - 1))
    left, right = forms.left[i], forms.right[i]

    def kernel(rng, size):
        idx = draw_distinct(rng, n, 2, size)
        return np.einsum("mr,mr->m", left[idx[:, 0]] - left[idx[:, 1]], right[idx[:, 0]] - right[idx[:, 1]]) / 2.0

    return subsampled_mean(kernel, budget, seed, (TAG_B1, i))


def b2_from_forms(forms: GroupForms, budget: int | None = None, seed: int | None = None) -> float:
    N, tw = forms.N, forms.tw
    total = 0.0
    for i, n in enumerate(forms.n):
        if tw[i, i] != 0.0:
            total += N / n * tw[i, i] * b_i1_from_forms(forms, i, budget, seed)
    return total


# B_{i,r,3}

def b_ir3_from_forms(forms: GroupForms, i: int, r: int, budget: int | None = None, seed: int | None = None) -> float:
    if i == r:
        raise HdrmError("B_ir3 needs two different groups; use B_i4 within a group")
    ni, nr = forms.n[i], forms.n[r]
    require(ni, 2, "B_ir3")
    require(nr, 2, "B_ir3")
    if budget is None:
        g = forms.gram(i, r)
        # sum over pair-of-pairs of squared bilinear forms is n_i n_r |P G P|_F^2
        c = g - g.mean(axis=0, keepdims=True) - g.mean(axis=1, keepdims=True) + g.mean()
        return float(np.sum(c * c)) / ((ni - 1) * (nr - 1))
    li, rr = forms.left[i], forms.right[r]

    def kernel(rng, size):
        p = draw_distinct(rng, ni, 2, size)
        q = draw_distinct(rng, nr, 2, size)
        v = np.einsum("mr,mr->m", li[p[:, 0]] - li[p[:, 1]], rr[q[:, 0]] - rr[q[:, 1]])
        return v * v / 4.0

    return subsampled_mean(kernel, budget, seed, (TAG_B3, i, r))


# B_{i,4}

def disjoint_pair_square_sum(left: np.ndarray, right: np.ndarray) -> float:
    """Sum over ordered pairs of disjoint index pairs of ``(Y_p' T Y_q)^2``."""
    n = left.shape[0]
    pairs = _groups_pairs(n)
    dl = left[pairs[:, 0]] - left[pairs[:, 1]]
    dr = right[pairs[:, 0]] - right[pairs[:, 1]]
    n_pairs = len(pairs)
    step = max(1, 2_000_000 // max(n_pairs, 1))
    parts = []
    for s in range(0, n_pairs, step):
        blk = slice(s, s + step)
        m = dl[blk] @ dr.T
        a, b = pairs[blk, 0][:, None], pairs[blk, 1][:, None]
        c, d = pairs[:, 0][None, :], pairs[:, 1][None, :]
        disjoint = (a != c) & (a != d) & (b != c) & (b != d)
        parts.append(np.sum(np.where(disjoint, m * m, 0.0)))
    return float(np.sum(parts))


def b_i4_from_forms(forms: GroupForms, i: int, budget: int | None = None, seed: int | None = None) -> float:
    n = forms.n[i]
    require(n, 4, "B_i4")
    left, right = forms.left[i], forms.right[i]
    if budget is None:
        return disjoint_pair_square_sum(left, right) / (4 * 6 * math.comb(n, 4))

    def kernel(rng, size):
        idx = draw_distinct(rng, n, 4, size)
        v = np.einsum("mr,mr->m", left[idx[:, 0]] - left[idx[:, 1]], right[idx[:, 2]] - right[idx[:, 3]])
        return v * v / 4.0

    return subsampled_mean(kernel, budget, seed, (TAG_B4, i))


def b5_from_forms(forms: GroupForms, budget: int | None = None, seed: int | None = None) -> float:
    N, tw, n = forms.N, forms.tw, forms.n
    total = 0.0
    for i in range(forms.a):
        if tw[i, i] != 0.0:
            total += (N / n[i]) ** 2 * tw[i, i] ** 2 * b_i4_from_forms(forms, i, budget, seed)
        for r in range(i):
            if tw[i, r] != 0.0:
                total += 2 * N * N / (n[i] * n[r]) * tw[i, r] ** 2 * b_ir3_from_forms(forms, i, r, budget, seed)
    return total


# B_6

def _b6_scale(forms: GroupForms) -> np.ndarray:
    return np.sqrt(forms.N / np.asarray(forms.n, dtype=float))


def b6_from_tuples(forms: GroupForms, tuples: list[np.ndarray]) -> np.ndarray:
    """Per-tuple terms ``Lambda_1 Lambda_2 Lambda_3 / 8`` for explicit index tuples."""
    h, offsets = coupling_gram(forms, _b6_scale(forms))
    local = [np.asarray(t, dtype=np.int64).reshape(-1, 6) for t in tuples]
    return cyclic_products(h, global_tuples(local, offsets))


def b6_exact_from_forms(forms: GroupForms, cap: int = EXACT_TERM_CAP) -> float:
    for n in forms.n:
        require(n, 6, "B6")
    sizes = tuple(falling(n, 6) for n in forms.n)
    terms = math.prod(sizes)
    if terms > cap:
        raise SampleSizeError(
            f"exact B6 needs {terms} terms (cap {cap}); use the subsampled estimator instead"
        )
    perms = [ordered_tuples(n, 6) for n in forms.n]
    h, offsets = coupling_gram(forms, _b6_scale(forms))

    def kernel(flat_idx):
        return cyclic_products(h, global_tuples([p[k] for p, k in zip(perms, flat_idx)], offsets))

    return exact_mean(kernel, sizes)


def b6_subsampled_from_forms(forms: GroupForms, budget: int, seed: int | None = None) -> float:
    for n in forms.n:
        require(n, 6, "B6")
    h, offsets = coupling_gram(forms, _b6_scale(forms))

    def kernel(rng, size):
        return cyclic_products(h, global_tuples(draw_tuples(rng, forms.n, 6, size), offsets))

    return subsampled_mean(kernel, budget, seed, (TAG_B6,))


# public wrappers on (dataset, pair)

def estimate_b_i1(ds: Dataset, pair: ProjectionPair, i: int, budget: int | None = None,
                  seed: int | None = None, am: bool = True) -> float:
    """Unbiased estimate of ``tr(T_S Sigma_i)`` from within-group differences."""
    return b_i1_from_forms(group_forms(ds, pair, am), i, budget, seed)


def estimate_b2(ds: Dataset, pair: ProjectionPair, budget: int | None = None,
                seed: int | None = None, am: bool = True) -> float:
    """Estimate of ``E(Q_N) = tr(T Sigma_N)``."""
    return b2_from_forms(group_forms(ds, pair, am), budget, seed)


def estimate_b_ir3(ds: Dataset, pair: ProjectionPair, i: int, r: int, budget: int | None = None,
                   seed: int | None = None, am: bool = True) -> float:
    """Estimate of ``tr(T_S Sigma_i T_S Sigma_r)`` for two different groups."""
    return b_ir3_from_forms(group_forms(ds, pair, am), i, r, budget, seed)


def estimate_b_i4(ds: Dataset, pair: ProjectionPair, i: int, budget: int | None = None,
                  seed: int | None = None, am: bool = True) -> float:
    """Estimate of ``tr((T_S Sigma_i)^2)`` from disjoint pairs of differences."""
    return b_i4_from_forms(group_forms(ds, pair, am), i, budget, seed)


def estimate_b5(ds: Dataset, pair: ProjectionPair, budget: int | None = None,
                seed: int | None = None, am: bool = True) -> float:
    """Estimate of ``tr((T Sigma_N)^2)``, half the null variance of ``Q_N``."""
    return b5_from_forms(group_forms(ds, pair, am), budget, seed)


def estimate_b6_exact(ds: Dataset, pair: ProjectionPair, am: bool = True, cap: int = EXACT_TERM_CAP) -> float:
    """Full six-index U-statistic for ``tr((T Sigma_N)^3)``."""
    return b6_exact_from_forms(group_forms(ds, pair, am), cap)


def estimate_b6_subsampled(ds: Dataset, pair: ProjectionPair, budget: int, seed: int | None = None,
                           am: bool = True) -> float:
    """``B`` jointly drawn 6-tuples (one per group per draw) instead of all of them."""
    return b6_subsampled_from_forms(group_forms(ds, pair, am), budget, seed)
