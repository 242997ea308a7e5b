"""Pooled estimators for a common covariance matrix across groups.

Each group contributes its within-group difference U-statistic; groups are
combined with weights proportional to their number of index tuples, except
for the subsampled third-order estimator which averages groups equally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..data import Dataset
from ..exceptions import SampleSizeError
from ..hypotheses import ProjectionPair
from ._common import (
    EXACT_TERM_CAP,
    TAG_C1,
    TAG_C2,
    TAG_C3,
    GroupForms,
    cyclic_products,
    entropy_of,
    falling,
    group_forms,
    ordered_tuples,
    require,
    subsampled_mean,
)
from .multi import b_i1_from_forms, b_i4_from_forms, disjoint_pair_square_sum, pair_sum
from .._parallel import chunked_sum, draw_distinct

_UNIT = np.ones((1, 1))


@dataclass(frozen=True)
class HomogTraces:
    c1: float
    c2: float
    c3: float
    c3_mode: str


def _single(forms: GroupForms, i: int) -> GroupForms:
    return GroupForms((forms.left[i],), (forms.right[i],), _UNIT)


def c1_from_forms(forms: GroupForms, budget: int | None = None, seed: int | None = None) -> float:
    for n in forms.n:
        require(n, 2, "C1")
    if budget is None:
        total = sum(pair_sum(forms.gram(i, i)) for i in range(forms.a))
        return total / sum(n * (n - 1) for n in forms.n)
    weights = np.array([math.comb(n, 2) for n in forms.n], dtype=float)
    means = [b_i1_from_forms(_single(forms, i), 0, budget, _sub_seed(seed, TAG_C1, i)) for i in range(forms.a)]
    return float(np.dot(weights, means) / weights.sum())


def c2_from_forms(forms: GroupForms, budget: int | None = None, seed: int | None = None) -> float:
    for n in forms.n:
        require(n, 4, "C2")
    if budget is None:
        total = sum(disjoint_pair_square_sum(forms.left[i], forms.right[i]) for i in range(forms.a))
        return total / (4 * 6 * sum(math.comb(n, 4) for n in forms.n))
    weights = np.array([math.comb(n, 4) for n in forms.n], dtype=float)
    means = [b_i4_from_forms(_single(forms, i), 0, budget, _sub_seed(seed, TAG_C2, i)) for i in range(forms.a)]
    return float(np.dot(weights, means) / weights.sum())


def _sub_seed(seed: int | None, tag: int, i: int) -> int:
    # derive a per-group seed so pooled draws do not reuse the B-family streams
    return int(np.random.SeedSequence(entropy_of(seed), spawn_key=(tag, i)).generate_state(1, np.uint64)[0])


def c3_exact_from_forms(forms: GroupForms, cap: int = EXACT_TERM_CAP) -> float:
    for n in forms.n:
        require(n, 6, "C3")
    counts = [falling(n, 6) for n in forms.n]
    if sum(counts) > cap:
        raise SampleSizeError(
            f"exact C3 needs {sum(counts)} terms (cap {cap}); use the subsampled estimator instead"
        )
    total = 0.0
    for i, n in enumerate(forms.n):
        perms = ordered_tuples(n, 6)[:, None, :]
        h = forms.gram(i, i)

        def part(c, start, stop, perms=perms, h=h):
            return float(np.sum(cyclic_products(h, perms[start:stop])))

        total += chunked_sum(part, len(perms))
    return total / sum(counts)


def c3_from_tuples(forms: GroupForms, i: int, tuples: np.ndarray) -> np.ndarray:
    """Per-tuple cyclic products (divided by 8) for explicit 6-tuples of group ``i``."""
    return cyclic_products(forms.gram(i, i), np.asarray(tuples, dtype=np.int64).reshape(-1, 1, 6))


def c3_subsampled_from_forms(forms: GroupForms, budget: int, seed: int | None = None) -> float:
    for n in forms.n:
        require(n, 6, "C3")
    entropy = entropy_of(seed)
    means = []
    for i, n in enumerate(forms.n):
        h = forms.gram(i, i)

        def kernel(rng, size, n=n, h=h):
            return cyclic_products(h, draw_distinct(rng, n, 6, size)[:, None, :])

        means.append(subsampled_mean(kernel, budget, entropy, (TAG_C3, i)))
    return float(np.mean(means))


def estimate_c1(ds: Dataset, pair: ProjectionPair, budget: int | None = None,
                seed: int | None = None, am: bool = True) -> float:
    """Pooled estimate of ``tr(T_S Sigma)``."""
    return c1_from_forms(group_forms(ds, pair, am), budget, seed)


def estimate_c2(ds: Dataset, pair: ProjectionPair, budget: int | None = None,
                seed: int | None = None, am: bool = True) -> float:
    """Pooled estimate of ``tr((T_S Sigma)^2)``."""
    return c2_from_forms(group_forms(ds, pair, am), budget, seed)


def estimate_c3_exact(ds: Dataset, pair: ProjectionPair, am: bool = True, cap: int = EXACT_TERM_CAP) -> float:
    return c3_exact_from_forms(group_forms(ds, pair, am), cap)


def estimate_c3_subsampled(ds: Dataset, pair: ProjectionPair, budget: int, seed: int | None = None,
                           am: bool = True) -> float:
    """Pooled subsampled estimate of ``tr((T_S Sigma)^3)``: ``B`` draws per group."""
    return c3_subsampled_from_forms(group_forms(ds, pair, am), budget, seed)
