"""One-group trace estimators.

Under ``T mu = 0`` the vectors ``L x_l`` are centred, so

* ``A1`` averages ``x' T x`` and estimates ``tr(T S)``,
* ``A2`` averages ``(x_l1' T x_l2)^2`` over pairs and estimates ``tr((T S)^2)``,
* ``A3`` averages the cyclic product over triples and estimates ``tr((T S)^3)``.

All three are evaluated from the Gram matrix ``G = (L X')' (L X')``.
"""

from __future__ import annotations

import math

import numpy as np

from ..data import Dataset
from ..exceptions import DimensionError
from ..hypotheses import ProjectionPair
from ._common import GroupForms, group_forms, require


def _single_gram(forms: GroupForms) -> np.ndarray:
    if forms.a != 1:
        raise DimensionError(f"one-group estimators need a single group, got a={forms.a}")
    return forms.tw[0, 0] * forms.gram(0, 0)


def a1_from_forms(forms: GroupForms) -> float:
    g = _single_gram(forms)
    return float(np.trace(g)) / g.shape[0]


def a2_from_forms(forms: GroupForms) -> float:
    g = _single_gram(forms)
    n = g.shape[0]
    require(n, 2, "A2")
    off = np.tril(g, -1)
    return float(np.sum(off * off)) / math.comb(n, 2)


def a3_from_forms(forms: GroupForms) -> float:
    g = _single_gram(forms)
    n = g.shape[0]
    require(n, 3, "A3")
    g0 = (g + g.T) / 2
    np.fill_diagonal(g0, 0.0)
    # each unordered triple appears 6 times in tr(G0^3)
    total = float(np.sum((g0 @ g0) * g0)) / 6.0
    return total / math.comb(n, 3)


def estimate_a1(ds: Dataset, pair: ProjectionPair, am: bool = True) -> float:
    """Mean quadratic form ``x' T x`` over subjects."""
    return a1_from_forms(group_forms(ds, pair, am))


def estimate_a2(ds: Dataset, pair: ProjectionPair, am: bool = True) -> float:
    """Mean of ``(x_l1' T x_l2)^2`` over the ``C(N, 2)`` subject pairs."""
    return a2_from_forms(group_forms(ds, pair, am))


def estimate_a3(ds: Dataset, pair: ProjectionPair, am: bool = True) -> float:
    return a3_from_forms(group_forms(ds, pair, am))
