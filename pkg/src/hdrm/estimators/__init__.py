"""Unbiased U-statistic estimators of the trace terms of ``T Sigma``."""

from ._common import EXACT_TERM_CAP, GroupForms, SubsampleBudget, group_forms
from .homog import (
    estimate_c1,
    estimate_c2,
    estimate_c3_exact,
    estimate_c3_subsampled,
)
from .multi import (
    estimate_b2,
    estimate_b5,
    estimate_b6_exact,
    estimate_b6_subsampled,
    estimate_b_i1,
    estimate_b_i4,
    estimate_b_ir3,
)
from .single import estimate_a1, estimate_a2, estimate_a3

__all__ = [
    "EXACT_TERM_CAP",
    "GroupForms",
    "SubsampleBudget",
    "group_forms",
    "estimate_a1",
    "estimate_a2",
    "estimate_a3",
    "estimate_b_i1",
    "estimate_b2",
    "estimate_b_ir3",
    "estimate_b_i4",
    "estimate_b5",
    "estimate_b6_exact",
    "estimate_b6_subsampled",
    "estimate_c1",
    "estimate_c2",
    "estimate_c3_exact",
    "estimate_c3_subsampled",
]
