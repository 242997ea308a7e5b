"""Test statistics, degrees of freedom and p-values for one or several groups.

The standardized statistic is ``W = (Q_N - E_hat) / sqrt(Var_hat)`` with
``Q_N = N * xbar' T xbar``; its null distribution is approximated by
``K_f = (chi2_f - f) / sqrt(2 f)`` with ``f`` estimated as
``tr2_hat^3 / tr3_hat^2`` from estimates of ``tr((T Sigma_N)^k)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import Dataset
from .distributions import pearson_pvalue
from .estimators._common import GroupForms, SubsampleBudget, entropy_of, group_forms, require
from .estimators.homog import c1_from_forms, c2_from_forms, c3_subsampled_from_forms
from .estimators.multi import b2_from_forms, b5_from_forms, b6_subsampled_from_forms
from .estimators.single import a1_from_forms, a2_from_forms, a3_from_forms
from .exceptions import DegenerateError, DimensionError, HdrmError, SampleSizeError
from .hypotheses import HypothesisSpec, ProjectionPair, build_grouped, build_single

log = logging.getLogger(__name__)

#: Third-trace estimates below this multiple of ``tr2^(3/2)`` count as zero.
THIRD_TRACE_RTOL = 1e-12
#: Degrees of freedom reported when the third-trace estimate vanishes;
#: equals the largest raw value possible above the cutoff.
F_MAX = THIRD_TRACE_RTOL ** -2
#: Second-order traces below ``(VARIANCE_RTOL * scale)^2`` are rounding noise,
#: where ``scale`` is the largest weighted mean squared norm of the raw data.
VARIANCE_RTOL = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class QStatistic:
    q: float
    group_means: tuple[np.ndarray, ...]
    weights: tuple[float, ...]


@dataclass(frozen=True)
class TestResult:
    statistic_w: float
    f_hat: float
    tau_hat: float
    p_value: float
    n_total: int
    dimension: int
    groups: int
    hypothesis_label: str
    cov_equal: bool = False
    subsampling: bool = False
    budget_used: int = 0
    removed_incomplete: int = 0
    seed: int | None = None
    design: str = "grouped"
    q_statistic: float = float("nan")
    f_raw: float = float("nan")
    estimates: dict = field(default_factory=dict)
    group_sizes: tuple[int, ...] = ()
    warnings: tuple[str, ...] = ()

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        out = asdict(self)
        out["group_sizes"] = list(self.group_sizes)
        out["warnings"] = list(self.warnings)
        return out

    def reject(self, alpha: float) -> bool:
        """Decision at level ``alpha``; ``p <= alpha`` so that ``alpha = 1`` always rejects."""
        return self.p_value <= alpha


def q_from_forms(forms: GroupForms) -> QStatistic:
    n = forms.n
    N = forms.N
    ml = [x.mean(axis=0) for x in forms.left]
    mr = [x.mean(axis=0) for x in forms.right]
    tw = forms.tw
    q = 0.0
    for i in range(forms.a):
        for r in range(forms.a):
            if tw[i, r] != 0.0:
                q += tw[i, r] * float(ml[i] @ mr[r])
    return QStatistic(N * q, tuple(mr), tuple(N / k for k in n))


def q_statistic(ds: Dataset, pair: ProjectionPair, am: bool = True) -> QStatistic:
    """ANOVA-type quadratic form ``N * xbar' (T_W kron T_S) xbar``, evaluated blockwise."""
    if ds.a != pair.a:
        raise DimensionError(f"hypothesis has {pair.a} groups but data has a={ds.a}")
    return q_from_forms(group_forms(ds, pair, am))


def degrees_of_freedom(second: float, third: float) -> tuple[float, float, list[str]]:
    """Clamped Pearson degrees of freedom ``second^3 / third^2``.

    Returns ``(f_hat, f_raw, flags)``.
    """
    if not (math.isfinite(second) and math.isfinite(third)):
        raise DegenerateError("non-finite trace estimate; data are degenerate")
    if second <= 0.0:
        raise DegenerateError(f"variance estimate {second:.3g} is not positive; data are degenerate")
    flags = []
    if abs(third) <= THIRD_TRACE_RTOL * second**1.5:
        flags.append("third trace estimate is numerically zero; f set to its upper limit")
        return F_MAX, math.inf, flags
    raw = second**3 / third**2
    if raw < 1.0:
        flags.append(f"estimated f = {raw:.4g} below 1; clamped to 1")
        return 1.0, raw, flags
    return raw, raw, flags


def _noise_floor(ds: Dataset) -> float:
    scale = max(ds.N / x.shape[0] * float(np.mean(np.sum(x * x, axis=1))) for x in ds.groups)
    return (VARIANCE_RTOL * scale) ** 2


def _finish(w: float, second: float, third: float, **meta) -> TestResult:
    if not math.isfinite(w):
        raise DegenerateError("test statistic is not finite; data are degenerate")
    f, raw, flags = degrees_of_freedom(second, third)
    warnings = tuple(meta.pop("warnings", ())) + tuple(flags)
    for msg in warnings:
        log.info("%s", msg)
    return TestResult(
        statistic_w=float(w),
        f_hat=float(f),
        tau_hat=1.0 / f,
        p_value=pearson_pvalue(w, f),
        f_raw=raw,
        warnings=warnings,
        **meta,
    )


def _pair_for(ds: Dataset, spec: HypothesisSpec | ProjectionPair | str, grouped: bool) -> ProjectionPair:
    if isinstance(spec, ProjectionPair):
        return spec
    if isinstance(spec, str):
        spec = HypothesisSpec.parse(spec)
    if grouped:
        return build_grouped(spec, ds.a, ds.d)
    return build_single(spec, ds.d)


def run_single(ds: Dataset, spec: HypothesisSpec | ProjectionPair | str = "flat", am: bool = True) -> TestResult:
    """One-group test of ``T mu = 0``."""
    if ds.a != 1:
        raise HdrmError(f"one-group test needs a single group, data has a={ds.a}")
    if ds.N < 4:
        raise SampleSizeError(f"one-group test requires N ≥ 4 subjects, got N={ds.N}")
    pair = _pair_for(ds, spec, grouped=False)
    if pair.rank == 0:
        raise DegenerateError("null hypothesis matrix is zero; statistic is degenerate")
    forms = group_forms(ds, pair, am)
    q = q_from_forms(forms).q
    a1, a2, a3 = a1_from_forms(forms), a2_from_forms(forms), a3_from_forms(forms)
    if not a2 > _noise_floor(ds):
        raise DegenerateError(f"variance estimate A2 = {a2:.3g} is not above rounding noise; data are degenerate")
    w = (q - a1) / math.sqrt(2.0 * a2)
    return _finish(
        w, a2, a3,
        n_total=ds.N, dimension=ds.d, groups=1, hypothesis_label=pair.label,
        removed_incomplete=ds.removed_incomplete, design="single", q_statistic=q,
        estimates={"A1": a1, "A2": a2, "A3": a3}, group_sizes=ds.n, warnings=pair.warnings,
    )


def whole_plot_moments(tw: np.ndarray, n: tuple[int, ...]) -> tuple[float, float, float]:
    """``sum_i (N/n_i) T_W,ii`` and ``tr((T_W D)^k)`` for ``k = 2, 3``, ``D = diag(N/n_i)``."""
    N = sum(n)
    dvec = N / np.asarray(n, dtype=float)
    m = tw * dvec[None, :]
    m2 = m @ m
    return float(np.sum(np.diag(tw) * dvec)), float(np.trace(m2)), float(np.trace(m2 @ m))


def run_grouped(
    ds: Dataset,
    spec: HypothesisSpec | ProjectionPair | str,
    cov_equal: bool = False,
    subsampling: bool = False,
    budget: str | int | SubsampleBudget = "1000*N",
    seed: int | None = None,
    am: bool = True,
) -> TestResult:
    """Multi-group test of ``(T_W kron T_S) mu = 0``.

    ``cov_equal`` switches from the group-wise (heteroscedastic) estimators
    to the pooled ones. The third-order trace is always subsampled with the
    resolved ``budget``; ``subsampling=True`` subsamples the lower-order
    estimators as well. No global random state is touched.
    """
    if ds.a < 2:
        raise HdrmError(f"grouped test needs at least 2 groups, data has a={ds.a}")
    for n in ds.n:
        require(n, 6, "the grouped test")
    pair = _pair_for(ds, spec, grouped=True)
    if pair.rank == 0:
        raise DegenerateError("null hypothesis matrix is zero; statistic is degenerate")
    resolved = SubsampleBudget.parse(budget).resolve(ds.N)
    entropy = entropy_of(seed)
    sub = resolved if subsampling else None
    forms = group_forms(ds, pair, am)
    q = q_from_forms(forms).q

    if cov_equal:
        c1 = c1_from_forms(forms, sub, entropy)
        c2 = c2_from_forms(forms, sub, entropy)
        c3 = c3_subsampled_from_forms(forms, resolved, entropy)
        s1, s2, s3 = whole_plot_moments(pair.tw.matrix, ds.n)
        expectation, second, third = c1 * s1, c2 * s2, c3 * s3
        estimates = {"C1": c1, "C2": c2, "C3*": c3}
    else:
        expectation = b2_from_forms(forms, sub, entropy)
        second = b5_from_forms(forms, sub, entropy)
        third = b6_subsampled_from_forms(forms, resolved, entropy)
        estimates = {"B2": expectation, "B5": second, "B6*": third}
    if not second > _noise_floor(ds):
        name = "C2" if cov_equal else "B5"
        raise DegenerateError(f"variance estimate {name} = {second:.3g} is not above rounding noise; data are degenerate")
    w = (q - expectation) / math.sqrt(2.0 * second)
    return _finish(
        w, second, third,
        n_total=ds.N, dimension=ds.d, groups=ds.a, hypothesis_label=pair.label,
        cov_equal=cov_equal, subsampling=subsampling, budget_used=resolved,
        removed_incomplete=ds.removed_incomplete, seed=seed, design="grouped",
        q_statistic=q, estimates=estimates, group_sizes=ds.n, warnings=pair.warnings,
    )
