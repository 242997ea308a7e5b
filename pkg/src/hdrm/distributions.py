"""Chi-square functions with real degrees of freedom and the standardized
chi-square (Pearson) approximation ``K_f = (chi2_f - f) / sqrt(2 f)``.

The regularized incomplete gamma functions come from :mod:`scipy.special`;
upper-tail quantities are evaluated through the complementary functions so
small p-values keep their relative accuracy.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special


def _check_df(f: float) -> float:
    f = float(f)
    if not (f > 0 and math.isfinite(f)):
        raise ValueError(f"degrees of freedom must be finite and positive, got {f}")
    return f


def _check_prob(p: float, name: str = "p") -> float:
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ValueError(f"{name} must lie strictly between 0 and 1, got {p}")
    return p


def chisq_cdf(x: float, f: float) -> float:
    """Lower tail ``P(chi2_f <= x)``."""
    f = _check_df(f)
    if x <= 0:
        return 0.0
    return float(special.gammainc(f / 2.0, x / 2.0))


def chisq_sf(x: float, f: float) -> float:
    """Upper tail ``P(chi2_f > x)``."""
    f = _check_df(f)
    if x <= 0:
        return 1.0
    return float(special.gammaincc(f / 2.0, x / 2.0))


def _newton(x: float, target: float, f: float, upper: bool) -> float:
    # one or two Newton steps on the tail that was inverted
    h = f / 2.0
    for _ in range(2):
        if x <= 0:
            break
        pdf = math.exp((h - 1) * math.log(x / 2.0) - x / 2.0 - math.lgamma(h)) / 2.0
        if pdf <= 0 or not math.isfinite(pdf):
            break
        val = chisq_sf(x, f) if upper else chisq_cdf(x, f)
        step = (val - target) / pdf
        if upper:
            step = -step
        x_new = x - step
        if x_new <= 0:
            break
        x = x_new
    return x


def chisq_quantile(p: float, f: float) -> float:
    """``x`` with ``chisq_cdf(x, f) == p``."""
    p = _check_prob(p)
    f = _check_df(f)
    if p > 0.5:
        x = 2.0 * float(special.gammainccinv(f / 2.0, 1.0 - p))
        return _newton(x, 1.0 - p, f, upper=True)
    x = 2.0 * float(special.gammaincinv(f / 2.0, p))
    return _newton(x, p, f, upper=False)


def chisq_upper_quantile(alpha: float, f: float) -> float:
    """``x`` with ``P(chi2_f > x) == alpha``."""
    alpha = _check_prob(alpha, "alpha")
    f = _check_df(f)
    x = 2.0 * float(special.gammainccinv(f / 2.0, alpha))
    return _newton(x, alpha, f, upper=True)


def pearson_quantile(alpha: float, f: float) -> float:
    """Upper ``1 - alpha`` quantile of ``K_f``."""
    f = _check_df(f)
    return (chisq_upper_quantile(alpha, f) - f) / math.sqrt(2.0 * f)


def pearson_pvalue(w: float, f: float) -> float:
    """Upper-tail probability ``P(K_f > w)``."""
    f = _check_df(f)
    return chisq_sf(f + w * math.sqrt(2.0 * f), f)


def sample_pearson(f: float, size: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draws from ``K_f``; mean 0 and variance 1 for every ``f``."""
    f = _check_df(f)
    rng = np.random.default_rng() if rng is None else rng
    return (rng.chisquare(f, size) - f) / math.sqrt(2.0 * f)
