import math

import numpy as np
import pytest

from hdrm import distributions as dist


def test_chisq_closed_forms():
    assert dist.chisq_cdf(2, 2) == pytest.approx(1 - math.exp(-1), abs=1e-12)
    assert dist.chisq_cdf(0, 5) == 0.0
    assert dist.chisq_cdf(-1, 5) == 0.0
    assert dist.chisq_cdf(3.841459, 1) == pytest.approx(0.95, abs=1e-6)


def test_chisq_quantile_closed_forms():
    assert dist.chisq_quantile(1 - math.exp(-1), 2) == pytest.approx(2.0, rel=1e-10)
    assert dist.chisq_quantile(0.95, 1) == pytest.approx(3.841459, abs=1e-6)


@pytest.mark.parametrize("f", [0.7, 1, 3.1657, 39])
@pytest.mark.parametrize("p", [1e-6, 0.01, 0.5, 0.99, 1 - 1e-9])
def test_quantile_round_trip(f, p):
    x = dist.chisq_quantile(p, f)
    assert dist.chisq_cdf(x, f) == pytest.approx(p, rel=1e-9)


def test_upper_quantile_accuracy_in_far_tail():
    x = dist.chisq_upper_quantile(1e-12, 3)
    assert dist.chisq_sf(x, 3) == pytest.approx(1e-12, rel=1e-8)


def test_pearson_quantile_values():
    # (3.8414588 - 1) / sqrt(2)
    assert dist.pearson_quantile(0.05, 1) == pytest.approx(2.009215, abs=1e-6)
    assert dist.pearson_quantile(math.exp(-1), 2) == pytest.approx(0.0, abs=1e-10)
    assert dist.pearson_quantile(0.05, 1e6) == pytest.approx(1.644854, abs=2e-3)


@pytest.mark.parametrize("f", [0.8, 1, 2, 3.1657, 39])
@pytest.mark.parametrize("alpha", [0.01, 0.05, 0.1])
def test_pvalue_quantile_round_trip(f, alpha):
    w = dist.pearson_quantile(alpha, f)
    assert dist.pearson_pvalue(w, f) == pytest.approx(alpha, abs=1e-8)


def test_pvalue_below_support_is_one():
    # K_f is bounded below by -sqrt(f/2)
    assert dist.pearson_pvalue(-10.0, 2.0) == 1.0


def test_pvalue_reproduces_printed_examples():
    assert round(dist.pearson_pvalue(0.5851, 3.1657), 4) == 0.2199
    assert round(dist.pearson_pvalue(0.4095, 2.038), 4) == 0.2451
    assert dist.pearson_pvalue(18.4195, 1) < 1e-4


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
def test_bad_degrees_of_freedom(bad):
    with pytest.raises(ValueError):
        dist.chisq_cdf(1.0, bad)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5])
def test_bad_probability(bad):
    with pytest.raises(ValueError):
        dist.chisq_quantile(bad, 2)


def test_sample_pearson_moments():
    x = dist.sample_pearson(3.0, 200_000, np.random.default_rng(1))
    assert abs(x.mean()) < 0.01
    assert x.var() == pytest.approx(1.0, abs=0.02)
