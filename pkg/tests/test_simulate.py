import io

import numpy as np
import pytest

from hdrm.exceptions import DegenerateError, DimensionError, HdrmError
from hdrm.hypotheses import HypothesisSpec, build_grouped, build_single
from hdrm.simulate import (
    CovarianceTemplate,
    Design,
    level_experiment,
    oracle,
    parse_config,
    run_config,
    run_config_file,
    sample_dataset,
    unbiasedness_experiment,
    write_rows,
)


def flat(d):
    return build_single(HypothesisSpec.parse("flat"), d)


@pytest.mark.parametrize("tmpl", [
    CovarianceTemplate.identity(5),
    CovarianceTemplate.compound_symmetry(5, 0.5),
    CovarianceTemplate.ar1(5, 0.6),
    CovarianceTemplate.spike_plus_ridge(5),
])
def test_templates_are_positive_definite(tmpl):
    s = tmpl.matrix()
    np.testing.assert_allclose(s, s.T)
    assert np.linalg.eigvalsh(s).min() > 0


def test_template_values():
    np.testing.assert_allclose(CovarianceTemplate.ar1(3, 0.5).matrix()[0], [1, 0.5, 0.25])
    np.testing.assert_allclose(CovarianceTemplate.compound_symmetry(2, 0.3).matrix(), [[1, 0.3], [0.3, 1]])
    np.testing.assert_allclose(CovarianceTemplate.identity(2).scaled(3).matrix(), 3 * np.eye(2))


def test_template_parse():
    assert CovarianceTemplate.parse("cs:0.5", 4) == CovarianceTemplate.compound_symmetry(4, 0.5)
    assert CovarianceTemplate.parse("ar1:0.6*2", 4) == CovarianceTemplate.ar1(4, 0.6, 2.0)
    assert CovarianceTemplate.parse("spike", 4) == CovarianceTemplate.spike_plus_ridge(4)
    with pytest.raises(HdrmError):
        CovarianceTemplate.parse("wishart", 4)


def test_spike_without_ridge_rejected():
    with pytest.raises(DegenerateError):
        sample_dataset([CovarianceTemplate.spike_plus_ridge(4, ridge=0.0)], [5], 0)


def test_sample_dataset_reproducible_and_covariance():
    t = [CovarianceTemplate.identity(2)]
    a = sample_dataset(t, [1000], 7)
    assert a == sample_dataset(t, [1000], 7)
    cov = np.cov(a.groups[0].T)
    assert np.max(np.abs(cov - np.eye(2))) < 0.1


def test_sample_dataset_means():
    ds = sample_dataset([CovarianceTemplate.identity(3)] * 2, [400, 400], 1, means=[np.zeros(3), np.full(3, 5.0)])
    assert ds.groups[1].mean() == pytest.approx(5.0, abs=0.2)


def test_sample_dataset_shape_checks():
    with pytest.raises(DimensionError):
        sample_dataset([CovarianceTemplate.identity(2)], [3, 3], 0)


@pytest.mark.parametrize("d", [5, 40])
def test_oracle_identity_flat(d):
    rep = oracle([CovarianceTemplate.identity(d)], [10], flat(d))
    assert rep.tr1 == pytest.approx(d - 1)
    assert rep.tr3 == pytest.approx(d - 1)
    assert rep.f_p_exact == pytest.approx(d - 1)
    assert rep.tau_exact == pytest.approx(1 / (d - 1))


def test_oracle_rank_one_limit():
    rep = oracle([CovarianceTemplate.spike_plus_ridge(10, spike=5.0, ridge=1e-6)], [10], flat(10))
    assert rep.beta1 > 0.999
    assert rep.f_p_exact < 1.01


def test_oracle_whole_equal_groups():
    a, d, n = 3, 4, 5
    sigma = CovarianceTemplate.ar1(d, 0.4)
    pair = build_grouped(HypothesisSpec.parse("whole"), a, d)
    rep = oracle([sigma] * a, [n] * a, pair)
    # sum_i (N / n_i) (T_W)_ii tr(T_S Sigma) with N / n_i = a
    expected = a * a * pair.tw.matrix[0, 0] * np.trace(pair.ts.matrix @ sigma.matrix())
    assert rep.tr1 == pytest.approx(expected)


def test_oracle_zero_hypothesis_degenerate():
    pair = build_single(HypothesisSpec.custom_single(np.zeros((3, 3))), 3)
    rep = oracle([CovarianceTemplate.identity(3)], [5], pair)
    assert rep.degenerate
    assert rep.tr1 == rep.tr2 == rep.tr3 == 0.0


def test_oracle_dense_cap():
    with pytest.raises(DimensionError):
        oracle([CovarianceTemplate.identity(5)], [5], flat(5), dense_cap=4)


def test_level_extremes():
    design = Design((CovarianceTemplate.identity(6),), (10,), "flat")
    assert level_experiment(design, alpha=1.0, replications=100, seed=1).rate == 1.0
    assert level_experiment(design, alpha=1e-12, replications=100, seed=1).rate == 0.0


def test_level_needs_enough_replications():
    design = Design((CovarianceTemplate.identity(6),), (10,), "flat")
    with pytest.raises(HdrmError):
        level_experiment(design, replications=50)


def test_unbiasedness_one_group():
    design = Design((CovarianceTemplate.identity(10),), (20,), "flat")
    res = unbiasedness_experiment(["A1", "A2", "A3"], design, 400, seed=3)
    for r in res.values():
        assert r.target == pytest.approx(9.0)
        assert r.passed, r


def test_unbiasedness_heteroscedastic_family():
    t = CovarianceTemplate.compound_symmetry(5, 0.5)
    design = Design((t, t.scaled(2.0)), (8, 9), "interaction", budget="100*N")
    ids = ["B_i1", "B2", "B_ir3", "B_i4", "B5", "B6*"]
    res = unbiasedness_experiment(ids, design, 400, seed=4)
    for r in res.values():
        assert r.passed, r


def test_unbiasedness_pooled_family():
    t = CovarianceTemplate.identity(5)
    design = Design((t, t), (8, 8), "interaction", cov_equal=True, budget="100*N")
    res = unbiasedness_experiment(["C1", "C2", "C3*"], design, 400, seed=5)
    assert res["C3*"].target == pytest.approx(4.0)
    for r in res.values():
        assert r.passed, r


def test_unknown_estimator():
    design = Design((CovarianceTemplate.identity(4),), (8,), "flat")
    with pytest.raises(HdrmError, match="unknown estimator"):
        unbiasedness_experiment("Z9", design, 2)


CONFIG = """
[lvl]
type = level
d = 5
n = 10
covariance = identity
hypothesis = flat
replications = 100
seed = 2

[est]
type = unbiasedness
d = 4
n = 7,8
covariance = identity; ar1:0.3*2
hypothesis = whole
budget = 20*N
replications = 30
estimators = B2, B5
"""


def test_parse_config():
    cfgs = parse_config(CONFIG)
    assert [c.name for c in cfgs] == ["lvl", "est"]
    assert cfgs[1].design.templates[1] == CovarianceTemplate.ar1(4, 0.3, 2.0)
    assert cfgs[1].estimators == ("B2", "B5")


@pytest.mark.parametrize("text", ["", "[x]\nd = 3\n", "[x]\nd = 3\nn = 4\ntype = power\n", "[x]\nd=a\nn=3\n"])
def test_parse_config_errors(text):
    with pytest.raises(HdrmError):
        parse_config(text)


def test_run_config_rows(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(CONFIG)
    rows = run_config_file(path)
    assert [r["experiment"] for r in rows] == ["lvl", "est:B2", "est:B5"]
    buf = io.StringIO()
    write_rows(rows, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "experiment,estimate,target,se,z,pass"
    assert len(lines) == 4
    assert run_config(parse_config(CONFIG)[0]) == rows[:1]


def test_run_config_missing_file(tmp_path):
    with pytest.raises(HdrmError, match="absent.ini"):
        run_config_file(tmp_path / "absent.ini")
