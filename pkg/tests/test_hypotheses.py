import numpy as np
import pytest

from hdrm import linalg
from hdrm.exceptions import DimensionError, HdrmError
from hdrm.hypotheses import PREDEFINED, HypothesisSpec, build_grouped, build_single

GROUPED = ("whole", "sub", "interaction", "identical", "flat")


def expected_rank(kind, a, d):
    return {
        "whole": (a - 1) * 1,
        "sub": 1 * (d - 1),
        "interaction": (a - 1) * (d - 1),
        "identical": (a - 1) * d,
        "flat": a * (d - 1),
    }[kind]


@pytest.mark.parametrize("kind", GROUPED)
@pytest.mark.parametrize("a,d", [(2, 2), (3, 5), (5, 3)])
def test_predefined_pairs(kind, a, d):
    pair = build_grouped(HypothesisSpec.parse(kind), a, d)
    full = pair.full()
    report = linalg.validate_projection(full, 1e-12)
    assert report.valid
    assert pair.rank == expected_rank(kind, a, d)
    assert linalg.projector_rank(full) == pair.rank
    assert pair.label == kind
    assert pair.use_companion


def test_parse_is_case_insensitive():
    assert HypothesisSpec.parse("  Whole ").kind == "whole"
    with pytest.raises(HdrmError, match="unknown hypothesis"):
        HypothesisSpec.parse("nope")


def test_single_flat():
    pair = build_single(HypothesisSpec.parse("flat"), 4)
    assert pair.a == 1 and pair.d == 4
    np.testing.assert_allclose(pair.full(), linalg.centering_matrix(4).matrix)


def test_single_rejects_grouped_kinds():
    with pytest.raises(HdrmError):
        build_single(HypothesisSpec.parse("whole"), 4)


def test_grouped_needs_two_groups():
    with pytest.raises(DimensionError):
        build_grouped(HypothesisSpec.parse("whole"), 1, 4)


def test_custom_single_labelled_custom():
    t = linalg.projection_from_H(np.array([[1.0, -1.0, 0.0]])).matrix
    pair = build_single(HypothesisSpec.custom_single(t), 3)
    assert pair.label == "custom"
    assert pair.warnings == ()
    assert pair.rank == 1


def test_invalid_custom_warns_and_drops_companion():
    t = np.array([[1.0, 0.5], [0.0, 1.0]])
    pair = build_single(HypothesisSpec.custom_single(t), 2)
    assert pair.warnings
    assert "not a valid projection" in pair.warnings[0]
    assert pair.ls is None and not pair.use_companion


def test_custom_shape_mismatch():
    with pytest.raises(DimensionError):
        build_single(HypothesisSpec.custom_single(np.eye(3)), 4)


def test_custom_grouped():
    tw = linalg.centering_matrix(3).matrix
    ts = np.eye(2)
    pair = build_grouped(HypothesisSpec.custom_grouped(tw, ts), 3, 2)
    assert pair.rank == 4
    assert pair.label == "custom"


def test_predefined_names_listed():
    assert set(GROUPED) == set(PREDEFINED)
