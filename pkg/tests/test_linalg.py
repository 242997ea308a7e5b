import numpy as np
import pytest

from hdrm import linalg
from hdrm.exceptions import DegenerateError, DimensionError


def test_kron_block_structure():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.eye(2)
    k = linalg.kron(a, b)
    assert k.shape == (4, 4)
    np.testing.assert_array_equal(k[2:, :2], 3.0 * b)


def test_kron_rejects_nan():
    with pytest.raises(ValueError):
        linalg.kron(np.array([[np.nan]]), np.eye(2))


@pytest.mark.parametrize("d", [1, 2, 5, 9])
def test_centering_and_averaging(d):
    p = linalg.centering_matrix(d)
    j = linalg.averaging_matrix(d)
    np.testing.assert_allclose(p.matrix + j.matrix, np.eye(d), atol=1e-15)
    assert p.rank == d - 1
    assert j.rank == 1
    np.testing.assert_allclose(p.matrix @ np.ones(d), 0.0, atol=1e-14)


def test_projection_from_H_contrast():
    h = np.array([[1.0, -1.0, 0.0], [0.0, 1.0, -1.0]])
    t = linalg.projection_from_H(h)
    np.testing.assert_allclose(t.matrix, linalg.centering_matrix(3).matrix, atol=1e-12)
    assert t.rank == 2
    assert not t.degenerate


def test_projection_from_redundant_rows():
    # the third row is a combination of the first two
    h = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [2.0, -3.0, 0.0, 0.0]])
    t = linalg.projection_from_H(h)
    assert t.rank == 2
    assert linalg.validate_projection(t.matrix, 1e-12).valid


def test_projection_from_zero_H_is_degenerate():
    t = linalg.projection_from_H(np.zeros((2, 4)))
    assert t.degenerate
    assert t.rank == 0
    np.testing.assert_array_equal(t.matrix, 0.0)


def test_validate_flags_non_projection():
    report = linalg.validate_projection(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert not report.symmetric
    assert not report.idempotent
    assert not report.valid
    assert report.max_asymmetry == pytest.approx(1.0)


def test_validate_requires_square():
    with pytest.raises(DimensionError):
        linalg.validate_projection(np.ones((2, 3)))


def test_companion_reconstructs_projection(rng):
    h = rng.normal(size=(3, 7))
    t = linalg.projection_from_H(h).matrix
    f = linalg.companion(t)
    assert f.L.shape == (3, 7)
    np.testing.assert_allclose(f.L.T @ f.L, t, atol=1e-12)
    np.testing.assert_allclose(f.L @ f.L.T, np.eye(3), atol=1e-12)
    x = rng.normal(size=(5, 7))
    np.testing.assert_allclose(f.quadratic_form(x), np.einsum("ij,jk,ik->i", x, t, x), rtol=1e-12)


def test_companion_of_zero_raises():
    with pytest.raises(DegenerateError, match="degenerate"):
        linalg.companion(np.zeros((3, 3)))


def test_kron_companion(rng):
    lw = linalg.companion(linalg.centering_matrix(3).matrix)
    ls = linalg.companion(linalg.averaging_matrix(4).matrix)
    f = linalg.kron_companion(lw, ls)
    t = np.kron(linalg.centering_matrix(3).matrix, linalg.averaging_matrix(4).matrix)
    np.testing.assert_allclose(f.L.T @ f.L, t, atol=1e-12)
    assert f.source_rank == 2


def test_projection_matrix_is_array_like():
    p = linalg.centering_matrix(3)
    assert p.dim == 3
    np.testing.assert_array_equal(np.asarray(p), p.matrix)
