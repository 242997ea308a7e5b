"""Dense kernels for hypothesis matrices.

Projection matrices are the hypothesis currency of the package: a linear
hypothesis ``H mu = 0`` is represented by the orthogonal projector onto the
row space of ``H``, and every quadratic form ``x' T x`` is evaluated either
directly or through a minimal-row factor ``L`` with ``L' L = T``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateError, DimensionError

#: Absolute tolerance used when checking symmetry and idempotence.
DEFAULT_TOLERANCE = 1e-8
#: Relative eigenvalue cutoff for the Moore-Penrose inverse of ``H H'``.
PINV_RCOND = 1e-12
#: Spectra of projectors cluster at 0 and 1; anything above this counts as 1.
RANK_THRESHOLD = 0.5


def _as_finite_matrix(x, name: str = "matrix") -> np.ndarray:
    arr = np.array(x, dtype=float, copy=True)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"{name} must be a nonempty 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class ProjectionMatrix:
    """Symmetric idempotent matrix together with its rank.

    ``degenerate`` is set when the projector was derived from a zero
    hypothesis matrix.
    """

    matrix: np.ndarray
    rank: int
    tolerance: float = DEFAULT_TOLERANCE
    degenerate: bool = False

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.matrix
        return self.matrix.astype(dtype)


@dataclass(frozen=True)
class CompanionFactor:
    """Row-orthonormal ``L`` (r x m) with ``L' L`` equal to the source projector."""

    L: np.ndarray
    source_rank: int

    def quadratic_form(self, x: np.ndarray) -> np.ndarray:
        """Evaluate ``x' T x`` as ``|L x|^2`` for a vector or for rows of ``x``."""
        y = np.asarray(x, dtype=float) @ self.L.T
        return np.sum(y * y, axis=-1)


@dataclass(frozen=True)
class ValidationReport:
    symmetric: bool
    idempotent: bool
    max_asymmetry: float
    max_idempotence_error: float
    tolerance: float

    @property
    def valid(self) -> bool:
        return self.symmetric and self.idempotent


def kron(a, b) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    return np.kron(_as_finite_matrix(a, "A"), _as_finite_matrix(b, "B"))


def projector_rank(t) -> int:
    """Number of eigenvalues of the symmetric part of ``t`` that are >= 1/2."""
    t = np.asarray(t, dtype=float)
    w = np.linalg.eigvalsh((t + t.T) / 2)
    return int(np.count_nonzero(w >= RANK_THRESHOLD))


def centering_matrix(d: int) -> ProjectionMatrix:
    """``P_d = I_d - J_d / d``, the projector orthogonal to the constant vector."""
    if d < 1:
        raise DimensionError(f"centering matrix needs d >= 1, got {d}")
    p = np.eye(d) - np.full((d, d), 1.0 / d)
    return ProjectionMatrix(p, rank=d - 1)


def averaging_matrix(d: int) -> ProjectionMatrix:
    """``J_d / d``, the rank-one projector onto the constant vector."""
    if d < 1:
        raise DimensionError(f"averaging matrix needs d >= 1, got {d}")
    return ProjectionMatrix(np.full((d, d), 1.0 / d), rank=1)


def identity_projector(d: int) -> ProjectionMatrix:
    return ProjectionMatrix(np.eye(d), rank=d)


def projection_from_H(h, tolerance: float = DEFAULT_TOLERANCE) -> ProjectionMatrix:
    """Orthogonal projector ``H' (H H')^+ H`` onto the row space of ``H``.

    The pseudo-inverse is taken through the symmetric eigendecomposition of
    the Gram matrix ``H H'``, discarding eigenvalues below
    ``PINV_RCOND * max eigenvalue``. A zero ``H`` yields the zero projector
    with ``degenerate=True``.
    """
    h = _as_finite_matrix(h, "H")
    m = h.shape[1]
    gram = h @ h.T
    w, v = np.linalg.eigh((gram + gram.T) / 2)
    top = w.max(initial=0.0)
    if top <= 0.0:
        return ProjectionMatrix(np.zeros((m, m)), rank=0, tolerance=tolerance, degenerate=True)
    keep = w > PINV_RCOND * top
    a = (h.T @ v[:, keep]) / np.sqrt(w[keep])
    t = a @ a.T
    t = (t + t.T) / 2
    return ProjectionMatrix(t, rank=projector_rank(t), tolerance=tolerance)


def validate_projection(t, tolerance: float = DEFAULT_TOLERANCE) -> ValidationReport:
    """Check symmetry and idempotence of a square matrix without modifying it."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DimensionError(f"projection check needs a square matrix, got shape {t.shape}")
    asym = float(np.max(np.abs(t - t.T), initial=0.0))
    idem = float(np.max(np.abs(t @ t - t), initial=0.0))
    return ValidationReport(
        symmetric=asym <= tolerance,
        idempotent=idem <= tolerance,
        max_asymmetry=asym,
        max_idempotence_error=idem,
        tolerance=tolerance,
    )


def as_projection(t, tolerance: float = DEFAULT_TOLERANCE) -> tuple[ProjectionMatrix, ValidationReport]:
    """Wrap a user matrix as a ProjectionMatrix and return its validation report."""
    t = _as_finite_matrix(t, "T")
    report = validate_projection(t, tolerance)
    return ProjectionMatrix(t, rank=projector_rank(t), tolerance=tolerance), report


def companion(t) -> CompanionFactor:
    """Minimal-row factor of a projector.

    Eigenvectors of ``T`` belonging to eigenvalues >= 1/2 are stacked as rows,
    so ``L`` has exactly ``rank(T)`` rows, ``L L' = I`` and ``L' L = T``. The
    factor is only unique up to an orthogonal rotation of its rows.
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DimensionError(f"companion needs a square matrix, got shape {t.shape}")
    w, v = np.linalg.eigh((t + t.T) / 2)
    keep = w >= RANK_THRESHOLD
    r = int(np.count_nonzero(keep))
    if r == 0:
        raise DegenerateError("null hypothesis matrix is zero; statistic is degenerate")
    return CompanionFactor(L=np.ascontiguousarray(v[:, keep].T), source_rank=r)


def kron_companion(lw: CompanionFactor, ls: CompanionFactor) -> CompanionFactor:
    """Companion of ``T_W (x) T_S`` formed from the factors of each side."""
    return CompanionFactor(L=np.kron(lw.L, ls.L), source_rank=lw.source_rank * ls.source_rank)
