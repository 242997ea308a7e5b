"""Predefined and user-supplied hypotheses as Kronecker projector pairs.

A split-plot hypothesis is written ``(T_W kron T_S) mu = 0`` where ``T_W``
(a x a) acts on groups and ``T_S`` (d x d) on the repeated measurements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .exceptions import DimensionError, HdrmError
from .linalg import CompanionFactor, ProjectionMatrix

PREDEFINED = ("flat", "whole", "sub", "interaction", "identical")

#: Predefined pairs are checked at this tolerance when built.
PREDEFINED_TOLERANCE = 1e-12


@dataclass(frozen=True)
class HypothesisSpec:
    """What to test.

    ``kind`` is one of the predefined names or ``"custom"``; for custom
    hypotheses ``ts`` (and, for grouped designs, ``tw``) carry the matrices.
    """

    kind: str
    tw: np.ndarray | None = None
    ts: np.ndarray | None = None

    @property
    def label(self) -> str:
        return self.kind

    @classmethod
    def parse(cls, name: str) -> HypothesisSpec:
        key = name.strip().lower()
        if key not in PREDEFINED:
            raise HdrmError(f"unknown hypothesis {name!r}; expected one of {', '.join(PREDEFINED)}")
        return cls(key)

    @classmethod
    def custom_single(cls, t) -> HypothesisSpec:
        return cls("custom", ts=np.asarray(t, dtype=float))

    @classmethod
    def custom_grouped(cls, tw, ts) -> HypothesisSpec:
        return cls("custom", tw=np.asarray(tw, dtype=float), ts=np.asarray(ts, dtype=float))


@dataclass(frozen=True)
class ProjectionPair:
    """Whole-plot and subplot projectors with precomputed companion factors.

    ``ls``/``lw`` are ``None`` when the factor is unavailable (zero
    projector, or a custom matrix that failed validation); estimators then
    fall back to the full-matrix evaluation.
    """

    tw: ProjectionMatrix
    ts: ProjectionMatrix
    lw: CompanionFactor | None
    ls: CompanionFactor | None
    label: str
    warnings: tuple[str, ...] = field(default=())

    @property
    def a(self) -> int:
        return self.tw.dim

    @property
    def d(self) -> int:
        return self.ts.dim

    @property
    def rank(self) -> int:
        return self.tw.rank * self.ts.rank

    @property
    def use_companion(self) -> bool:
        return self.ls is not None

    def full(self) -> np.ndarray:
        """Dense ``T_W kron T_S``; only for small designs and checks."""
        return np.kron(self.tw.matrix, self.ts.matrix)


def _factor(p: ProjectionMatrix) -> CompanionFactor | None:
    if p.rank == 0:
        return None
    return linalg.companion(p.matrix)


def _predefined_factors(kind: str, a: int, d: int) -> tuple[ProjectionMatrix, ProjectionMatrix]:
    if kind in ("whole", "interaction", "identical") and a < 2:
        raise DimensionError(f"hypothesis {kind!r} needs at least 2 groups, got a={a}")
    if kind in ("sub", "interaction", "flat") and d < 2:
        raise DimensionError(f"hypothesis {kind!r} needs dimension d >= 2, got d={d}")
    if kind == "whole":
        return linalg.centering_matrix(a), linalg.averaging_matrix(d)
    if kind == "sub":
        return linalg.averaging_matrix(a), linalg.centering_matrix(d)
    if kind == "interaction":
        return linalg.centering_matrix(a), linalg.centering_matrix(d)
    if kind == "identical":
        return linalg.centering_matrix(a), linalg.identity_projector(d)
    if kind == "flat":
        return linalg.identity_projector(a), linalg.centering_matrix(d)
    raise HdrmError(f"unknown hypothesis {kind!r}")


def _custom_factor(t, size: int, name: str) -> tuple[ProjectionMatrix, list[str]]:
    t = np.asarray(t, dtype=float)
    if t.shape != (size, size):
        raise DimensionError(f"{name} must be {size}x{size}, got shape {t.shape}")
    proj, report = linalg.as_projection(t)
    warnings = []
    if not report.valid:
        warnings.append(
            f"{name} is not a valid projection matrix "
            f"(asymmetry {report.max_asymmetry:.3g}, idempotence error {report.max_idempotence_error:.3g})"
        )
    return proj, warnings


def _assemble(tw: ProjectionMatrix, ts: ProjectionMatrix, label: str, warnings: list[str]) -> ProjectionPair:
    if warnings:
        # an invalid matrix has no exact factor; keep the raw quadratic forms
        return ProjectionPair(tw, ts, None, None, label, tuple(warnings))
    return ProjectionPair(tw, ts, _factor(tw), _factor(ts), label, ())


def build_single(spec: HypothesisSpec, d: int) -> ProjectionPair:
    """Projector pair for a one-group design (``T_W = [1]``)."""
    tw = linalg.identity_projector(1)
    if spec.kind == "custom":
        if spec.ts is None:
            raise HdrmError("custom one-group hypothesis needs a d x d matrix")
        ts, warnings = _custom_factor(spec.ts, d, "T")
        return _assemble(tw, ts, "custom", warnings)
    if spec.kind != "flat":
        raise HdrmError(f"one-group designs support 'flat' or a custom matrix, not {spec.kind!r}")
    _, ts = _predefined_factors("flat", 1, d)
    return _assemble(tw, ts, "flat", [])


def build_grouped(spec: HypothesisSpec, a: int, d: int) -> ProjectionPair:
    """Projector pair for an ``a``-group design."""
    if spec.kind == "custom":
        if spec.tw is None or spec.ts is None:
            raise HdrmError("custom grouped hypothesis needs both T_W and T_S")
        tw, w1 = _custom_factor(spec.tw, a, "T_W")
        ts, w2 = _custom_factor(spec.ts, d, "T_S")
        return _assemble(tw, ts, "custom", w1 + w2)
    tw, ts = _predefined_factors(spec.kind, a, d)
    return _assemble(tw, ts, spec.kind, [])
