"""Dataset construction from wide (one subject per column) or long
(value/subject[/group] records) input, with removal of incomplete subjects.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .exceptions import DataError

NA_VALUES = ["NA", "NaN", "nan"]


@dataclass(frozen=True)
class Dataset:
    """Observation vectors grouped by label.

    ``groups[i]`` is an ``(n_i, d)`` array, one subject per row. Labels are
    sorted lexicographically so group order is deterministic.
    """

    groups: tuple[np.ndarray, ...]
    labels: tuple[str, ...]
    removed_incomplete: int = 0
    subjects: tuple[tuple[str, ...], ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.groups:
            raise DataError("dataset has no groups")
        if len(self.labels) != len(self.groups):
            raise DataError("one label per group required")
        d = self.groups[0].shape[1]
        for lab, x in zip(self.labels, self.groups):
            if x.ndim != 2 or x.shape[1] != d:
                raise DataError(f"group {lab!r} does not hold {d}-dimensional rows")
            if x.shape[0] < 1:
                raise DataError(f"group {lab!r} has no complete subjects")
            if not np.all(np.isfinite(x)):
                raise DataError(f"group {lab!r} contains non-finite values")

    @property
    def d(self) -> int:
        return self.groups[0].shape[1]

    @property
    def a(self) -> int:
        return len(self.groups)

    @property
    def n(self) -> tuple[int, ...]:
        return tuple(x.shape[0] for x in self.groups)

    @property
    def N(self) -> int:
        return sum(self.n)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.removed_incomplete == other.removed_incomplete
            and len(self.groups) == len(other.groups)
            and all(np.array_equal(x, y) for x, y in zip(self.groups, other.groups))
        )

    @classmethod
    def from_groups(cls, groups: Sequence[np.ndarray], labels: Sequence[str] | None = None) -> Dataset:
        """Wrap already separated ``(n_i, d)`` arrays, keeping their order."""
        arrays = tuple(np.array(g, dtype=float, ndmin=2) for g in groups)
        if labels is None:
            labels = [f"g{i + 1}" for i in range(len(arrays))]
        return cls(arrays, tuple(str(s) for s in labels))


@dataclass(frozen=True)
class LongTable:
    values: np.ndarray
    subjects: np.ndarray
    groups: np.ndarray | None = None

    def __post_init__(self):
        if len(self.values) == 0:
            raise DataError("long table has no records")
        if len(self.subjects) != len(self.values):
            raise DataError("subject vector length differs from value vector length")
        if self.groups is not None and len(self.groups) != len(self.values):
            raise DataError("group vector length differs from value vector length")


def _labels(x) -> np.ndarray:
    return np.asarray([str(v) for v in x], dtype=object)


def from_wide(matrix, group_of_column: Sequence | None = None) -> Dataset:
    """Build a dataset from a ``d x n`` matrix whose columns are subjects.

    Columns with a non-finite entry are dropped and counted as incomplete.
    """
    m = np.array(matrix, dtype=float, ndmin=2)
    if m.ndim != 2 or m.size == 0:
        raise DataError("wide data must be a nonempty matrix")
    n_subj = m.shape[1]
    if group_of_column is None:
        cols = np.zeros(n_subj, dtype=object)
        cols[:] = "1"
    else:
        cols = _labels(group_of_column)
        if len(cols) != n_subj:
            raise DataError(f"group vector has {len(cols)} entries but data has {n_subj} subject columns")
    complete = np.all(np.isfinite(m), axis=0)
    removed = int(n_subj - complete.sum())
    groups, labels = [], []
    for lab in sorted(set(cols)):
        sel = (cols == lab) & complete
        if not sel.any():
            raise DataError(f"group {lab!r} has no complete subjects")
        groups.append(m[:, sel].T.copy())
        labels.append(lab)
    return Dataset(tuple(groups), tuple(labels), removed)


def to_wide(ds: Dataset) -> tuple[np.ndarray, list[str]]:
    """Inverse of :func:`from_wide`: ``d x N`` matrix plus per-column labels."""
    matrix = np.hstack([x.T for x in ds.groups])
    labels = [lab for lab, x in zip(ds.labels, ds.groups) for _ in range(x.shape[0])]
    return matrix, labels


def from_long(table: LongTable) -> Dataset:
    """Build a dataset from value/subject(/group) records.

    Measurements of a subject keep the order of their first appearance.
    The dimension is the most frequent per-subject record count (largest
    count on ties); subjects with a different count, or with a missing
    value, are dropped and counted in ``removed_incomplete``.
    """
    values = np.asarray(table.values, dtype=float)
    subjects = _labels(table.subjects)
    groups = _labels(table.groups) if table.groups is not None else None

    records: dict[str, list[float]] = {}
    group_of: dict[str, str] = {}
    for k, s in enumerate(subjects):
        records.setdefault(s, []).append(values[k])
        if groups is not None:
            g = groups[k]
            if group_of.setdefault(s, g) != g:
                raise DataError(f"subject {s!r} appears in groups {group_of[s]!r} and {g!r}")

    counts = Counter(len(v) for v in records.values())
    top = max(counts.values())
    d = max(c for c, k in counts.items() if k == top)

    by_group: dict[str, list[tuple[str, list[float]]]] = {}
    for s, vals in records.items():
        if len(vals) != d or not np.all(np.isfinite(vals)):
            continue
        by_group.setdefault(group_of.get(s, "1"), []).append((s, vals))
    kept = sum(len(v) for v in by_group.values())
    if kept == 0:
        raise DataError("no complete subjects in long table")

    out, labels, subj = [], [], []
    for lab in sorted(by_group):
        members = sorted(by_group[lab], key=lambda t: t[0])
        out.append(np.array([v for _, v in members], dtype=float))
        labels.append(lab)
        subj.append(tuple(s for s, _ in members))
    return Dataset(tuple(out), tuple(labels), len(records) - kept, tuple(subj))


def read_wide_csv(path: str | Path, group_path: str | Path | None = None) -> Dataset:
    """Headerless numeric CSV, one subject per column; optional label file."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file not found: {path}")
    try:
        frame = pd.read_csv(path, header=None, na_values=NA_VALUES, keep_default_na=False)
        matrix = frame.to_numpy(dtype=float)
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc
    labels = None
    if group_path is not None:
        labels = read_labels(group_path)
    return from_wide(matrix, labels)


def read_labels(path: str | Path) -> list[str]:
    """Group labels, one per line or comma-separated on one line."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"group file not found: {path}")
    text = path.read_text(encoding="utf-8")
    tokens = [t.strip() for line in text.splitlines() for t in line.split(",")]
    return [t for t in tokens if t]


def read_matrix_csv(path: str | Path) -> np.ndarray:
    """Headerless numeric matrix, such as a custom hypothesis projection."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"matrix file not found: {path}")
    try:
        matrix = pd.read_csv(path, header=None).to_numpy(dtype=float)
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc
    return matrix


def read_long_csv(
    path: str | Path,
    value_col: str = "value",
    subject_col: str = "subject",
    group_col: str | None = "group",
) -> Dataset:
    """Headered CSV with value, subject and (optional) group columns."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file not found: {path}")
    try:
        frame = pd.read_csv(
            path,
            na_values=NA_VALUES,
            keep_default_na=False,
            dtype={subject_col: str, **({group_col: str} if group_col else {})},
        )
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc
    for col in (value_col, subject_col):
        if col not in frame.columns:
            raise DataError(f"{path} has no column {col!r}")
    groups = frame[group_col].to_numpy() if group_col and group_col in frame.columns else None
    try:
        values = pd.to_numeric(frame[value_col]).to_numpy(dtype=float)
    except ValueError as exc:
        raise DataError(f"non-numeric entry in column {value_col!r} of {path}") from exc
    return from_long(LongTable(values, frame[subject_col].to_numpy(), groups))
