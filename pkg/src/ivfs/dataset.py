"""Tabular data loading, validation, and per-column standardization."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InvalidParameter, ParseError


@dataclass(frozen=True)
class DataMatrix:
    """An n-by-d numeric matrix with the sample/feature index spaces used everywhere else.

    ``values`` is stored float64, C-contiguous, and marked read-only so
    instances can be shared freely across threads.
    """

    values: np.ndarray
    feature_names: tuple[str, ...] | None = None
    standardized: bool = False

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidParameter("data matrix must be two-dimensional")
        n, d = values.shape
        if n < 2:
            raise InvalidParameter(f"need at least 2 samples, got {n}")
        if d < 1:
            raise InvalidParameter("need at least 1 feature")
        if not np.all(np.isfinite(values)):
            raise InvalidParameter("data matrix contains NaN or Inf entries")
        if self.feature_names is not None:
            names = tuple(str(x) for x in self.feature_names)
            if len(names) != d:
                raise InvalidParameter(
                    f"{len(names)} feature names for {d} features"
                )
            object.__setattr__(self, "feature_names", names)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelVector:
    """Dense integer class labels in [0, class_count)."""

    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise InvalidParameter("labels must be one-dimensional")
        if self.class_count < 2:
            raise InvalidParameter("need at least 2 classes")
        if labels.size and (labels.min() < 0 or labels.max() >= self.class_count):
            raise InvalidParameter("labels out of range [0, class_count)")
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.labels.size


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, label_column=None):
    """Load a CSV file into a DataMatrix plus an optional LabelVector.

    The header row is auto-detected: if any cell in the first row fails to
    parse as a number the row is treated as a header.  ``label_column``
    selects the label column by name (requires a header) or by 0-based
    integer position; label values are mapped to dense integers in order of
    first appearance.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise EmptyInput(f"{path}: no rows")

    has_header = any(not _is_number(cell) for cell in rows[0])
    header = rows[0] if has_header else None
    data_rows = rows[1:] if has_header else rows
    if not data_rows:
        raise EmptyInput(f"{path}: header only, no data rows")

    width = len(rows[0])
    label_idx = None
    if label_column is not None:
        try:
            label_idx = int(label_column)
        except (TypeError, ValueError):
            if header is None:
                raise InvalidParameter(
                    "label column selected by name but the file has no header"
                ) from None
            if label_column not in header:
                raise InvalidParameter(f"label column {label_column!r} not in header")
            label_idx = header.index(label_column)
        if not 0 <= label_idx < width:
            raise InvalidParameter(f"label column index {label_idx} out of range")

    n_feature_cols = width if label_idx is None else width - 1
    values = np.empty((len(data_rows), n_feature_cols), dtype=np.float64)
    raw_labels = []
    offset = 2 if has_header else 1  # 1-based file row of the first data row
    for r, row in enumerate(data_rows):
        if len(row) != width:
            raise ParseError(
                f"row {r + offset}: expected {width} cells, got {len(row)}",
                row=r + offset,
            )
        c_out = 0
        for c, cell in enumerate(row):
            if c == label_idx:
                raw_labels.append(cell)
                continue
            try:
                x = float(cell)
            except ValueError:
                raise ParseError(
                    f"row {r + offset}, column {c + 1}: {cell!r} is not numeric",
                    row=r + offset,
                    col=c + 1,
                ) from None
            if not math.isfinite(x):
                raise ParseError(
                    f"row {r + offset}, column {c + 1}: non-finite value {cell!r}",
                    row=r + offset,
                    col=c + 1,
                )
            values[r, c_out] = x
            c_out += 1

    names = None
    if header is not None:
        names = tuple(h for i, h in enumerate(header) if i != label_idx)
    matrix = DataMatrix(values, feature_names=names)

    labels = None
    if label_idx is not None:
        seen: dict[str, int] = {}
        encoded = [seen.setdefault(cell, len(seen)) for cell in raw_labels]
        labels = LabelVector(np.array(encoded, dtype=np.int64), class_count=len(seen))
    return matrix, labels


def write_csv(X: DataMatrix, path, labels: LabelVector | None = None, label_name="label"):
    """Write a DataMatrix (and optional labels) back to CSV.

    Values use shortest round-trip decimal representation, so a reload
    reproduces the matrix exactly.  A header is written only when the matrix
    carries feature names or when labels are included.
    """
    names = X.feature_names
    if labels is not None and names is None:
        names = tuple(f"f{i}" for i in range(X.d))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if names is not None:
            row = list(names)
            if labels is not None:
                row.append(label_name)
            writer.writerow(row)
        for i in range(X.n):
            row = [repr(float(v)) for v in X.values[i]]
            if labels is not None:
                row.append(str(int(labels.labels[i])))
            writer.writerow(row)


def standardize(X: DataMatrix) -> DataMatrix:
    """Center each column and scale it to unit sample standard deviation.

    Uses the n-1 divisor.  Constant columns become all-zero columns rather
    than raising, so degenerate features simply stop contributing to
    distances downstream.
    """
    if X.standardized:
        raise InvalidParameter("matrix is already standardized")
    centered = X.values - X.values.mean(axis=0)
    # second pass kills the rounding residue of the first mean, which would
    # otherwise dominate near-constant columns after scaling
    centered = centered - centered.mean(axis=0)
    sd = centered.std(axis=0, ddof=1)
    constant = (X.values.max(axis=0) == X.values.min(axis=0)) | (sd == 0)
    out = np.where(constant, 0.0, centered / np.where(constant, 1.0, sd))
    return DataMatrix(out, feature_names=X.feature_names, standardized=True)


def select_features(X: DataMatrix, features) -> DataMatrix:
    """Restrict a DataMatrix to the given feature indices (FeatureSubset or iterable)."""
    idx = np.asarray(
        features.indices if hasattr(features, "indices") else list(features),
        dtype=np.intp,
    )
    names = None
    if X.feature_names is not None:
        names = tuple(X.feature_names[i] for i in idx)
    return DataMatrix(X.values[:, idx], feature_names=names, standardized=X.standardized)
