"""Normalized Euclidean distance matrices and the matrix norms used as losses.

Every distance matrix is scaled by its largest raw entry so all entries lie
in [0, 1]; the raw maximum is retained as ``normalizer``.  A matrix computed
over a feature subset is normalized by its *own* maximum, independently of
the full matrix (``SquaredDistanceAccumulator`` exposes the alternative of
reusing the full-matrix normalizer so the effect of that choice can be
measured).

Squared distances are accumulated over feature blocks with Kahan
compensation: very wide matrices (tens of thousands of features) sum that
many small squares per pair, and the max-norm loss downstream is sensitive
to per-entry rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import DataMatrix
from .errors import InvalidParameter, InvalidSelection, ShapeError

# Feature-block ceiling: beyond this width the compensated accumulation does
# real work; the value also caps memory for the difference tensor.
_MAX_BLOCK = 4096
# Budget (in float64 elements) for one difference block, pairs * block width.
_BLOCK_BUDGET = 8_000_000


@dataclass(frozen=True)
class FeatureSubset:
    """Strictly increasing, distinct, non-empty feature indices."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise InvalidSelection("feature subset is empty")
        if idx[0] < 0:
            raise InvalidSelection(f"negative feature index {idx[0]}")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise InvalidSelection("feature indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_iterable(cls, indices, d: int | None = None) -> "FeatureSubset":
        """Build from any iterable of indices, sorting and checking distinctness."""
        idx = sorted(int(i) for i in indices)
        if len(set(idx)) != len(idx):
            raise InvalidSelection("duplicate feature indices")
        subset = cls(tuple(idx))
        if d is not None:
            subset.validate_for(d)
        return subset

    def validate_for(self, d: int):
        if self.indices[-1] >= d:
            raise InvalidSelection(
                f"feature index {self.indices[-1]} out of range for d={d}"
            )

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric pairwise distances normalized to [0, 1].

    ``normalizer`` is the raw maximum distance used for scaling; it is 0 for
    the degenerate all-points-coincide case, in which every entry is 0.
    """

    entries: np.ndarray
    normalizer: float

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InvalidParameter("distance matrix must be square")
        if not np.array_equal(entries, entries.T):
            raise InvalidParameter("distance matrix must be symmetric")
        if np.any(np.diagonal(entries) != 0.0):
            raise InvalidParameter("distance matrix diagonal must be zero")
        if entries.min() < 0.0 or entries.max() > 1.0:
            raise InvalidParameter("normalized entries must lie in [0, 1]")
        if self.normalizer < 0:
            raise InvalidParameter("normalizer must be nonnegative")
        if self.normalizer == 0 and entries.any():
            raise InvalidParameter("zero normalizer requires an all-zero matrix")
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "normalizer", float(self.normalizer))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_raw(cls, raw: np.ndarray) -> "DistanceMatrix":
        """Normalize a raw symmetric distance matrix by its largest entry."""
        raw = np.asarray(raw, dtype=np.float64)
        top = float(raw.max()) if raw.size else 0.0
        if top == 0.0:
            return cls(np.zeros_like(raw), 0.0)
        return cls(raw / top, top)


def _block_width(n_pairs_side: int) -> int:
    return max(16, min(_MAX_BLOCK, _BLOCK_BUDGET // max(1, n_pairs_side * n_pairs_side)))


def _pairwise_sq_dists(M: np.ndarray) -> np.ndarray:
    """All-pairs squared Euclidean distances of the rows of M.

    Accumulates feature blocks with Kahan compensation; the input is
    canonicalized to C order first so the summation order (and hence the
    result, bit for bit) depends only on the values and the shape, not on
    how the submatrix was sliced out.
    """
    M = np.ascontiguousarray(M)
    m, d = M.shape
    width = _block_width(m)
    total = np.zeros((m, m))
    if width >= d:
        diff = M[:, None, :] - M[None, :, :]
        np.einsum("ijk,ijk->ij", diff, diff, out=total)
        return total
    comp = np.zeros((m, m))
    for start in range(0, d, width):
        block = M[:, start : start + width]
        diff = block[:, None, :] - block[None, :, :]
        part = np.einsum("ijk,ijk->ij", diff, diff)
        y = part - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def _check_rows(rows, n: int) -> np.ndarray:
    idx = np.asarray(list(rows), dtype=np.intp)
    if idx.size < 2:
        raise InvalidSelection("need at least 2 rows")
    if idx.size != np.unique(idx).size:
        raise InvalidSelection("duplicate row indices")
    if idx.min() < 0 or idx.max() >= n:
        raise InvalidSelection(f"row index out of range for n={n}")
    return idx


def _coerce_features(features, d: int) -> np.ndarray:
    if isinstance(features, FeatureSubset):
        features.validate_for(d)
        return features.as_array()
    subset = FeatureSubset.from_iterable(features, d=d)
    return subset.as_array()


def distance_matrix(X: DataMatrix, rows=None, features=None) -> DistanceMatrix:
    """Pairwise normalized Euclidean distances over selected rows and features.

    Parameters
    ----------
    X : DataMatrix
    rows : optional iterable of distinct sample indices (at least 2)
    features : optional FeatureSubset or iterable of feature indices

    Restricting rows and features here is identical to physically extracting
    the submatrix first and computing on it.
    """
    M = X.values
    if rows is not None:
        idx = _check_rows(rows, X.n)
        M = M[idx]
    if features is not None:
        cols = _coerce_features(features, X.d)
        M = M[:, cols]
    raw = np.sqrt(_pairwise_sq_dists(M))
    return DistanceMatrix.from_raw(raw)


def _check_same_shape(A: DistanceMatrix, B: DistanceMatrix):
    if A.n != B.n:
        raise ShapeError(f"distance matrices differ in size: {A.n} vs {B.n}")


def norm_linf(A: DistanceMatrix, B: DistanceMatrix) -> float:
    """Maximum absolute entrywise difference."""
    _check_same_shape(A, B)
    return float(np.max(np.abs(A.entries - B.entries)))


def norm_l1(A: DistanceMatrix, B: DistanceMatrix) -> float:
    """Sum of absolute differences over all n^2 ordered entries."""
    _check_same_shape(A, B)
    return float(np.sum(np.abs(A.entries - B.entries)))


def norm_l2(A: DistanceMatrix, B: DistanceMatrix) -> float:
    """Frobenius norm of the difference."""
    _check_same_shape(A, B)
    return float(np.linalg.norm(A.entries - B.entries, "fro"))


class SquaredDistanceAccumulator:
    """Per-feature squared-difference access for one fixed row subset.

    For rows r and features f the contribution g_f[i][j] = (x_if - x_jf)^2 is
    additive, so the squared distance over any feature subset is the sum of
    the selected contributions.  This lets many subsets be scored against a
    single row sample without rescanning the full matrix.
    """

    def __init__(self, X: DataMatrix, rows):
        idx = _check_rows(rows, X.n)
        self._sub = X.values[idx]
        self._d = X.d
        self._total: np.ndarray | None = None

    @property
    def row_count(self) -> int:
        return self._sub.shape[0]

    def feature_contribution(self, f: int) -> np.ndarray:
        if not 0 <= f < self._d:
            raise InvalidSelection(f"feature index {f} out of range")
        col = self._sub[:, f]
        return (col[:, None] - col[None, :]) ** 2

    def subset_squared(self, features=None) -> np.ndarray:
        """Squared distances over a feature subset (all features if None)."""
        if features is None:
            if self._total is None:
                self._total = _pairwise_sq_dists(self._sub)
            return self._total
        cols = _coerce_features(features, self._d)
        return _pairwise_sq_dists(self._sub[:, cols])

    def distances(self, features=None) -> DistanceMatrix:
        """Normalized distance matrix over the subset, scaled by its own maximum."""
        return DistanceMatrix.from_raw(np.sqrt(self.subset_squared(features)))


def save_distances_csv(D: DistanceMatrix, path):
    """Dense row-major CSV dump (no header); debugging aid, not a stable format."""
    np.savetxt(path, D.entries, fmt="%.17g", delimiter=",")
