"""Evaluation protocol: KNN accuracy, diagram distances, matrix norms,
bootstrap stability, and parameter grids.

All metrics are pure functions of (data, labels, selected features, seed);
only wall-clock fields vary between identical runs.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import DataMatrix, LabelVector
from .diagram_metrics import bottleneck, wasserstein
from .distance import (
    FeatureSubset,
    distance_matrix,
    norm_l1,
    norm_l2,
    norm_linf,
)
from .engine import IvfsConfig, run_ivfs
from .errors import FoldError, InvalidParameter
from .persistence import build_filtration, persistence_h0, persistence_h1, threshold_diagram

KNN_NEIGHBOR_GRID = (1, 3, 5, 10)


@dataclass(frozen=True)
class TopoMetrics:
    """Distance- and topology-preservation metrics for one feature subset."""

    w11: float
    w_inf: float
    l1: float
    l2: float
    linf: float

    def __iter__(self):
        return iter((self.w11, self.w_inf, self.l1, self.l2, self.linf))


@dataclass(frozen=True)
class EvalReport:
    knn_accuracy: float | None
    w11: float
    w_inf: float
    l1_norm: float
    l2_norm: float
    linf_norm: float
    l1_per_n2_x100: float
    wall_time_seconds: float
    d0_used: int

    def to_dict(self) -> dict:
        return {
            "knn_accuracy": self.knn_accuracy,
            "w11": self.w11,
            "w_inf": self.w_inf,
            "l1_norm": self.l1_norm,
            "l2_norm": self.l2_norm,
            "linf_norm": self.linf_norm,
            "l1_per_n2_x100": self.l1_per_n2_x100,
            "wall_time_seconds": self.wall_time_seconds,
            "d0_used": self.d0_used,
        }


@dataclass(frozen=True)
class StabilityResult:
    """Per-repetition counts of features selected on the original data but
    missing from the bootstrap selection."""

    differing_counts: tuple[int, ...]
    repetitions: int
    mean_differing: float


def _vote(train_labels: np.ndarray, neighbor_idx: np.ndarray, class_count: int) -> np.ndarray:
    votes = np.zeros(neighbor_idx.shape[0], dtype=np.int64)
    for r in range(neighbor_idx.shape[0]):
        counts = np.bincount(train_labels[neighbor_idx[r]], minlength=class_count)
        votes[r] = counts.argmax()  # ties go to the smallest class id
    return votes


def knn_accuracy(
    X_F: DataMatrix,
    y: LabelVector,
    seed: int,
    neighbors=KNN_NEIGHBOR_GRID,
    splits: int = 10,
    train_fraction: float = 0.8,
) -> float:
    """Best mean KNN test accuracy over the neighbor grid.

    Runs ``splits`` random train/test splits, computes mean test accuracy for
    each K, and reports the highest mean.  A fold missing a class in training
    is redrawn once, then raises FoldError.
    """
    n = X_F.n
    if n < 10:
        raise InvalidParameter(f"need at least 10 samples, got {n}")
    if len(y) != n:
        raise InvalidParameter("label vector length differs from sample count")
    present = np.unique(y.labels)
    if present.size < 2:
        raise InvalidParameter("need at least 2 classes present")
    rng = np.random.default_rng(seed)
    n_train = max(1, int(train_fraction * n))
    if n_train >= n:
        n_train = n - 1
    V = X_F.values
    accuracy = np.zeros((splits, len(neighbors)))
    for s in range(splits):
        perm = rng.permutation(n)
        for attempt in range(2):
            train, test = perm[:n_train], perm[n_train:]
            train_classes = np.unique(y.labels[train])
            if train_classes.size == present.size:
                break
            if attempt == 1:
                raise FoldError("a class is absent from the training fold")
            perm = rng.permutation(n)
        diff = V[test][:, None, :] - V[train][None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        order = np.argsort(sq, axis=1, kind="stable")
        y_train, y_test = y.labels[train], y.labels[test]
        for ki, K in enumerate(neighbors):
            predicted = _vote(y_train, order[:, :K], y.class_count)
            accuracy[s, ki] = float(np.mean(predicted == y_test))
    return float(accuracy.mean(axis=0).max())


def _diagram_distance_pair(diag_a, diag_b, epsilon):
    a = threshold_diagram(diag_a, epsilon)
    b = threshold_diagram(diag_b, epsilon)
    return wasserstein(a, b, p=1, q=1), bottleneck(a, b)


def topo_metrics(
    X: DataMatrix,
    features,
    alpha_max: float = 0.5,
    epsilon: float = 0.1,
    include_dim0: bool = False,
    return_diagrams: bool = False,
):
    """All five preservation metrics for one feature subset.

    Computes the full and restricted distance matrices over every sample, the
    three matrix norms, and the dimension-1 diagram distances at the given
    truncation after dropping bars shorter than epsilon.  With
    ``include_dim0`` the dimension-0 diagrams are compared as well; per-
    dimension Wasserstein values add and bottleneck values take the max,
    which keeps both aggregates metrics.  ``return_diagrams`` appends the two
    thresholded dimension-1 diagrams to the result.
    """
    subset = (
        features
        if isinstance(features, FeatureSubset)
        else FeatureSubset.from_iterable(features, d=X.d)
    )
    D = distance_matrix(X)
    DF = distance_matrix(X, features=subset)
    l1, l2, linf = norm_l1(D, DF), norm_l2(D, DF), norm_linf(D, DF)

    filt_full = build_filtration(D, alpha_max)
    filt_sub = build_filtration(DF, alpha_max)
    dgm_full = threshold_diagram(persistence_h1(filt_full), epsilon)
    dgm_sub = threshold_diagram(persistence_h1(filt_sub), epsilon)
    w11 = wasserstein(dgm_full, dgm_sub, p=1, q=1)
    w_inf = bottleneck(dgm_full, dgm_sub)
    if include_dim0:
        w11_0, w_inf_0 = _diagram_distance_pair(
            persistence_h0(filt_full), persistence_h0(filt_sub), epsilon
        )
        w11 += w11_0
        w_inf = max(w_inf, w_inf_0)
    metrics = TopoMetrics(w11=w11, w_inf=w_inf, l1=l1, l2=l2, linf=linf)
    if return_diagrams:
        return metrics, dgm_full, dgm_sub
    return metrics


def evaluate_subset(
    X: DataMatrix,
    features,
    y: LabelVector | None = None,
    seed: int = 0,
    alpha_max: float = 0.5,
    epsilon: float = 0.1,
    wall_time_seconds: float = 0.0,
    include_dim0: bool = False,
    return_diagrams: bool = False,
):
    """Full report for one selected feature set.

    With ``return_diagrams`` also returns the thresholded dimension-1
    diagrams of the full data and of the restricted data.
    """
    subset = (
        features
        if isinstance(features, FeatureSubset)
        else FeatureSubset.from_iterable(features, d=X.d)
    )
    metrics, dgm_full, dgm_sub = topo_metrics(
        X, subset, alpha_max, epsilon, include_dim0, return_diagrams=True
    )
    acc = None
    if y is not None:
        from .dataset import select_features

        acc = knn_accuracy(select_features(X, subset), y, seed)
    n = X.n
    report = EvalReport(
        knn_accuracy=acc,
        w11=metrics.w11,
        w_inf=metrics.w_inf,
        l1_norm=metrics.l1,
        l2_norm=metrics.l2,
        linf_norm=metrics.linf,
        l1_per_n2_x100=metrics.l1 / (n * n) * 100.0,
        wall_time_seconds=wall_time_seconds,
        d0_used=len(subset),
    )
    if return_diagrams:
        return report, dgm_full, dgm_sub
    return report


def bootstrap_stability(
    X: DataMatrix,
    config: IvfsConfig,
    repetitions: int,
    seed: int,
    labels: LabelVector | None = None,
    threads: int = 1,
) -> StabilityResult:
    """How many originally selected features disappear under bootstrap resampling.

    Selection runs once on X, then ``repetitions`` times on n-with-replacement
    resamples; each repetition counts the features selected on the original
    data that the resampled run missed.
    """
    if repetitions < 1:
        raise InvalidParameter(f"repetitions must be positive, got {repetitions}")
    base = set(run_ivfs(X, config, labels, threads=threads).selected)
    rng = np.random.default_rng(seed)
    counts = []
    for _ in range(repetitions):
        idx = _bootstrap_indices(rng, X.n)
        resampled = DataMatrix(
            X.values[idx], feature_names=X.feature_names, standardized=False
        )
        y_b = None
        if labels is not None:
            y_b = LabelVector(labels.labels[idx], class_count=labels.class_count)
        chosen = set(run_ivfs(resampled, config, y_b, threads=threads).selected)
        counts.append(len(base - chosen))
    return StabilityResult(
        differing_counts=tuple(counts),
        repetitions=repetitions,
        mean_differing=float(np.mean(counts)),
    )


def _bootstrap_indices(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, n, size=n)


GRID_KEYS = ("k", "d_tilde", "n_tilde", "d0", "score")


@dataclass(frozen=True)
class GridCell:
    config: IvfsConfig
    reports: tuple[EvalReport, ...] = field(default_factory=tuple)

    def mean_report(self) -> EvalReport:
        reports = self.reports
        accs = [r.knn_accuracy for r in reports if r.knn_accuracy is not None]
        return EvalReport(
            knn_accuracy=float(np.mean(accs)) if accs else None,
            w11=float(np.mean([r.w11 for r in reports])),
            w_inf=float(np.mean([r.w_inf for r in reports])),
            l1_norm=float(np.mean([r.l1_norm for r in reports])),
            l2_norm=float(np.mean([r.l2_norm for r in reports])),
            linf_norm=float(np.mean([r.linf_norm for r in reports])),
            l1_per_n2_x100=float(np.mean([r.l1_per_n2_x100 for r in reports])),
            wall_time_seconds=float(np.mean([r.wall_time_seconds for r in reports])),
            d0_used=reports[0].d0_used,
        )


def run_grid(
    X: DataMatrix,
    grid: dict,
    y: LabelVector | None = None,
    seed: int = 0,
    repeats: int = 1,
    threads: int = 1,
    alpha_max: float = 0.5,
    epsilon: float = 0.1,
) -> list[GridCell]:
    """Evaluate the Cartesian product of parameter lists.

    ``grid`` maps any of k / d_tilde / n_tilde / d0 / score to a list of
    values.  Repetition r of a cell runs with seed ``seed + r``; wall time
    covers the selection loop only.
    """
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise InvalidParameter("grid must have at least one value per axis")
    unknown = set(grid) - set(GRID_KEYS)
    if unknown:
        raise InvalidParameter(f"unknown grid keys: {sorted(unknown)}")
    if repeats < 1:
        raise InvalidParameter(f"repeats must be positive, got {repeats}")
    axes = [grid.get(key, [None]) for key in GRID_KEYS]
    defaults = {"score": "linf"}
    cells = []
    for combo in itertools.product(*axes):
        params = {
            key: value for key, value in zip(GRID_KEYS, combo) if value is not None
        }
        params = {**defaults, **params}
        reports = []
        for r in range(repeats):
            config = IvfsConfig(seed=seed + r, **params)
            start = time.perf_counter()
            ranking = run_ivfs(X, config, y, threads=threads)
            elapsed = time.perf_counter() - start
            reports.append(
                evaluate_subset(
                    X,
                    ranking.selected,
                    y=y,
                    seed=seed + r,
                    alpha_max=alpha_max,
                    epsilon=epsilon,
                    wall_time_seconds=elapsed,
                )
            )
        cells.append(
            GridCell(config=IvfsConfig(seed=seed, **params), reports=tuple(reports))
        )
    return cells


_METRIC_DIRECTIONS = {
    "knn_accuracy": max,
    "w11": min,
    "w_inf": min,
    "l1_norm": min,
    "l2_norm": min,
    "linf_norm": min,
}


def best_per_metric(cells: list[GridCell]) -> dict:
    """Best mean value per metric across grid cells, with the winning cell index."""
    best = {}
    for metric, better in _METRIC_DIRECTIONS.items():
        candidates = [
            (i, getattr(cell.mean_report(), metric)) for i, cell in enumerate(cells)
        ]
        candidates = [(i, v) for i, v in candidates if v is not None]
        if not candidates:
            continue
        idx, value = (
            max(candidates, key=lambda t: t[1])
            if better is max
            else min(candidates, key=lambda t: t[1])
        )
        best[metric] = {"cell": idx, "value": value}
    return best
