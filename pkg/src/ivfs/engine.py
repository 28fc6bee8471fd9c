"""Random-subset feature selection driven by per-feature inclusion values.

Each of k iterations draws a feature subset of size d_tilde uniformly (without
replacement within the draw) and a row sample of size n_tilde, scores the
subset, and credits that shared score to every drawn feature.  A feature's
final score is its cumulative score divided by how often it was drawn, i.e. a
Monte Carlo estimate of its inclusion value: the average score of the subsets
containing it.  The top d0 features by final score are selected.

Built-in score functions measure how well the subset preserves the pairwise
distance structure of the row sample: the negated max / entrywise-1 /
Frobenius norm of the difference between the subset's normalized distance
matrix and the all-features one, plus a supervised leave-one-out 1-NN error
score.  Custom callables with the same signature plug in directly.

Determinism contract: iteration t uses a counter-based RNG keyed by
(seed, t), and per-iteration results are merged in iteration order, so output
is bit-identical for a fixed seed no matter how many worker threads run.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import DataMatrix, LabelVector
from .distance import _pairwise_sq_dists
from .errors import (
    InvalidParameter,
    InvalidSelection,
    MissingLabels,
    OracleTooLarge,
)

_NEVER_EVALUATED = float("-inf")


def _norm_of_difference(diff: np.ndarray, order: str) -> float:
    if order == "linf":
        return float(np.max(np.abs(diff)))
    if order == "l1":
        return float(np.sum(np.abs(diff)))
    return float(np.linalg.norm(diff, "fro"))


def _distance_preservation_score(order: str):
    def score(X, rows, features, labels=None, subset_normalization="own"):
        sub = X.values[rows]
        full = np.sqrt(_pairwise_sq_dists(sub))
        full_max = full.max()
        if full_max > 0:
            full = full / full_max
        part = np.sqrt(_pairwise_sq_dists(sub[:, features]))
        scale = part.max() if subset_normalization == "own" else full_max
        if scale > 0:
            part = part / scale
        return -_norm_of_difference(part - full, order)

    return score


def _knn_error_score(X, rows, features, labels=None, subset_normalization="own"):
    if labels is None:
        raise MissingLabels("knn_error score requires labels")
    pts = X.values[rows][:, features]
    y = labels.labels[rows]
    sq = _pairwise_sq_dists(pts)
    np.fill_diagonal(sq, np.inf)
    nearest = np.argmin(sq, axis=1)  # first minimum, deterministic on ties
    return -float(np.mean(y[nearest] != y))


SCORE_FUNCTIONS = {
    "linf": _distance_preservation_score("linf"),
    "l1": _distance_preservation_score("l1"),
    "l2": _distance_preservation_score("l2"),
    "knn_error": _knn_error_score,
}


def _resolve_score(score):
    if callable(score):
        return score
    fn = SCORE_FUNCTIONS.get(score)
    if fn is None:
        raise InvalidParameter(
            f"unknown score {score!r}; expected one of {sorted(SCORE_FUNCTIONS)}"
        )
    return fn


@dataclass(frozen=True)
class IvfsConfig:
    """Run parameters: subset count k, subset width d_tilde, row sample n_tilde,
    target feature count d0, score function, RNG seed."""

    k: int
    d_tilde: int
    n_tilde: int
    d0: int
    score: object = "linf"
    seed: int = 0

    def validate(self, X: DataMatrix, labels: LabelVector | None = None):
        if self.k < 1:
            raise InvalidParameter(f"k must be positive, got {self.k}")
        if not 1 <= self.d_tilde <= X.d:
            raise InvalidParameter(
                f"d_tilde must be in [1, {X.d}], got {self.d_tilde}"
            )
        if not 2 <= self.n_tilde <= X.n:
            raise InvalidParameter(
                f"n_tilde must be in [2, {X.n}], got {self.n_tilde}"
            )
        if not 1 <= self.d0 <= X.d:
            raise InvalidParameter(f"d0 must be in [1, {X.d}], got {self.d0}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameter("seed must fit in 64 bits")
        if not callable(self.score):
            _resolve_score(self.score)
            if self.score == "knn_error" and labels is None:
                raise MissingLabels("knn_error score requires labels")
        if labels is not None and len(labels) != X.n:
            raise InvalidParameter("label vector length differs from sample count")


def default_config(X: DataMatrix, d0: int, score="linf", seed: int = 0) -> IvfsConfig:
    """Defaults: k=1000, d_tilde=ceil(0.3 d), n_tilde=min(ceil(0.1 n), 100) floored at 2."""
    return IvfsConfig(
        k=1000,
        d_tilde=max(1, math.ceil(0.3 * X.d)),
        n_tilde=max(2, min(math.ceil(0.1 * X.n), 100)),
        d0=d0,
        score=score,
        seed=seed,
    )


@dataclass(frozen=True)
class ScoreBoard:
    """Per-feature draw counters and cumulative scores."""

    counters: np.ndarray
    cumulative: np.ndarray


@dataclass(frozen=True)
class FeatureRanking:
    """Features ordered by final score (descending, ties by ascending index).

    ``scores`` is indexed by feature, not by rank; never-evaluated features
    carry -inf and rank last.  ``selected`` is the first d0 of ``order``.
    """

    order: tuple[int, ...]
    scores: np.ndarray
    selected: tuple[int, ...]
    board: ScoreBoard


def _iteration_rng(seed: int, t: int) -> np.random.Generator:
    key = np.array([seed, t], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_subsets(rng: np.random.Generator, X: DataMatrix, config: IvfsConfig):
    features = np.sort(rng.choice(X.d, size=config.d_tilde, replace=False))
    rows = np.sort(rng.choice(X.n, size=config.n_tilde, replace=False))
    return features, rows


def subset_score(
    X: DataMatrix,
    rows,
    features,
    variant="linf",
    labels: LabelVector | None = None,
    subset_normalization: str = "own",
) -> float:
    """Score one feature subset against one row sample.

    Distance-preservation variants return the negated norm of the difference
    between the subset's distance matrix and the all-features one over the
    given rows (0 when the subset reproduces the full matrix); ``knn_error``
    returns the negated leave-one-out 1-NN error rate.  Every feature in the
    subset shares this value.
    """
    if subset_normalization not in ("own", "shared"):
        raise InvalidParameter(
            f"subset_normalization must be 'own' or 'shared', got {subset_normalization!r}"
        )
    rows = np.asarray(list(rows), dtype=np.intp)
    if rows.size < 2 or rows.size != np.unique(rows).size:
        raise InvalidSelection("need at least 2 distinct rows")
    if rows.min() < 0 or rows.max() >= X.n:
        raise InvalidSelection("row index out of range")
    feats = np.asarray(
        sorted(features.indices if hasattr(features, "indices") else features),
        dtype=np.intp,
    )
    if feats.size == 0:
        raise InvalidSelection("feature subset is empty")
    if feats.min() < 0 or feats.max() >= X.d:
        raise InvalidSelection("feature index out of range")
    fn = _resolve_score(variant)
    return float(
        fn(X, rows, feats, labels, subset_normalization=subset_normalization)
    )


def run_ivfs(
    X: DataMatrix,
    config: IvfsConfig,
    labels: LabelVector | None = None,
    threads: int = 1,
    subset_normalization: str = "own",
) -> FeatureRanking:
    """Run the full selection loop and rank all features.

    Worker threads only compute per-iteration scores; accumulation always
    happens in iteration order, which makes the output independent of
    ``threads``.
    """
    config.validate(X, labels)
    if threads < 1:
        raise InvalidParameter(f"threads must be positive, got {threads}")
    fn = _resolve_score(config.score)

    def one(t: int):
        rng = _iteration_rng(config.seed, t)
        features, rows = _draw_subsets(rng, X, config)
        if callable(config.score):
            value = fn(X, rows, features, labels)
        else:
            value = fn(
                X, rows, features, labels, subset_normalization=subset_normalization
            )
        return features, float(value)

    if threads == 1:
        results = [one(t) for t in range(config.k)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(config.k)))

    counters = np.zeros(X.d, dtype=np.int64)
    cumulative = np.zeros(X.d, dtype=np.float64)
    for features, value in results:
        counters[features] += 1
        cumulative[features] += value

    scores = np.full(X.d, _NEVER_EVALUATED)
    seen = counters > 0
    scores[seen] = cumulative[seen] / counters[seen]
    order = np.lexsort((np.arange(X.d), -scores))
    return FeatureRanking(
        order=tuple(int(i) for i in order),
        scores=scores,
        selected=tuple(int(i) for i in order[: config.d0]),
        board=ScoreBoard(counters=counters, cumulative=cumulative),
    )


def exhaustive_inclusion_value(
    X: DataMatrix,
    d_tilde: int,
    score="linf",
    labels: LabelVector | None = None,
    subset_normalization: str = "own",
) -> np.ndarray:
    """Exact inclusion values by enumerating every size-d_tilde subset.

    Uses all rows.  The per-feature value is the mean score over the
    C(d-1, d_tilde-1) subsets containing it.  Guarded to C(d, d_tilde) <= 1e5.
    """
    if not 1 <= d_tilde <= X.d:
        raise InvalidParameter(f"d_tilde must be in [1, {X.d}], got {d_tilde}")
    total = math.comb(X.d, d_tilde)
    if total > 100_000:
        raise OracleTooLarge(
            f"C({X.d}, {d_tilde}) = {total} subsets exceeds the oracle guard"
        )
    fn = _resolve_score(score)
    rows = np.arange(X.n, dtype=np.intp)
    sums = np.zeros(X.d)
    for combo in itertools.combinations(range(X.d), d_tilde):
        feats = np.asarray(combo, dtype=np.intp)
        if callable(score):
            value = fn(X, rows, feats, labels)
        else:
            value = fn(X, rows, feats, labels, subset_normalization=subset_normalization)
        sums[feats] += value
    return sums / math.comb(X.d - 1, d_tilde - 1)


def write_ranking(ranking: FeatureRanking, path):
    """One line per feature in rank order: "rank feature_index score count"."""
    with open(path, "w", encoding="utf-8") as fh:
        for rank, feature in enumerate(ranking.order, start=1):
            score = ranking.scores[feature]
            count = int(ranking.board.counters[feature])
            fh.write(f"{rank} {feature} {score:.17g} {count}\n")


def read_ranking(path) -> list[int]:
    """Feature indices in rank order from a ranking file.

    Accepts the native 4-column format or bare one-index-per-line files as
    produced by external tools.
    """
    order = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            try:
                if len(parts) >= 2:
                    order.append(int(parts[1]))
                else:
                    order.append(int(parts[0]))
            except ValueError:
                raise InvalidParameter(
                    f"{path}: line {lineno} is not a ranking entry"
                ) from None
    if not order:
        raise InvalidParameter(f"{path}: empty ranking")
    if len(set(order)) != len(order):
        raise InvalidParameter(f"{path}: duplicate feature indices")
    return order
