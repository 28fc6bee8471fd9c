import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ivfs import (
    DataMatrix,
    DistanceMatrix,
    FeatureSubset,
    SquaredDistanceAccumulator,
    distance_matrix,
    norm_l1,
    norm_l2,
    norm_linf,
)
from ivfs.distance import save_distances_csv
from ivfs.errors import InvalidParameter, InvalidSelection, ShapeError


def test_two_points_normalize_to_one():
    X = DataMatrix(np.array([[0.0, 0.0], [3.0, 4.0]]))
    D = distance_matrix(X)
    assert D.entries.tolist() == [[0.0, 1.0], [1.0, 0.0]]
    assert D.normalizer == 5.0


def test_three_collinear_points():
    # raw distances {1, 3, 2}, divided by 3
    X = DataMatrix(np.array([[0.0], [1.0], [3.0]]))
    D = distance_matrix(X)
    expected = np.array([[0, 1 / 3, 1], [1 / 3, 0, 2 / 3], [1, 2 / 3, 0]])
    assert np.max(np.abs(D.entries - expected)) < 1e-15


def test_identical_points_give_zero_matrix():
    X = DataMatrix(np.ones((3, 2)))
    D = distance_matrix(X)
    assert not D.entries.any()
    assert D.normalizer == 0.0


def test_row_and_feature_restriction_matches_physical_submatrix():
    rng = np.random.default_rng(5)
    X = DataMatrix(rng.normal(size=(12, 7)))
    rows = [1, 4, 9, 10]
    feats = FeatureSubset((0, 2, 5))
    direct = distance_matrix(X, rows=rows, features=feats)
    extracted = distance_matrix(DataMatrix(X.values[np.ix_(rows, [0, 2, 5])]))
    assert np.array_equal(direct.entries, extracted.entries)
    assert direct.normalizer == extracted.normalizer


def test_too_few_rows():
    X = DataMatrix(np.ones((3, 2)))
    with pytest.raises(InvalidSelection):
        distance_matrix(X, rows=[1])
    with pytest.raises(InvalidSelection):
        distance_matrix(X, rows=[1, 1])


def test_feature_subset_validation():
    with pytest.raises(InvalidSelection):
        FeatureSubset(())
    with pytest.raises(InvalidSelection):
        FeatureSubset((3, 1))
    with pytest.raises(InvalidSelection):
        FeatureSubset.from_iterable([1, 1])
    with pytest.raises(InvalidSelection):
        FeatureSubset.from_iterable([0, 9], d=5)
    assert FeatureSubset.from_iterable([4, 0, 2]).indices == (0, 2, 4)


def test_norm_identity_and_single_perturbation():
    rng = np.random.default_rng(0)
    D = distance_matrix(DataMatrix(rng.normal(size=(6, 3))))
    assert norm_linf(D, D) == 0.0
    assert norm_l1(D, D) == 0.0
    assert norm_l2(D, D) == 0.0

    bumped = D.entries.copy()
    i, j = 1, 3
    bumped[i, j] = bumped[j, i] = max(0.0, bumped[i, j] - 0.2)
    B = DistanceMatrix(bumped, D.normalizer)
    assert norm_linf(D, B) == pytest.approx(0.2, abs=1e-15)


def test_norms_hand_computed_2x2():
    A = DistanceMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), 1.0)
    B = DistanceMatrix(np.array([[0.0, 0.9], [0.9, 0.0]]), 1.0)
    assert norm_l1(A, B) == pytest.approx(0.2, abs=1e-15)
    assert norm_l2(A, B) == pytest.approx(0.1 * np.sqrt(2), abs=1e-15)
    assert norm_linf(A, B) == pytest.approx(0.1, abs=1e-15)


def test_norms_match_naive_double_loop():
    rng = np.random.default_rng(11)
    A = distance_matrix(DataMatrix(rng.normal(size=(10, 4))))
    B = distance_matrix(DataMatrix(rng.normal(size=(10, 4))))
    n = A.n
    l1 = l2 = linf = 0.0
    for i in range(n):
        for j in range(n):
            diff = abs(A.entries[i, j] - B.entries[i, j])
            l1 += diff
            l2 += diff * diff
            linf = max(linf, diff)
    assert norm_l1(A, B) == pytest.approx(l1, abs=1e-12)
    assert norm_l2(A, B) == pytest.approx(np.sqrt(l2), abs=1e-12)
    assert norm_linf(A, B) == pytest.approx(linf, abs=1e-12)


def test_norm_shape_mismatch():
    A = distance_matrix(DataMatrix(np.eye(3)))
    B = distance_matrix(DataMatrix(np.eye(4)))
    with pytest.raises(ShapeError):
        norm_linf(A, B)


def test_accumulator_matches_direct_computation():
    rng = np.random.default_rng(2)
    X = DataMatrix(rng.normal(size=(15, 9)))
    rows = [0, 3, 7, 8, 14]
    acc = SquaredDistanceAccumulator(X, rows)
    direct = distance_matrix(X, rows=rows)
    assert np.max(np.abs(acc.distances().entries - direct.entries)) < 1e-9

    F = FeatureSubset((1, 4, 6))
    direct_f = distance_matrix(X, rows=rows, features=F)
    assert np.max(np.abs(acc.distances(F).entries - direct_f.entries)) < 1e-9

    # naive per-pair oracle over the subset
    sub = X.values[np.ix_(rows, [1, 4, 6])]
    naive = np.zeros((5, 5))
    for i in range(5):
        for j in range(5):
            naive[i, j] = np.sum((sub[i] - sub[j]) ** 2)
    assert np.max(np.abs(acc.subset_squared(F) - naive)) < 1e-9


def test_accumulator_single_feature_proportional_to_abs_difference():
    X = DataMatrix(np.array([[0.0, 5.0], [2.0, 5.0], [6.0, 5.0]]))
    acc = SquaredDistanceAccumulator(X, [0, 1, 2])
    g = acc.feature_contribution(0)
    col = X.values[:, 0]
    assert np.array_equal(g, (col[:, None] - col[None, :]) ** 2)
    D = acc.distances(FeatureSubset((0,)))
    assert np.allclose(D.entries * D.normalizer, np.abs(col[:, None] - col[None, :]))


def test_accumulator_empty_subset_rejected():
    X = DataMatrix(np.ones((3, 2)))
    acc = SquaredDistanceAccumulator(X, [0, 1, 2])
    with pytest.raises(InvalidSelection):
        acc.subset_squared([])


def test_scale_invariance():
    rng = np.random.default_rng(9)
    base = rng.normal(size=(8, 5))
    D1 = distance_matrix(DataMatrix(base))
    for c in (0.25, 3.7, 1e4):
        Dc = distance_matrix(DataMatrix(c * base))
        assert np.max(np.abs(Dc.entries - D1.entries)) <= 1e-9


def test_monotone_feature_growth():
    rng = np.random.default_rng(4)
    X = DataMatrix(rng.normal(size=(6, 8)))
    acc = SquaredDistanceAccumulator(X, range(6))
    prev = np.zeros((6, 6))
    for width in range(1, 9):
        cur = acc.subset_squared(FeatureSubset(tuple(range(width))))
        assert np.all(cur >= prev - 1e-12)
        prev = cur


def test_triangle_inequality_on_raw_distances():
    rng = np.random.default_rng(21)
    X = DataMatrix(rng.normal(size=(10, 6)))
    D = distance_matrix(X)
    raw = D.entries * D.normalizer
    n = D.n
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert raw[i, j] <= raw[i, k] + raw[k, j] + 1e-9
    # uniform normalization preserves it
    for i in range(n):
        for j in range(n):
            for k in range(n):
                assert D.entries[i, j] <= D.entries[i, k] + D.entries[k, j] + 1e-9


@given(st.integers(0, 2**32 - 1))
def test_norm_ordering(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    A = distance_matrix(DataMatrix(rng.normal(size=(n, 3))))
    B = distance_matrix(DataMatrix(rng.normal(size=(n, 3))))
    linf, l2, l1 = norm_linf(A, B), norm_l2(A, B), norm_l1(A, B)
    assert linf <= l2 + 1e-12
    assert l2 <= l1 + 1e-12


def test_wide_matrix_compensated_path_agrees_with_float_sum():
    # d > 4096 exercises the chunked Kahan accumulation
    rng = np.random.default_rng(13)
    M = rng.normal(size=(5, 5000))
    X = DataMatrix(M)
    D = distance_matrix(X)
    naive = np.zeros((5, 5))
    for i in range(5):
        for j in range(5):
            naive[i, j] = float(np.sqrt(sum((M[i, f] - M[j, f]) ** 2 for f in range(5000))))
    assert np.max(np.abs(D.entries * D.normalizer - naive)) < 1e-9


def test_distance_csv_dump(tmp_path):
    D = distance_matrix(DataMatrix(np.array([[0.0], [1.0], [3.0]])))
    path = tmp_path / "d.csv"
    save_distances_csv(D, path)
    back = np.loadtxt(path, delimiter=",")
    assert np.max(np.abs(back - D.entries)) < 1e-15


def test_distance_matrix_type_invariants():
    with pytest.raises(InvalidParameter):
        DistanceMatrix(np.array([[0.0, 0.5], [0.4, 0.0]]), 1.0)  # asymmetric
    with pytest.raises(InvalidParameter):
        DistanceMatrix(np.array([[0.1, 0.5], [0.5, 0.0]]), 1.0)  # nonzero diagonal
    with pytest.raises(InvalidParameter):
        DistanceMatrix(np.array([[0.0, 0.5], [0.5, 0.0]]), 0.0)  # zero normalizer, nonzero entries


def test_normalized_output_attains_one_unless_degenerate():
    rng = np.random.default_rng(6)
    for _ in range(10):
        D = distance_matrix(DataMatrix(rng.normal(size=(7, 3))))
        assert D.entries.max() == 1.0
