"""Bundled synthetic datasets for experiments and smoke runs."""

from __future__ import annotations

import numpy as np

from .dataset import DataMatrix, LabelVector


def circle_with_noise(
    n: int = 150,
    d: int = 100,
    signal_count: int = 10,
    noise_scale: float = 0.02,
    jitter: float = 0.05,
    seed: int = 0,
):
    """Informative-vs-noise fixture: a planar loop spread over a few features.

    Samples sit on a unit circle; each signal feature is a random linear view
    of the two circle coordinates (plus jitter), so the loop and the pairwise
    distances are carried entirely by the signal block.  The remaining
    features are low-amplitude white noise.  Signal positions are shuffled
    among the columns.

    Returns (DataMatrix, tuple of signal feature indices).
    """
    if signal_count >= d:
        raise ValueError("signal_count must be smaller than d")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    ring = np.column_stack([np.cos(theta), np.sin(theta)])
    basis = rng.normal(size=(2, signal_count))
    basis /= np.linalg.norm(basis, axis=0, keepdims=True)
    signal = ring @ basis + jitter * rng.normal(size=(n, signal_count))
    noise = noise_scale * rng.normal(size=(n, d - signal_count))
    columns = rng.permutation(d)
    signal_positions = np.sort(columns[:signal_count])
    values = np.empty((n, d))
    values[:, columns[:signal_count]] = signal
    values[:, columns[signal_count:]] = noise
    matrix = DataMatrix(values, feature_names=tuple(f"f{i}" for i in range(d)))
    return matrix, tuple(int(i) for i in signal_positions)


def gaussian_blobs(
    n: int = 100,
    d: int = 5,
    classes: int = 2,
    separation: float = 6.0,
    seed: int = 0,
):
    """Well-separated spherical Gaussian classes; returns (DataMatrix, LabelVector)."""
    rng = np.random.default_rng(seed)
    centers = separation * rng.normal(size=(classes, d))
    labels = np.arange(n) % classes
    values = centers[labels] + rng.normal(size=(n, d))
    perm = rng.permutation(n)
    return (
        DataMatrix(values[perm]),
        LabelVector(labels[perm], class_count=classes),
    )
