#!/usr/bin/env python3
"""Bootstrap-stability experiment: how much does the selected feature set
move when the samples are resampled with replacement?

Runs on the bundled synthetic fixture by default, or on any CSV dataset.

Usage:
    python3 scripts/run_stability_experiment.py [dataset.csv [label_column]]
"""

import sys

from ivfs import IvfsConfig, load_csv, standardize
from ivfs.evaluation import bootstrap_stability
from ivfs.synthetic import circle_with_noise


def main():
    if len(sys.argv) > 1:
        label = sys.argv[2] if len(sys.argv) > 2 else None
        X, y = load_csv(sys.argv[1], label_column=label)
        X = standardize(X)
        name = sys.argv[1]
    else:
        X, _ = circle_with_noise(seed=1)
        y = None
        name = "<bundled-synthetic>"

    d0 = min(10, X.d)
    config = IvfsConfig(
        k=1000,
        d_tilde=max(1, round(0.3 * X.d)),
        n_tilde=max(2, min(round(0.1 * X.n), 100)),
        d0=d0,
        score="linf",
        seed=0,
    )
    print(f"{name}: n={X.n} d={X.d}, selecting d0={d0} "
          f"(k={config.k}, d_tilde={config.d_tilde}, n_tilde={config.n_tilde})")
    result = bootstrap_stability(X, config, repetitions=5, seed=0, labels=y)
    for i, count in enumerate(result.differing_counts):
        print(f"  repetition {i}: {count} differing features")
    print(f"mean differing over {result.repetitions} repetitions: "
          f"{result.mean_differing:.2f} of {d0}")


if __name__ == "__main__":
    main()
