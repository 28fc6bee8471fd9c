#!/usr/bin/env python3
"""Sweep subset count and sub-sampling rate on the bundled synthetic fixture.

Produces a plot-ready CSV showing how distance/topology preservation improves
as the number of random subsets (k) and the row sample size grow, plus a
best-per-metric summary.

Usage:
    python3 scripts/run_synthetic_benchmark.py [output_dir]
"""

import json
import sys
import time
from pathlib import Path

from ivfs.evaluation import best_per_metric, run_grid
from ivfs.synthetic import circle_with_noise


def main():
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("results")
    out_dir.mkdir(parents=True, exist_ok=True)

    X, signal = circle_with_noise(n=150, d=100, signal_count=10, seed=1)
    grid = {
        "k": [250, 500, 1000, 2000],
        "n_tilde": [15, 45, 75],
        "d_tilde": [30],
        "d0": [10],
        "score": ["linf"],
    }
    print(f"grid: {sum(len(v) for v in grid.values())} axis values, "
          f"{len(grid['k']) * len(grid['n_tilde'])} cells")
    start = time.perf_counter()
    cells = run_grid(X, grid, seed=0, repeats=3)
    print(f"done in {time.perf_counter() - start:.1f}s")

    csv_path = out_dir / "synthetic_tradeoff.csv"
    lines = ["k,n_tilde,signal_recovered,mean_w11,mean_w_inf,mean_l2,mean_linf,mean_wall_time_s"]
    for cell in cells:
        mean = cell.mean_report()
        from ivfs import IvfsConfig, run_ivfs

        cfg = IvfsConfig(
            k=cell.config.k, d_tilde=cell.config.d_tilde,
            n_tilde=cell.config.n_tilde, d0=cell.config.d0, seed=0,
        )
        hit = len(set(run_ivfs(X, cfg).selected) & set(signal))
        lines.append(
            f"{cell.config.k},{cell.config.n_tilde},{hit},"
            f"{mean.w11:.6g},{mean.w_inf:.6g},{mean.l2_norm:.6g},"
            f"{mean.linf_norm:.6g},{mean.wall_time_seconds:.4g}"
        )
    csv_path.write_text("\n".join(lines) + "\n")
    (out_dir / "synthetic_best.json").write_text(
        json.dumps(best_per_metric(cells), indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote {csv_path}")


if __name__ == "__main__":
    main()
