"""Command-line driver: select, evaluate, benchmark, stability.

Every command writes its outputs plus a ``manifest.json`` into the output
directory.  A config file of ``key = value`` lines can supply any flag;
command-line values win.  Exit codes: 0 success, 1 data/runtime error,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .dataset import load_csv, standardize
from .engine import IvfsConfig, read_ranking, run_ivfs, write_ranking
from .errors import InvalidParameter, IvfsError
from .evaluation import (
    GRID_KEYS,
    best_per_metric,
    bootstrap_stability,
    evaluate_subset,
    run_grid,
)
from .persistence import write_diagram
from .synthetic import circle_with_noise

_DEFAULTS = {
    "d0": None,
    "dtilde": None,
    "ntilde": None,
    "ntilde_cap": None,
    "k": 1000,
    "score": "linf",
    "seed": 0,
    "threads": 1,
    "output_dir": ".",
    "alpha_max": 0.5,
    "epsilon": 0.1,
    "repeat": 1,
    "label_column": None,
    "input": None,
    "external_ranking": None,
}


def _add_common_flags(sub):
    sub.add_argument("--config", help="key = value file supplying any flag")
    sub.add_argument("--input", help="input CSV dataset")
    sub.add_argument("--label-column", dest="label_column")
    sub.add_argument("--d0", help="number of features to select")
    sub.add_argument("--dtilde", help="features per subset (int, or ratio in (0,1))")
    sub.add_argument("--ntilde", help="rows per subset (int, or ratio in (0,1))")
    sub.add_argument("--ntilde-cap", dest="ntilde_cap", help="upper bound on ntilde")
    sub.add_argument("--k", help="number of random subsets")
    sub.add_argument("--score", help="linf | l1 | l2 | knn_error")
    sub.add_argument("--seed")
    sub.add_argument("--threads")
    sub.add_argument("--output-dir", dest="output_dir")
    sub.add_argument("--alpha-max", dest="alpha_max")
    sub.add_argument("--epsilon")
    sub.add_argument("--repeat")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ivfs",
        description="Random-subset feature selection with distance- and topology-preservation scoring",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_select = subs.add_parser("select", help="rank features and write the top d0")
    _add_common_flags(p_select)
    p_select.set_defaults(func=cmd_select)

    p_eval = subs.add_parser("evaluate", help="score a ranking against a dataset")
    _add_common_flags(p_eval)
    p_eval.add_argument("ranking", nargs="?", help="ranking file from select")
    p_eval.add_argument(
        "--external-ranking",
        dest="external_ranking",
        help="ranking file produced by another tool",
    )
    p_eval.set_defaults(func=cmd_evaluate)

    p_bench = subs.add_parser(
        "benchmark", help="evaluate a parameter grid, write plot-ready CSV"
    )
    _add_common_flags(p_bench)
    p_bench.set_defaults(func=cmd_benchmark)

    p_stab = subs.add_parser(
        "stability", help="bootstrap-stability of the selected feature set"
    )
    _add_common_flags(p_stab)
    p_stab.set_defaults(func=cmd_stability)
    return parser


def _read_config_file(path, parser):
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        parser.error(f"cannot read config file: {exc}")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            parser.error(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _DEFAULTS:
            parser.error(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def _merge_options(args, parser) -> dict:
    options = dict(_DEFAULTS)
    if getattr(args, "config", None):
        options.update(_read_config_file(args.config, parser))
    for key in _DEFAULTS:
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            options[key] = cli_value
    return options


def _parse_int(options, key, parser, minimum=None):
    value = options[key]
    if value is None:
        return None
    try:
        out = int(str(value))
    except ValueError:
        parser.error(f"--{key.replace('_', '-')} expects an integer, got {value!r}")
    if minimum is not None and out < minimum:
        parser.error(f"--{key.replace('_', '-')} must be >= {minimum}, got {out}")
    return out


def _parse_float(options, key, parser):
    value = options[key]
    try:
        return float(str(value))
    except ValueError:
        parser.error(f"--{key.replace('_', '-')} expects a number, got {value!r}")


def _parse_size(value, total, key, parser, minimum=1):
    """An absolute count, or a ratio in (0,1) of ``total``."""
    if value is None:
        return None
    try:
        x = float(str(value))
    except ValueError:
        parser.error(f"--{key} expects a number, got {value!r}")
    if 0 < x < 1:
        return max(minimum, math.ceil(x * total))
    if x != int(x) or x < minimum:
        parser.error(f"--{key} must be an integer >= {minimum} or a ratio in (0,1)")
    return int(x)


def _parse_list(value, caster):
    return [caster(part.strip()) for part in str(value).split(",") if part.strip()]


def _load_dataset(options, parser):
    if options["input"] is None:
        matrix, _ = circle_with_noise()
        return standardize(matrix), None, "<bundled-synthetic>"
    matrix, labels = load_csv(options["input"], options["label_column"])
    return standardize(matrix), labels, options["input"]


def _resolve_config(options, X, parser) -> IvfsConfig:
    d0 = _parse_int(options, "d0", parser, minimum=1)
    if d0 is None:
        d0 = min(300, X.d)
    d_tilde = _parse_size(options["dtilde"], X.d, "dtilde", parser)
    if d_tilde is None:
        d_tilde = max(1, math.ceil(0.3 * X.d))
    n_tilde = _parse_size(options["ntilde"], X.n, "ntilde", parser, minimum=2)
    if n_tilde is None:
        n_tilde = max(2, math.ceil(0.1 * X.n))
    cap = _parse_int(options, "ntilde_cap", parser, minimum=2)
    if cap is not None:
        n_tilde = min(n_tilde, cap)
    score = str(options["score"])
    if score not in ("linf", "l1", "l2", "knn_error"):
        parser.error(f"--score must be linf, l1, l2 or knn_error, got {score!r}")
    return IvfsConfig(
        k=_parse_int(options, "k", parser, minimum=1),
        d_tilde=d_tilde,
        n_tilde=n_tilde,
        d0=d0,
        score=score,
        seed=_parse_int(options, "seed", parser, minimum=0),
    )


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _config_echo(config: IvfsConfig) -> dict:
    return {
        "k": config.k,
        "d_tilde": config.d_tilde,
        "n_tilde": config.n_tilde,
        "d0": config.d0,
        "score": config.score if isinstance(config.score, str) else "custom",
        "seed": config.seed,
    }


def _write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _write_manifest(out_dir, command, config_echo, input_path, outputs, seed, started):
    manifest = {
        "command": command,
        "config": config_echo,
        "input_path": str(input_path),
        "outputs": [str(p) for p in outputs],
        "seed": seed,
        "tool_version": __version__,
        "started": started,
        "finished": _utc_now(),
    }
    path = out_dir / "manifest.json"
    _write_json(path, manifest)
    return path


def cmd_select(args, parser) -> int:
    started = _utc_now()
    options = _merge_options(args, parser)
    if options["input"] is None:
        parser.error("select requires --input")
    X, labels, input_path = _load_dataset(options, parser)
    config = _resolve_config(options, X, parser)
    threads = _parse_int(options, "threads", parser, minimum=1)
    out_dir = Path(options["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    start = time.perf_counter()
    ranking = run_ivfs(X, config, labels, threads=threads)
    elapsed = time.perf_counter() - start

    ranking_path = out_dir / "ranking.txt"
    write_ranking(ranking, ranking_path)
    echo = _config_echo(config)
    echo["wall_time_seconds"] = elapsed
    _write_manifest(out_dir, "select", echo, input_path, [ranking_path], config.seed, started)
    print(f"selected {config.d0} of {X.d} features -> {ranking_path}")
    return 0


def _selected_from_ranking(path, X, d0, parser):
    order = read_ranking(path)
    bad = [f for f in order if f < 0 or f >= X.d]
    if bad:
        raise InvalidParameter(
            f"ranking refers to feature {bad[0]} but the dataset has d={X.d}"
        )
    take = d0 if d0 is not None else len(order)
    if take > len(order):
        raise InvalidParameter(
            f"ranking lists {len(order)} features, cannot take d0={take}"
        )
    return order[:take]


def cmd_evaluate(args, parser) -> int:
    started = _utc_now()
    options = _merge_options(args, parser)
    if options["input"] is None:
        parser.error("evaluate requires --input")
    ranking_path = args.ranking or options["external_ranking"]
    if ranking_path is None:
        parser.error("evaluate requires a ranking file or --external-ranking")
    if args.ranking and options["external_ranking"]:
        parser.error("give either a positional ranking or --external-ranking, not both")
    source = "external" if options["external_ranking"] else "ivfs"

    X, labels, input_path = _load_dataset(options, parser)
    d0 = _parse_int(options, "d0", parser, minimum=1)
    seed = _parse_int(options, "seed", parser, minimum=0)
    selected = _selected_from_ranking(ranking_path, X, d0, parser)
    report, dgm_full, dgm_selected = evaluate_subset(
        X,
        selected,
        y=labels,
        seed=seed,
        alpha_max=_parse_float(options, "alpha_max", parser),
        epsilon=_parse_float(options, "epsilon", parser),
        return_diagrams=True,
    )
    out_dir = Path(options["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "source": source,
        "ranking_file": str(ranking_path),
        "seed": seed,
        "selected_features": [int(f) for f in selected],
        **report.to_dict(),
    }
    report_path = out_dir / "report.json"
    _write_json(report_path, payload)
    full_dgm_path = out_dir / "diagram_full.txt"
    selected_dgm_path = out_dir / "diagram_selected.txt"
    write_diagram(dgm_full, full_dgm_path)
    write_diagram(dgm_selected, selected_dgm_path)
    _write_manifest(
        out_dir, "evaluate", {"d0": len(selected), "seed": seed}, input_path,
        [report_path, full_dgm_path, selected_dgm_path], seed, started,
    )
    print(f"report -> {report_path}")
    return 0


_GRID_METRICS = (
    "knn_accuracy",
    "w11",
    "w_inf",
    "l1_norm",
    "l1_per_n2_x100",
    "l2_norm",
    "linf_norm",
)


def _grid_from_options(options, X, parser) -> dict:
    grid = {}
    pairs = [
        ("k", options["k"], lambda v: _parse_list(v, int)),
        ("d_tilde", options["dtilde"], None),
        ("n_tilde", options["ntilde"], None),
        ("d0", options["d0"], lambda v: _parse_list(v, int)),
        ("score", options["score"], lambda v: _parse_list(v, str)),
    ]
    for key, raw, caster in pairs:
        if raw is None:
            continue
        if caster is not None:
            try:
                grid[key] = caster(raw)
            except ValueError:
                parser.error(f"bad list for {key}: {raw!r}")
        else:
            total = X.d if key == "d_tilde" else X.n
            minimum = 1 if key == "d_tilde" else 2
            grid[key] = [
                _parse_size(part, total, key, parser, minimum=minimum)
                for part in str(raw).split(",")
                if part.strip()
            ]
        if not grid[key]:
            parser.error(f"empty grid axis {key}")
    # fill unspecified axes with single defaults
    defaults = {
        "k": [1000],
        "d_tilde": [max(1, math.ceil(0.3 * X.d))],
        "n_tilde": [max(2, math.ceil(0.1 * X.n))],
        "d0": [min(300, X.d)],
        "score": ["linf"],
    }
    cap = _parse_int(options, "ntilde_cap", parser, minimum=2)
    for key, fallback in defaults.items():
        grid.setdefault(key, fallback)
    if cap is not None:
        grid["n_tilde"] = [min(v, cap) for v in grid["n_tilde"]]
    return grid


def cmd_benchmark(args, parser) -> int:
    started = _utc_now()
    options = _merge_options(args, parser)
    X, labels, input_path = _load_dataset(options, parser)
    grid = _grid_from_options(options, X, parser)
    repeats = _parse_int(options, "repeat", parser, minimum=1)
    seed = _parse_int(options, "seed", parser, minimum=0)
    threads = _parse_int(options, "threads", parser, minimum=1)

    cells = run_grid(
        X,
        grid,
        y=labels,
        seed=seed,
        repeats=repeats,
        threads=threads,
        alpha_max=_parse_float(options, "alpha_max", parser),
        epsilon=_parse_float(options, "epsilon", parser),
    )
    out_dir = Path(options["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "grid.csv"
    header = list(GRID_KEYS) + ["repeats"]
    header += [f"mean_{m}" for m in _GRID_METRICS] + ["mean_wall_time_seconds"]
    for r in range(repeats):
        header += [f"{m}_r{r}" for m in _GRID_METRICS]
    lines = [",".join(header)]
    for cell in cells:
        mean = cell.mean_report()
        row = [
            str(cell.config.k),
            str(cell.config.d_tilde),
            str(cell.config.n_tilde),
            str(cell.config.d0),
            str(cell.config.score),
            str(repeats),
        ]
        row += [_fmt(getattr(mean, m)) for m in _GRID_METRICS]
        row.append(_fmt(mean.wall_time_seconds))
        for rep in cell.reports:
            row += [_fmt(getattr(rep, m)) for m in _GRID_METRICS]
        lines.append(",".join(row))
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    summary_path = out_dir / "grid_best.json"
    _write_json(summary_path, best_per_metric(cells))
    _write_manifest(
        out_dir, "benchmark", {"grid": {k: list(map(str, v)) for k, v in grid.items()}},
        input_path, [csv_path, summary_path], seed, started,
    )
    print(f"{len(cells)} grid cells -> {csv_path}")
    return 0


def _fmt(value) -> str:
    if value is None:
        return ""
    return f"{value:.17g}"


def cmd_stability(args, parser) -> int:
    started = _utc_now()
    options = _merge_options(args, parser)
    X, labels, input_path = _load_dataset(options, parser)
    config = _resolve_config(options, X, parser)
    repetitions = _parse_int(options, "repeat", parser, minimum=1)
    threads = _parse_int(options, "threads", parser, minimum=1)
    seed = _parse_int(options, "seed", parser, minimum=0)

    result = bootstrap_stability(
        X, config, repetitions, seed, labels=labels, threads=threads
    )
    out_dir = Path(options["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "stability.csv"
    lines = ["repetition,differing_count"]
    lines += [f"{i},{c}" for i, c in enumerate(result.differing_counts)]
    lines.append(f"mean,{result.mean_differing:.17g}")
    csv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    echo = _config_echo(config)
    echo["repetitions"] = repetitions
    _write_manifest(out_dir, "stability", echo, input_path, [csv_path], seed, started)
    print(
        f"mean differing features over {repetitions} repetitions: "
        f"{result.mean_differing:.3g} -> {csv_path}"
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except IvfsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
