import json

import pytest

from ivfs import write_csv
from ivfs.cli import main
from ivfs.synthetic import gaussian_blobs


@pytest.fixture(scope="module")
def dataset_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "blobs.csv"
    X, y = gaussian_blobs(n=40, d=8, classes=2, separation=8.0, seed=6)
    write_csv(X, path, labels=y)
    return path


def run_cli(*argv):
    return main([str(a) for a in argv])


def read_json(path):
    return json.loads(path.read_text())


def test_select_is_deterministic(dataset_csv, tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        code = run_cli(
            "select", "--input", dataset_csv, "--d0", "3", "--k", "50",
            "--score", "linf", "--seed", "7", "--output-dir", out,
        )
        assert code == 0
    assert (out1 / "ranking.txt").read_text() == (out2 / "ranking.txt").read_text()
    manifest = read_json(out1 / "manifest.json")
    assert manifest["command"] == "select"
    assert manifest["seed"] == 7
    assert manifest["tool_version"]
    assert [str(out1 / "ranking.txt")] == manifest["outputs"]


def test_select_usage_error_on_zero_dtilde(dataset_csv, tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli(
            "select", "--input", dataset_csv, "--d0", "3", "--dtilde", "0",
            "--output-dir", tmp_path,
        )
    assert err.value.code == 2


def test_select_requires_input():
    with pytest.raises(SystemExit) as err:
        run_cli("select", "--d0", "3")
    assert err.value.code == 2


def test_select_knn_score_without_labels_is_data_error(dataset_csv, tmp_path, capsys):
    code = run_cli(
        "select", "--input", dataset_csv, "--d0", "3", "--k", "20",
        "--score", "knn_error", "--output-dir", tmp_path,
    )
    assert code == 1
    assert "labels" in capsys.readouterr().err


def test_select_with_labels_and_knn_score(dataset_csv, tmp_path):
    code = run_cli(
        "select", "--input", dataset_csv, "--label-column", "label",
        "--d0", "3", "--k", "20", "--score", "knn_error", "--output-dir", tmp_path,
    )
    assert code == 0


def test_evaluate_full_feature_ranking_zeroes_metrics(dataset_csv, tmp_path):
    ranking = tmp_path / "all.txt"
    ranking.write_text("".join(f"{f}\n" for f in range(8)))
    out = tmp_path / "out"
    code = run_cli(
        "evaluate", ranking, "--input", dataset_csv, "--label-column", "label",
        "--output-dir", out, "--seed", "3",
    )
    assert code == 0
    report = read_json(out / "report.json")
    assert report["source"] == "ivfs"
    for key in ("w11", "w_inf", "l1_norm", "l2_norm", "linf_norm"):
        assert report[key] == 0.0
    assert report["knn_accuracy"] == 1.0
    # identical data -> identical diagram dumps
    assert (out / "diagram_full.txt").read_text() == (
        out / "diagram_selected.txt"
    ).read_text()
    manifest = read_json(out / "manifest.json")
    assert len(manifest["outputs"]) == 3


def test_evaluate_repeat_run_identical_modulo_timing(dataset_csv, tmp_path):
    ranking = tmp_path / "r.txt"
    ranking.write_text("0\n3\n5\n")
    outs = []
    for name in ("x", "y"):
        out = tmp_path / name
        assert run_cli(
            "evaluate", ranking, "--input", dataset_csv, "--output-dir", out,
            "--seed", "11",
        ) == 0
        outs.append(read_json(out / "report.json"))
    for rep in outs:
        rep.pop("wall_time_seconds")
    assert outs[0] == outs[1]


def test_evaluate_external_ranking_tagged(dataset_csv, tmp_path):
    ranking = tmp_path / "ext.txt"
    ranking.write_text("1\n2\n4\n")
    out = tmp_path / "out"
    code = run_cli(
        "evaluate", "--external-ranking", ranking, "--input", dataset_csv,
        "--output-dir", out,
    )
    assert code == 0
    assert read_json(out / "report.json")["source"] == "external"


def test_evaluate_feature_count_mismatch(dataset_csv, tmp_path, capsys):
    ranking = tmp_path / "bad.txt"
    ranking.write_text("0\n99\n")
    code = run_cli("evaluate", ranking, "--input", dataset_csv, "--output-dir", tmp_path)
    assert code == 1
    ranking.write_text("0\n1\n")
    code = run_cli(
        "evaluate", ranking, "--input", dataset_csv, "--d0", "5",
        "--output-dir", tmp_path,
    )
    assert code == 1


def test_evaluate_requires_some_ranking(dataset_csv):
    with pytest.raises(SystemExit) as err:
        run_cli("evaluate", "--input", dataset_csv)
    assert err.value.code == 2


def test_benchmark_smoke_on_bundled_fixture(tmp_path):
    out = tmp_path / "bench"
    code = run_cli(
        "benchmark", "--k", "30,60", "--d0", "10", "--ntilde", "0.1",
        "--seed", "2", "--output-dir", out,
    )
    assert code == 0
    lines = (out / "grid.csv").read_text().splitlines()
    assert len(lines) == 3  # header + one row per grid cell
    header = lines[0].split(",")
    assert header[:6] == ["k", "d_tilde", "n_tilde", "d0", "score", "repeats"]
    best = read_json(out / "grid_best.json")
    assert "linf_norm" in best


def test_benchmark_repeat_adds_per_repetition_columns(dataset_csv, tmp_path):
    out = tmp_path / "bench"
    code = run_cli(
        "benchmark", "--input", dataset_csv, "--k", "25", "--d0", "4",
        "--repeat", "2", "--seed", "5", "--output-dir", out,
    )
    assert code == 0
    header = (out / "grid.csv").read_text().splitlines()[0].split(",")
    assert "linf_norm_r0" in header and "linf_norm_r1" in header


def test_benchmark_empty_grid_is_usage_error(dataset_csv, tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli(
            "benchmark", "--input", dataset_csv, "--k", ",", "--output-dir", tmp_path
        )
    assert err.value.code == 2


def test_stability_subcommand_emits_differing_counts(tmp_path):
    out = tmp_path / "stab"
    code = run_cli(
        "stability", "--k", "40", "--d0", "10", "--repeat", "3",
        "--seed", "4", "--output-dir", out,
    )
    assert code == 0
    lines = (out / "stability.csv").read_text().splitlines()
    assert lines[0] == "repetition,differing_count"
    assert len(lines) == 5  # header, three repetitions, mean row
    assert lines[-1].startswith("mean,")


def test_config_file_supplies_flags_and_cli_overrides(dataset_csv, tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("k = 40\nd0 = 3\nseed = 9\n# comment\nscore = linf\n")
    out = tmp_path / "out"
    code = run_cli(
        "select", "--config", config, "--input", dataset_csv, "--k", "10",
        "--output-dir", out,
    )
    assert code == 0
    manifest = read_json(out / "manifest.json")
    assert manifest["config"]["k"] == 10  # CLI wins
    assert manifest["config"]["d0"] == 3  # file fills the rest
    assert manifest["seed"] == 9


def test_config_file_unknown_key_rejected(dataset_csv, tmp_path):
    config = tmp_path / "bad.conf"
    config.write_text("nonsense = 1\n")
    with pytest.raises(SystemExit) as err:
        run_cli("select", "--config", config, "--input", dataset_csv)
    assert err.value.code == 2


def test_ntilde_cap_applies(dataset_csv, tmp_path):
    out = tmp_path / "capped"
    code = run_cli(
        "select", "--input", dataset_csv, "--d0", "3", "--k", "10",
        "--ntilde", "0.9", "--ntilde-cap", "5", "--output-dir", out,
    )
    assert code == 0
    assert read_json(out / "manifest.json")["config"]["n_tilde"] == 5


def test_missing_input_file_is_data_error(tmp_path, capsys):
    code = run_cli(
        "select", "--input", tmp_path / "nope.csv", "--d0", "2",
        "--output-dir", tmp_path,
    )
    assert code == 1
