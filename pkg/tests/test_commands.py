import csv

import yaml

from src import main as cli
from src.commands import RESOLVED_CONFIG, load_run_config
from src.commands.config import SimulateConfig


def _simulate(out, *extra):
    argv = ["simulate", "--setting", "3", "--n", "16", "--seed", "1", "--out-dir", str(out)]
    return cli.main(argv + list(extra))


def test_simulate_writes_field_and_sidecar(tmp_path):
    out = tmp_path / "sim"
    assert cli.main(
        ["simulate", "--setting", "3", "--n", "900", "--seed", "1", "--out-dir", str(out)]
    ) == 0
    lines = (out / "field.csv").read_text().splitlines()
    assert lines[:2] == ["# region: 0,1,0,1", "x,y,z"]
    assert len(lines) == 902
    assert (out / "field.json").exists()
    assert (out / "run.log").exists()
    assert (out / RESOLVED_CONFIG).exists()


def test_simulate_is_byte_identical(tmp_path):
    assert _simulate(tmp_path / "a") == 0
    assert _simulate(tmp_path / "b") == 0
    for name in ("field.csv", "field.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_unknown_setting_is_a_usage_error(tmp_path):
    assert cli.main(["simulate", "--setting", "9", "--out-dir", str(tmp_path)]) == 2


def test_unknown_config_key_is_a_usage_error(tmp_path):
    config = tmp_path / "sim.yaml"
    config.write_text("setting: 3\nbogus: 1\n")
    assert cli.main(["simulate", "--config", str(config), "--out-dir", str(tmp_path)]) == 2


def test_flags_override_config_file(tmp_path):
    config = tmp_path / "sim.yaml"
    config.write_text("setting: 1\nn: 25\n")
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", str(config), "--n", "16", "--out-dir", str(out)]) == 0
    resolved = yaml.safe_load((out / RESOLVED_CONFIG).read_text())
    assert (resolved["setting"], resolved["n"]) == (1, 16)


def test_resolved_config_reproduces_the_run(tmp_path):
    out = tmp_path / "sim"
    assert _simulate(out) == 0
    cfg = load_run_config(SimulateConfig, "simulate", out / RESOLVED_CONFIG)
    assert cfg == SimulateConfig(out_dir=out, setting=3, n=16, seed=1)


def test_missing_model_is_a_runtime_error(tmp_path):
    assert _simulate(tmp_path / "sim") == 0
    argv = [
        "classify",
        "--model",
        str(tmp_path / "missing.bin"),
        "--field",
        str(tmp_path / "sim" / "field.csv"),
        "--out-dir",
        str(tmp_path / "cls"),
    ]
    assert cli.main(argv) == 1


def test_fit_reports_aic_per_k(tmp_path):
    assert _simulate(tmp_path / "sim") == 0
    out = tmp_path / "fit"
    argv = [
        "fit",
        "--field",
        str(tmp_path / "sim" / "field.csv"),
        "--partition",
        "user",
        "--k",
        "1",
        "2",
        "--n-starts",
        "1",
        "--max-evals",
        "20",
        "--out-dir",
        str(out),
    ]
    assert cli.main(argv) == 0
    with open(out / "aic.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert [r["K"] for r in rows] == ["1", "2"]
    assert [r["n_params"] for r in rows] == ["3", "6"]
    assert sum(r["best"] == "*" for r in rows) == 1
    for k in (1, 2):
        assert (out / f"fit_k{k}.json").exists()
        assert (out / f"partition_k{k}.csv").exists()
        assert (out / "heatmaps" / f"k{k}_nu.csv").exists()


def test_convnet_fit_without_model_is_a_usage_error(tmp_path):
    assert _simulate(tmp_path / "sim") == 0
    argv = [
        "fit",
        "--field",
        str(tmp_path / "sim" / "field.csv"),
        "--partition",
        "convnet",
        "--out-dir",
        str(tmp_path / "fit"),
    ]
    assert cli.main(argv) == 2


def test_corpus_train_classify_pipeline(tmp_path):
    corpus = tmp_path / "corpus"
    argv = ["corpus", "--n-stationary", "2", "--n-nonstationary", "2", "--n", "16"]
    assert cli.main(argv + ["--out-dir", str(corpus)]) == 0
    assert (corpus / "manifest.yaml").exists()

    trained = tmp_path / "train"
    argv = ["train", "--corpus", str(corpus), "--g", "5", "--epochs", "1", "--batch-size", "2"]
    assert cli.main(argv + ["--out-dir", str(trained)]) == 0
    resolved = yaml.safe_load((trained / RESOLVED_CONFIG).read_text())
    assert resolved["train"]["epochs"] == 1
    report = yaml.safe_load((trained / "train_report.yaml").read_text())
    assert report["n_train"] == 4
    assert len(report["loss_history"]) == 1

    field = corpus / "stationary" / "00000.csv"
    out = tmp_path / "cls"
    argv = ["classify", "--model", str(trained / "model.bin"), "--field", str(field)]
    assert cli.main(argv + ["--out-dir", str(out)]) == 0
    result = yaml.safe_load((out / "classify.yaml").read_text())
    assert 0.0 <= result["index"] <= 1.0
    assert result["label"] == ("nonstationary" if result["index"] >= 0.5 else "stationary")

    out = tmp_path / "part"
    argv = ["partition", "--field", str(field), "--model", str(trained / "model.bin")]
    assert cli.main(argv + ["--k", "2", "--iters", "3", "--out-dir", str(out)]) == 0
    assert (out / "partition.csv").exists()
    assert (out / "partition.json").exists()


def test_experiment_needs_a_name(tmp_path):
    assert cli.main(["experiment", "--out-dir", str(tmp_path)]) == 2
