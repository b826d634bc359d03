"""End-to-end command-line pipeline checks on tiny datasets."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from pqdvqc.cli import main
from pqdvqc.stransform import read_features

RUNNER = CliRunner()


def _run(*args):
    result = RUNNER.invoke(main, list(args), catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result.output


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    """generate -> features -> train -> eval on a small binary problem."""
    root = tmp_path_factory.mktemp("cli")
    data = root / "data"
    _run("generate", "--experiment", "detect2", "--per-class", "30",
         "--seed", "3", "--out", str(data))
    _run("features", "--dataset", str(data / "dataset.csv"),
         "--out", str(data))
    run = root / "run"
    out = _run("train", "--features", str(data / "features.csv"),
               "--experiment", "detect2", "--seed", "3", "--epochs", "4",
               "--out", str(run))
    ev = root / "eval"
    _run("eval", "--checkpoint", str(run / "checkpoint.json"),
         "--features", str(data / "features.csv"), "--out", str(ev))
    return data, run, ev, out


def test_generate_files(tiny_run):
    data, _, _, _ = tiny_run
    assert (data / "dataset.csv").exists()
    sidecar = json.loads((data / "dataset.json").read_text())
    assert sidecar["n_waveforms"] == 60
    header = (data / "dataset.csv").open().readline()
    assert header.startswith("label,param_json,s0,")


def test_features_file(tiny_run):
    data, _, _, _ = tiny_run
    x, y = read_features(data / "features.csv")
    assert x.shape == (60, 9)
    assert sorted(set(y.tolist())) == [0, 1]
    assert np.all(np.isfinite(x))


def test_train_artifacts(tiny_run):
    _, run, _, out = tiny_run
    assert "parameters: 42" in out
    assert "best test accuracy" in out
    for name in ("checkpoint.json", "report.jsonl", "curves.csv", "curves.png"):
        assert (run / name).exists(), name
    lines = (run / "report.jsonl").read_text().strip().splitlines()
    assert len(lines) == 4
    rec = json.loads(lines[-1])
    assert {"epoch", "train_loss", "train_acc", "test_acc"} <= set(rec)
    curves = (run / "curves.csv").read_text().splitlines()
    assert curves[0] == "epoch,train_loss,train_acc,test_acc"
    assert len(curves) == 5
    # figures render alongside the delimited output
    assert (run / "curves.png").stat().st_size > 1000


def test_eval_artifacts(tiny_run):
    _, _, ev, _ = tiny_run
    report = json.loads((ev / "eval.json").read_text())
    assert 0.0 <= report["accuracy"] <= 1.0
    assert np.array(report["confusion"]).shape == (2, 2)
    assert report["n_params"] == 42
    confusion = (ev / "confusion.csv").read_text().splitlines()
    assert len(confusion) == 3
    assert (ev / "confusion.png").stat().st_size > 1000


def test_checkpoint_reload_matches(tiny_run):
    data, run, ev, _ = tiny_run
    # a second eval of the same checkpoint is byte-identical
    out2 = RUNNER.invoke(main, ["eval", "--checkpoint", str(run / "checkpoint.json"),
                                "--features", str(data / "features.csv"),
                                "--out", str(ev.parent / "eval2")],
                         catch_exceptions=False)
    assert out2.exit_code == 0
    a = json.loads((ev / "eval.json").read_text())
    b = json.loads((ev.parent / "eval2" / "eval.json").read_text())
    assert a == b


def test_eval_rejects_dimension_mismatch(tiny_run, tmp_path):
    _, run, _, _ = tiny_run
    bad = tmp_path / "bad.csv"
    bad.write_text("label,f1,f2,f3,f4,f5,f6,f7,f8,f9\n" +
                   "0," + ",".join(["0.0"] * 9) + "\n")
    result = RUNNER.invoke(main, ["eval", "--checkpoint",
                                  str(run / "checkpoint.json"),
                                  "--features", str(bad), "--out",
                                  str(tmp_path / "out")])
    assert result.exit_code == 0  # 9 features matches; now break the checkpoint
    ckpt = json.loads((run / "checkpoint.json").read_text())
    ckpt["config"]["n_data"] = 5
    ckpt["theta"] = ckpt["theta"][:ckpt["config"]["n_layers"]
                                  * (3 * 7 + 5)]
    bad_ckpt = tmp_path / "ckpt.json"
    bad_ckpt.write_text(json.dumps(ckpt))
    result = RUNNER.invoke(main, ["eval", "--checkpoint", str(bad_ckpt),
                                  "--features", str(bad), "--out",
                                  str(tmp_path / "out2")])
    assert result.exit_code != 0


def test_generate_with_noise(tmp_path):
    _run("generate", "--experiment", "single7", "--per-class", "2",
         "--seed", "1", "--snr", "30", "--out", str(tmp_path))
    clean = tmp_path / "dataset.csv"
    assert clean.exists()
    sidecar = json.loads((tmp_path / "dataset.json").read_text())
    assert sidecar["n_waveforms"] == 14


def test_paper_rate_extraction(tmp_path):
    _run("generate", "--experiment", "detect2", "--per-class", "3",
         "--seed", "2", "--paper-rate", "--out", str(tmp_path))
    sidecar = json.loads((tmp_path / "dataset.json").read_text())
    assert sidecar["sample_rate_hz"] == 1280.0
    # the reduced rate requires explicit truncation of high harmonics
    result = RUNNER.invoke(main, ["features", "--dataset",
                                  str(tmp_path / "dataset.csv"),
                                  "--out", str(tmp_path)])
    assert result.exit_code != 0
    _run("features", "--dataset", str(tmp_path / "dataset.csv"),
         "--paper-rate", "--out", str(tmp_path))
    x, _ = read_features(tmp_path / "features.csv")
    assert np.all(np.isfinite(x))


def test_sweep_files(tmp_path):
    out = _run("sweep", "--per-class", "6", "--seed", "4", "--epochs", "2",
               "--out", str(tmp_path))
    for name in ("clean", "40dB", "30dB", "20dB"):
        assert (tmp_path / f"features_{name}.csv").exists()
        assert (tmp_path / f"eval_{name}.json").exists()
    table = (tmp_path / "sweep.csv").read_text().strip().splitlines()
    assert table[0] == "level,accuracy"
    assert len(table) == 5
    assert (tmp_path / "sweep.png").stat().st_size > 1000
    assert "clean: accuracy" in out
