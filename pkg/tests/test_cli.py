import csv
import json

import numpy as np
import pytest

from gblstsvm.cli import main, parse_args, read_config, resolve_dataset
from gblstsvm.dataset import load_csv


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.mark.filterwarnings("ignore::gblstsvm.models.ConvergenceWarning")
def test_gen_data_train_predict(tmp_path, capsys):
    data = tmp_path / "cp.csv"
    assert main(["gen-data", "--kind", "crossplane", "--n", "80", "--seed", "1", "--out", str(data)]) == 0
    d = load_csv(data)
    assert (d.m, d.n_features) == (80, 2)

    model = tmp_path / "m.json"
    rc = main(["train", "--data", str(data), "--variant", "lsgblstsvm", "--grid", "none",
               "--c1", "1e-3", "--c3", "1e-3", "--out", str(model)])
    assert rc == 0
    saved = json.loads(model.read_text())
    assert saved["variant"] == "lsgblstsvm" and saved["hyperparams"]["c2"] == 1e-3

    preds = tmp_path / "p.csv"
    assert main(["predict", "--model", str(model), "--data", str(data), "--out", str(preds)]) == 0
    lines = preds.read_text().split()
    assert lines[0] == "label" and len(lines) == 81
    acc = float(np.mean(np.array(lines[1:], dtype=int) == d.labels))
    assert acc >= 0.9
    assert "accuracy" in capsys.readouterr().err


def test_train_with_grid(tmp_path):
    data = tmp_path / "n.csv"
    main(["gen-data", "--kind", "ndc", "--n", "150", "--dim", "3", "--separation", "6", "--out", str(data)])
    assert main(["train", "--data", str(data), "--folds", "3", "--out", str(tmp_path / "m.json")]) == 0


def test_stats_on_fixture(tmp_path, fixtures_dir):
    out = tmp_path / "s"
    assert main(["stats", "--data", str(fixtures_dir / "linear_accuracy_0pct.csv"), "--out", str(out)]) == 0
    rec = json.loads((out / "stats.json").read_text())
    assert rec["M"] == 34 and rec["l"] == 6
    assert rec["win_threshold"] == pytest.approx(22.71, abs=0.005)
    pair = next(p for p in rec["pairs"] if p["a"] == "SVM" and p["b"] == "GBLSTSVM")
    assert (pair["r_plus"], pair["r_minus"]) == (0.0, 465.0)
    assert rec["friedman"]["reject"]
    assert "friedman" in (out / "stats.txt").read_text()


def test_stats_single_model_fails(tmp_path):
    t = tmp_path / "t.csv"
    t.write_text("dataset,a\nx,0.5\ny,0.7\n")
    assert main(["stats", "--data", str(t), "--out", str(tmp_path / "s")]) == 1
    assert "error" in json.loads((tmp_path / "s" / "stats.json").read_text())["friedman"]


def test_stats_identical_columns(tmp_path):
    t = tmp_path / "t.csv"
    t.write_text("dataset,a,b\nx,0.5,0.5\ny,0.7,0.7\nz,0.9,0.9\n")
    assert main(["stats", "--data", str(t), "--out", str(tmp_path / "s")]) == 0
    rec = json.loads((tmp_path / "s" / "stats.json").read_text())
    assert rec["pairs"][0]["p"] == 1.0
    assert rec["friedman"]["chi2"] == 0.0


def test_stats_missing_file(tmp_path):
    assert main(["stats", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path)]) == 1


BENCH = ["benchmark", "--data", "synthetic:crossplane:60", "--data", "synthetic:ndc:120:3:4",
         "--variant", "gblstsvm", "--variant", "lsgblstsvm", "--noise", "0", "--noise", "0.2",
         "--folds", "3", "--seed", "7"]


# small selected c3 can exhaust the sweep budget; the flagged best iterate is still used
@pytest.mark.filterwarnings("ignore::gblstsvm.models.ConvergenceWarning")
def test_benchmark_rows_and_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(BENCH + ["--out", str(a)]) == 0
    assert main(BENCH + ["--out", str(b), "--workers", "4"]) == 0
    rows = _rows(a / "results.csv")
    assert len(rows) == 8
    assert {r["variant"] for r in rows} == {"gblstsvm", "lsgblstsvm"}
    for r in rows:
        assert 0.0 <= float(r["accuracy"]) <= 1.0 and int(r["k"]) >= 2
    for name in ("accuracy_noise0.csv", "accuracy_noise0.2.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    drop = lambda rs: [{k: v for k, v in r.items() if k != "fit_ms"} for r in rs]  # noqa: E731
    assert drop(rows) == drop(_rows(b / "results.csv"))


def test_benchmark_no_rows_is_failure(tmp_path):
    rc = main(["benchmark", "--data", str(tmp_path / "missing.csv"), "--grid", "none", "--out", str(tmp_path / "o")])
    assert rc == 1


def test_benchmark_noise_both(tmp_path):
    rc = main(["benchmark", "--data", "synthetic:ndc:100:2:6", "--variant", "lstsvm", "--grid", "none",
               "--noise", "0.1", "--noise-target", "both", "--out", str(tmp_path)])
    assert rc == 0
    assert len(_rows(tmp_path / "results.csv")) == 1


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# comment\n"
        "data = synthetic:crossplane:40\n"
        "data = synthetic:ndc:80:2:5\n"
        "variant = lstsvm\n"
        "noise = 0.1\n"
        "grid = none\n"
        "seed = 3\n"
    )
    assert read_config(cfg)["data"] == ["synthetic:crossplane:40", "synthetic:ndc:80:2:5"]
    a = parse_args(["benchmark", "--config", str(cfg), "--seed", "9"])
    assert a.data == ["synthetic:crossplane:40", "synthetic:ndc:80:2:5"]
    assert a.variant == ["lstsvm"] and a.noise == [0.1] and a.grid == "none"
    assert a.seed == 9
    assert main(["benchmark", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert len(_rows(tmp_path / "o" / "results.csv")) == 2


def test_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(SystemExit):
        parse_args(["benchmark", "--config", str(cfg)])


def test_resolve_dataset():
    name, d = resolve_dataset("synthetic:ndc:50:4:3")
    assert "ndc" in name
    assert (d.m, d.n_features) == (50, 4)
    with pytest.raises(ValueError):
        resolve_dataset("synthetic:spiral")
