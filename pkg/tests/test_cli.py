import csv
import json
import os

import numpy as np
import pytest

from aelab import cli


BASE_CFG = """
name = smoke
seed = 3
dataset.kind = gaussians
dataset.means = 2 0 ; -2 0
dataset.stds = 0.4, 0.4
dataset.per_class = 80
arch.encoder = 8, 1
arch.decoder = 8
train.modes = standard, icrst
train.p_grid = 0.0, 1.0
train.epochs = 5
train.batch_size = 32
eval.classifiers = knn
eval.folds = 4
"""


def write_cfg(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_sweep_end_to_end(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path, BASE_CFG)
    out = str(tmp_path / "runs")
    assert cli.main(["--out", out, "sweep", "--config", cfg_path]) == 0
    assert "sweep complete" in capsys.readouterr().out

    manifest = json.load(open(os.path.join(out, "manifest.json")))
    names = [r["name"] for r in manifest["runs"]]
    assert names == ["standard_seed3", "icrst_p0_seed3", "icrst_p1_seed3"]
    assert manifest["dataset"]["rows"] == 160
    for run in manifest["runs"]:
        assert "error" not in run
        for key in ("network", "loss_curve", "latents"):
            assert os.path.exists(run[key])
        # recorded hashes match the bytes on disk
        for base, digest in run["hashes"].items():
            assert cli._sha256(os.path.join(run["dir"], base)) == digest

    # the p=0 run must reproduce the standard run parameter-for-parameter
    by_name = {r["name"]: r for r in manifest["runs"]}
    assert by_name["icrst_p0_seed3"]["checksum"] == by_name["standard_seed3"]["checksum"]

    with open(os.path.join(out, "sweep.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert set(r["metric"] for r in rows) == {"accuracy", "macro_f1"}
    assert set(r["mode"] for r in rows) == {"standard", "icrst"}
    for r in rows:
        assert 0.0 <= float(r["mean"]) <= 1.0
        assert float(r["ci95"]) >= 0.0

    agg = json.load(open(os.path.join(out, "analysis.json")))
    for name in names:
        assert agg[name]["identity_residual"] < 1e-10
        assert "convergence" in agg[name]
    # bound analysis applies to the random-target runs only
    assert "bound" not in agg["standard_seed3"]
    assert "bound" in agg["icrst_p1_seed3"]


def test_latents_roundtrip(tmp_path):
    cfg_path = write_cfg(tmp_path, BASE_CFG)
    out = str(tmp_path / "runs")
    assert cli.main(["--out", out, "train", "--config", cfg_path]) == 0
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    feats, labels = cli._read_latents_csv(manifest["runs"][0]["latents"])
    assert feats.shape == (160, 1)
    assert set(labels.tolist()) == {0, 1}


def test_config_error_exit_code(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path, "dataset.kind = nope\ntrain.epochs = 0\n")
    assert cli.main(["train", "--config", cfg_path]) == 2
    err = capsys.readouterr().err
    assert "dataset.kind" in err and "train.epochs" in err


def test_missing_manifest(tmp_path, capsys):
    cfg_path = write_cfg(tmp_path, BASE_CFG)
    out = str(tmp_path / "never_trained")
    assert cli.main(["--out", out, "evaluate", "--config", cfg_path]) == 2
    assert "manifest" in capsys.readouterr().err


def test_seed_override_changes_run_names(tmp_path):
    cfg_path = write_cfg(tmp_path, BASE_CFG)
    out = str(tmp_path / "runs")
    assert cli.main(["--out", out, "--seed", "11", "train",
                     "--config", cfg_path]) == 0
    manifest = json.load(open(os.path.join(out, "manifest.json")))
    assert manifest["runs"][0]["name"] == "standard_seed11"


def test_parallel_training_matches_serial(tmp_path):
    cfg_path = write_cfg(tmp_path, BASE_CFG)
    out_a = str(tmp_path / "serial")
    out_b = str(tmp_path / "parallel")
    assert cli.main(["--out", out_a, "train", "--config", cfg_path]) == 0
    assert cli.main(["--out", out_b, "--workers", "3", "train",
                     "--config", cfg_path]) == 0
    a = json.load(open(os.path.join(out_a, "manifest.json")))
    b = json.load(open(os.path.join(out_b, "manifest.json")))
    assert [r["checksum"] for r in a["runs"]] == [r["checksum"] for r in b["runs"]]


def test_vector_field_on_planar_dataset(tmp_path):
    cfg = """
name = ring
seed = 0
dataset.kind = circle
dataset.radius = 1.0
dataset.noise = 0.05
dataset.count = 200
arch.encoder = 8, 1
arch.decoder = 8
train.modes = standard
train.epochs = 5
train.batch_size = 64
analysis.convergence = false
analysis.bound = false
analysis.pca = false
analysis.vector_field = true
"""
    cfg_path = write_cfg(tmp_path, cfg)
    out = str(tmp_path / "runs")
    assert cli.main(["--out", out, "train", "--config", cfg_path]) == 0
    assert cli.main(["--out", out, "analyze", "--config", cfg_path]) == 0
    run_dir = os.path.join(out, "standard_seed0")
    field = np.loadtxt(os.path.join(run_dir, "field.csv"), delimiter=",",
                       skiprows=1)
    assert field.shape == (625, 4)
    svg = open(os.path.join(run_dir, "field.svg")).read()
    assert svg.startswith("<svg")


def test_csv_dataset_pipeline(tmp_path):
    data_path = tmp_path / "toy.csv"
    rng = np.random.default_rng(5)
    with open(data_path, "w") as fh:
        fh.write("f0,f1,f2,label\n")
        for i in range(90):
            c = i % 2
            row = rng.standard_normal(3) + (3.0 if c else -3.0)
            fh.write(",".join(f"{v:.6f}" for v in row) + f",c{c}\n")
    cfg = f"""
name = csvtest
dataset.kind = csv
dataset.path = {data_path}
dataset.label_column = label
preprocess = tabular
arch.encoder = 4, 1
arch.decoder = 4
train.modes = icrst
train.p_grid = 1.0
train.epochs = 5
train.batch_size = 16
eval.classifiers = gnb
eval.folds = 3
"""
    cfg_path = write_cfg(tmp_path, cfg)
    out = str(tmp_path / "runs")
    assert cli.main(["--out", out, "sweep", "--config", cfg_path]) == 0
    rows = list(csv.DictReader(open(os.path.join(out, "sweep.csv"))))
    assert rows and all(r["classifier"] == "gnb" for r in rows)
