import json
import subprocess
import sys

import pytest

from coin.cli import main
from coin.data import load_dataset
from coin.experiments import GroundTruth, SyntheticSpec, envelope_violations, generate_synthetic, load_truth


@pytest.fixture(scope="module")
def syn1(tmp_path_factory):
    d = tmp_path_factory.mktemp("syn1")
    assert main(["generate", "--spec", "syn1", "--seed", "0",
                 "--out-data", str(d / "d.csv"), "--out-truth", str(d / "t.json")]) == 0
    return d


def test_generate_outputs(syn1):
    ds = load_dataset(syn1 / "d.csv")
    assert (ds.n, ds.m) == (405, 15)
    loaded = load_truth(syn1 / "t.json", ds)
    assert len(loaded.planted) == 30
    # the file holds only the planted sets; envelopes come from the same generator run
    ref_ds, ref = generate_synthetic(SyntheticSpec("SYN1", seed=0))
    assert loaded.planted == ref.planted
    assert ds.values.tolist() == ref_ds.values.tolist()
    combined = GroundTruth(loaded.planted, loaded.labels, ref.means, ref.stds, ref.parents)
    assert envelope_violations(ds, combined) == []


def test_generate_same_seed_same_files(syn1, tmp_path):
    main(["generate", "--spec", "SYN1", "--seed", "0",
          "--out-data", str(tmp_path / "d.csv"), "--out-truth", str(tmp_path / "t.json")])
    assert (tmp_path / "d.csv").read_bytes() == (syn1 / "d.csv").read_bytes()
    assert (tmp_path / "t.json").read_bytes() == (syn1 / "t.json").read_bytes()


def test_detect(syn1, tmp_path):
    out = tmp_path / "o.txt"
    assert main(["detect", "--data", str(syn1 / "d.csv"), "--fraction", str(30 / 405), "--out", str(out)]) == 0
    assert len(out.read_text().split()) == 30
    assert main(["detect", "--data", str(syn1 / "d.csv"), "--fraction", "0", "--out", str(out)]) == 0
    assert out.read_text() == ""


def test_detect_bad_path(tmp_path, capsys):
    assert main(["detect", "--data", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")]) == 2
    assert "no such file" in capsys.readouterr().err


def test_interpret_truth_outliers(syn1, tmp_path):
    truth = json.loads((syn1 / "t.json").read_text())
    ids = tmp_path / "ids.txt"
    ids.write_text("\n".join(truth) + "\n")
    out = tmp_path / "r.json"
    assert main(["interpret", "--data", str(syn1 / "d.csv"), "--outliers", str(ids), "--out", str(out),
                 "--threads", "2"]) == 0
    report = json.loads(out.read_text())
    assert len(report["records"]) == 30
    for rec in report["records"]:
        assert rec["attributes"]
        scores = [a["score"] for a in rec["attributes"]]
        assert scores == sorted(scores, reverse=True)
        assert {"size", "centroid", "margin", "gamma", "nonzero_weight_count", "converged"} <= set(rec["clusters"][0])
    assert report["meta"]["config"]["master_seed"] == report["meta"]["seed"] == 42
    assert "timings" not in report["meta"]
    # the faithfulness evaluator scores a report against truth
    metrics = tmp_path / "m.json"
    assert main(["evaluate", "--mode", "faithfulness", "--data", str(syn1 / "d.csv"), "--truth",
                 str(syn1 / "t.json"), "--predictions", str(out), "--out", str(metrics)]) == 0
    assert json.loads(metrics.read_text())["f1"] > 0.8


def test_interpret_empty_outlier_file(syn1, tmp_path):
    ids = tmp_path / "ids.txt"
    ids.write_text("")
    out = tmp_path / "r.json"
    assert main(["interpret", "--data", str(syn1 / "d.csv"), "--outliers", str(ids), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["records"] == []


def test_interpret_byte_identical_and_seed_override(syn1, tmp_path, monkeypatch):
    ids = tmp_path / "ids.txt"
    ids.write_text("375\n380\n12\n")
    args = ["interpret", "--data", str(syn1 / "d.csv"), "--outliers", str(ids)]
    main(args + ["--out", str(tmp_path / "a.json"), "--threads", "1"])
    main(args + ["--out", str(tmp_path / "b.json"), "--threads", "3"])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    monkeypatch.setenv("COIN_SEED", "7")
    main(args + ["--out", str(tmp_path / "c.json")])
    assert json.loads((tmp_path / "c.json").read_text())["meta"]["seed"] == 7
    main(args + ["--out", str(tmp_path / "d.json"), "--seed", "8"])
    assert json.loads((tmp_path / "d.json").read_text())["meta"]["seed"] == 8


def test_timings_flag(syn1, tmp_path):
    ids = tmp_path / "ids.txt"
    ids.write_text("375\n")
    out = tmp_path / "r.json"
    main(["interpret", "--data", str(syn1 / "d.csv"), "--outliers", str(ids), "--out", str(out), "--timings"])
    assert "interpret_seconds" in json.loads(out.read_text())["meta"]["timings"]


def test_config_echo_reproduces_run(syn1, tmp_path):
    ids = tmp_path / "ids.txt"
    ids.write_text("375\n381\n")
    first = tmp_path / "a.json"
    main(["interpret", "--data", str(syn1 / "d.csv"), "--outliers", str(ids), "--out", str(first),
          "--seed", "3"])
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(json.loads(first.read_text())["meta"]["config"]))
    second = tmp_path / "b.json"
    main(["interpret", "--data", str(syn1 / "d.csv"), "--outliers", str(ids), "--out", str(second),
          "--config", str(cfg)])
    assert json.loads(first.read_text())["records"] == json.loads(second.read_text())["records"]


def test_exit_codes(syn1, tmp_path):
    ids = tmp_path / "ids.txt"
    ids.write_text("375\n")
    bad_cfg = tmp_path / "c.json"
    bad_cfg.write_text('{"theta_rel": 5}')
    base = ["interpret", "--data", str(syn1 / "d.csv"), "--out", str(tmp_path / "r.json")]
    assert main(base + ["--outliers", str(ids), "--config", str(bad_cfg)]) == 3
    unknown = tmp_path / "u.txt"
    unknown.write_text("99999\n")
    assert main(base + ["--outliers", str(unknown)]) == 2


def test_evaluate_perfect_predictions(syn1, tmp_path):
    truth = json.loads((syn1 / "t.json").read_text())
    report = {"records": [{"id": k, "attributes": [{"index": m} for m in v]} for k, v in truth.items()]}
    pred = tmp_path / "p.json"
    pred.write_text(json.dumps(report))
    out = tmp_path / "m.json"
    assert main(["evaluate", "--mode", "faithfulness", "--data", str(syn1 / "d.csv"), "--truth",
                 str(syn1 / "t.json"), "--predictions", str(pred), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["f1"] == 1.0


def test_evaluate_beta_sweep_csv(tmp_path):
    main(["generate", "--spec", "syn2", "--seed", "0",
          "--out-data", str(tmp_path / "d.csv"), "--out-truth", str(tmp_path / "t.json")])
    out = tmp_path / "s.csv"
    assert main(["evaluate", "--mode", "beta-sweep", "--data", str(tmp_path / "d.csv"), "--truth",
                 str(tmp_path / "t.json"), "--repeats", "1", "--betas", "0", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "beta,auc_mean,auc_q25,auc_q75"
    assert lines[1].startswith("0.0,") and lines[2].startswith("1.0,")
    assert lines[3].startswith("# trend")


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "coin.cli", "generate", "--spec", "syn1",
                          "--out-data", str(tmp_path / "d.csv"), "--out-truth", str(tmp_path / "t.json")],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "405 x 15" in res.stdout
