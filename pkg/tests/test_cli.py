import json

import pytest

from frele.cli import COMMANDS, main
from frele.data_io import gen_ett_like, load_manifest, read_csv_rows, write_series_csv

SMALL = ["--synthetic-rows", "700", "--split", "fractional", "--lookback", "32", "--horizon", "16", "--stride", "4", "--epochs", "2"]


@pytest.mark.parametrize("command", list(COMMANDS))
def test_help_lists_defaults(command, capsys):
    with pytest.raises(SystemExit) as e:
        main([command, "--help"])
    assert e.value.code == 0
    text = " ".join(capsys.readouterr().out.split())
    assert "--seed" in text and "--config" in text
    if "loss" in COMMANDS[command][0]:
        for frag in ("(default: 0.3)", "(default: 5)", "(default: B, the bin count of the horizon)", "--horizon", "--lookback"):
            assert frag in text


def test_unknown_subcommand(capsys):
    assert main(["nope"]) == 2


def test_unknown_flag(capsys):
    assert main(["train", "--bogus", "1"]) == 2


def test_invalid_config_value(capsys):
    assert main(["train", "--delta", "1.5"]) == 2
    assert "delta" in capsys.readouterr().err


def test_runtime_failure(tmp_path, capsys):
    assert main(["train", "--data", str(tmp_path / "missing.csv"), "--out", str(tmp_path / "o")]) == 1


def test_fft_check(capsys):
    assert main(["fft-check", "--trials", "50", "--max-n", "100"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_train_manifest(tmp_path):
    data = tmp_path / "toy.csv"
    write_series_csv(data, gen_ett_like(700, seed=2))
    out = tmp_path / "run"
    assert main(["train", "--data", str(data), *SMALL[2:], "--delta", "0.3", "--out", str(out)]) == 0
    m = load_manifest(out / "manifest.json")
    assert {"mse", "mae"} <= set(m["metrics"])
    assert m["config"]["delta"] == 0.3 and m["seed"] == 0 and m["version"]
    assert m["dataset"]["path"] == str(data)
    header, rows = read_csv_rows(out / "report.csv")
    assert header == ["lf", "mf", "hf", "gf", "mae", "mse"] and len(rows) == 1
    assert (out / "epochs.csv").exists() and (out / "model.npz").exists()


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"delta": 0.7, "d": 3, "lookback": 32}))
    out = tmp_path / "run"
    assert main(["train", "--config", str(cfg), *SMALL, "--delta", "0.2", "--out", str(out)]) == 0
    m = load_manifest(out / "manifest.json")
    assert m["config"]["delta"] == 0.2 and m["config"]["d"] == 3


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"deltaa": 0.7}))
    assert main(["train", "--config", str(cfg)]) == 2


def test_sweep_delta_eleven_rows(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep-delta", *SMALL, "--epochs", "1", "--grid", "0:1:0.1", "--out", str(out)]) == 0
    header, rows = read_csv_rows(out / "sweep.csv")
    assert header == ["grid_value", "mse", "mae", "time_loss", "freq_loss"]
    assert len(rows) == 11
    assert [float(r[0]) for r in rows] == [i / 10 for i in range(11)]


@pytest.mark.parametrize(
    "argv, files",
    [
        (["diagnose", *SMALL], ["bias_profile.csv", "band_report.csv"]),
        (["ablate", *SMALL], ["ablation.csv"]),
        (["prune-sweep", *SMALL, "--grid", "0.5,1"], ["sweep.csv"]),
        (["theory-curves", "--sampler", "abs", "--samples", "200"], ["decay_curves.csv"]),
        (["synth-bias", "--hidden", "16", "--iterations", "30", "--snapshot-every", "10"], ["trajectory.csv"]),
    ],
)
def test_byte_identical_reruns(argv, files, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main([*argv, "--seed", "3", "--out", str(a)]) == 0
    assert main([*argv, "--seed", "3", "--out", str(b)]) == 0
    for f in files:
        assert (a / f).read_bytes() == (b / f).read_bytes(), f
    assert load_manifest(a / "manifest.json")["seed"] == 3


def test_default_out_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["theory-curves", "--seed", "4", "--points", "5"]) == 0
    runs = list((tmp_path / "runs").iterdir())
    assert len(runs) == 1 and runs[0].name.endswith("-4")
