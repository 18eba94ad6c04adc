import json
import subprocess
import sys

import numpy as np
import pytest

from qdeconv.checks import random_model, serialize_model
from qdeconv.cli import main
from qdeconv.field import FieldModel, bumps
from qdeconv.io import config_from_header, read_table


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text("n_sites = 32\nnoise_std = 0.001\nseed = 4\n")
    return path


def test_kernel_columns(tmp_path):
    out = tmp_path / "k.csv"
    assert run("kernel", "--output", out) == 0
    meta, table = read_table(out)
    assert list(table) == [
        "k", "omega", "x", "eig_q_sqrt", "eig_p_sqrt", "eig_q_bures", "eig_p_bures", "naive_inverse", "status",
    ]
    assert len(table["k"]) == 65
    assert np.all(np.diff(table["k"]) > 0)
    assert meta["beta"] == "0.01" and meta["sigma"] == "2"
    assert set(table["status"]) == {"ok", "excluded-pure"}


def test_kernel_is_deterministic(tmp_path, small_cfg):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("kernel", "--config", small_cfg, "--output", a) == 0
    assert run("kernel", "--config", small_cfg, "--output", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_kernel_without_smoothing(tmp_path):
    cfg = tmp_path / "flat.cfg"
    cfg.write_text("n_sites = 16\nsigma = 0\n")
    out = tmp_path / "k.csv"
    assert run("kernel", "--config", cfg, "--output", out) == 0
    _, table = read_table(out)
    for col in ("eig_q_sqrt", "eig_p_sqrt", "eig_q_bures", "eig_p_bures"):
        np.testing.assert_allclose(table[col], 1.0, atol=1e-10)


def test_simulate_header_and_seed(tmp_path, small_cfg):
    a, b, c = (tmp_path / n for n in ("a.csv", "b.csv", "c.csv"))
    assert run("simulate", "--config", small_cfg, "--output", a) == 0
    assert run("simulate", "--config", small_cfg, "--output", b) == 0
    assert run("simulate", "--config", small_cfg, "--output", c, "--seed", 5) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()
    meta, table = read_table(a)
    cfg = config_from_header(meta)
    assert cfg.seed == 4 and cfg.n_sites == 32
    assert meta["truth"] == "builtin:bumps"
    assert len(table["q"]) == 32


def test_simulate_from_truth_file(tmp_path, small_cfg):
    truth = tmp_path / "truth.csv"
    truth.write_text("q\n" + "\n".join(["0"] * 31 + ["1"]) + "\n")
    out = tmp_path / "m.csv"
    assert run("simulate", "--config", small_cfg, "--truth", truth, "--noise", 0, "--output", out) == 0
    _, table = read_table(out)
    assert table["q"].sum() == pytest.approx(1.0)


def test_unreadable_truth(tmp_path, small_cfg):
    assert run("simulate", "--config", small_cfg, "--truth", tmp_path / "nope.csv") == 2


def test_reconstruct_roundtrip(tmp_path):
    cfg = tmp_path / "clean.cfg"
    cfg.write_text("noise_std = 0\n")
    meas, rec = tmp_path / "m.csv", tmp_path / "r.csv"
    assert run("simulate", "--config", cfg, "--output", meas) == 0
    assert run("reconstruct", "--config", cfg, "--input", meas, "--method", "naive", "--output", rec) == 0
    meta, table = read_table(rec)
    assert np.abs(table["q"] - bumps(FieldModel()).q).max() < 1e-6
    assert meta["method"] == "naive"


def test_reconstruct_length_mismatch(tmp_path, small_cfg):
    meas = tmp_path / "m.csv"
    assert run("simulate", "--config", small_cfg, "--output", meas) == 0
    assert run("reconstruct", "--input", meas) == 2


@pytest.mark.parametrize(
    "metric, method, code",
    [
        ("sqrt", "wiener", 2),
        ("sqrt", "adjoint-bures", 2),
        ("bures", "wiener", 0),
        ("classical", "wiener", 0),
        ("bures", "naive", 0),
        ("bures", "tikhonov-bures", 0),
    ],
)
def test_method_metric_compatibility(tmp_path, metric, method, code):
    cfg = tmp_path / "m.cfg"
    cfg.write_text(f"n_sites = 32\nmetric = {metric}\nlambda = 0.1\n")
    meas = tmp_path / "m.csv"
    assert run("simulate", "--config", cfg, "--output", meas) == 0
    assert run("reconstruct", "--config", cfg, "--input", meas, "--method", method, "--output", tmp_path / "r") == code


def test_tikhonov_zero_lambda_on_field(tmp_path):
    cfg = tmp_path / "m.cfg"
    cfg.write_text("n_sites = 32\n")
    meas = tmp_path / "m.csv"
    assert run("simulate", "--config", cfg, "--output", meas) == 0
    # X_* X stays invertible on every ok mode, so lambda = 0 is admissible here
    assert run("reconstruct", "--config", cfg, "--input", meas, "--method", "tikhonov-sqrt",
               "--output", tmp_path / "r") == 0


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("beta = 0.01\ntemperature = 3\n")
    assert run("kernel", "--config", cfg) == 2
    assert "bad.cfg:2" in capsys.readouterr().err


def test_validate_rejects_invalid_channel(tmp_path):
    cfg = tmp_path / "y.cfg"
    cfg.write_text("y = 0.5\n")
    assert run("validate", "--config", cfg) == 2


def test_validate_zero_trials(tmp_path, capsys):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("n_sites = 32\n")
    assert run("validate", "--config", cfg, "--trials", 0) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "adjointness sqrt" in out


def test_validate_default(capsys):
    assert run("validate", "--trials", 5) == 0
    assert "PASS" in capsys.readouterr().out


def test_validate_replay(tmp_path, capsys):
    prior, chan = random_model(np.random.default_rng(1))
    path = tmp_path / "model.json"
    path.write_text(serialize_model(prior, chan, ["none"]))
    assert json.loads(path.read_text())["failed"] == ["none"]
    assert run("validate", "--replay", path) == 0


def test_negative_lambda(tmp_path):
    assert run("kernel", "--lambda", -1, "--output", tmp_path / "k") == 2


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["reconstruct"])
    assert info.value.code == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "qdeconv", "kernel", "--output", str(tmp_path / "k.csv")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
