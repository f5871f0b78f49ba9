import json
import re

import numpy as np
import pytest

from offtsim import cli
from offtsim.gridio import read_grid, write_grid


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_usage_errors(capsys):
    assert run(capsys)[0] == 2
    assert run(capsys, "nope")[0] == 2
    assert run(capsys, "--help")[0] == 0
    assert run(capsys, "verify", "--set", "novalue")[0] == 2


def test_verify_default(capsys):
    code, out, _ = run(capsys, "verify")
    assert code == 0
    rows = [l for l in out.splitlines() if l.startswith("n=")]
    assert len(rows) == 12
    assert all(float(r) < 1e-10 for r in re.findall(r"dft_residual=(\S+)", out))


def test_verify_bad_n(capsys):
    code, _, err = run(capsys, "verify", "--n", "3")
    assert code == 2 and "'n'" in err


def test_verify_sigma_fails(capsys):
    code, out, _ = run(capsys, "verify", "--sigma", "0.5")
    assert code == 1 and "FAIL" in out and "dft_residual=" in out


def test_verify_config_file(capsys, in_tmp):
    (in_tmp / "c.yaml").write_text("verify_max_n: 4\n")
    code, out, _ = run(capsys, "verify", "--config", "c.yaml")
    assert code == 0 and len([l for l in out.splitlines() if l.startswith("n=")]) == 4
    (in_tmp / "bad.yaml").write_text("verify_max: 4\n")
    code, _, err = run(capsys, "verify", "--config", "bad.yaml")
    assert code == 2 and "verify_max" in err


def test_convolve_delta(capsys, in_tmp, rng):
    img = rng.normal(size=(8, 8))
    delta = np.zeros((8, 8))
    delta[0, 0] = 1
    write_grid("img.txt", img)
    write_grid("k.txt", delta)
    code, _, _ = run(capsys, "convolve", "img.txt", "k.txt", "--out", "o.txt")
    assert code == 0
    assert np.max(np.abs(read_grid("o.txt") - img)) < 1e-10


def test_convolve_oracle(capsys, rng):
    write_grid("a.txt", rng.normal(size=(4, 4)))
    write_grid("b.txt", rng.normal(size=(4, 4)))
    code, out, _ = run(capsys, "convolve", "a.txt", "b.txt", "--n", "4", "--oracle")
    assert code == 0
    assert float(re.search(r"relative_error=(\S+)", out).group(1)) < 1e-9
    code, out, _ = run(capsys, "convolve", "a.txt", "b.txt", "--n", "4", "--oracle", "--quantized")
    assert code == 0
    assert 0 < float(re.search(r"relative_error=(\S+)", out).group(1)) < 0.1


def test_convolve_errors(capsys, in_tmp):
    write_grid("a.txt", np.ones((4, 4)))
    (in_tmp / "junk.txt").write_text("1 2\nfoo 3\n")
    assert run(capsys, "convolve", "a.txt", "a.txt")[0] == 2  # default n=8
    assert run(capsys, "convolve", "a.txt", "junk.txt", "--n", "4")[0] == 2
    assert run(capsys, "convolve", "a.txt", "missing.txt", "--n", "4")[0] == 2


def test_direct_convolution_helper(rng):
    from conftest import brute_circular_conv
    x, h = rng.normal(size=(4, 4)), rng.normal(size=(4, 4))
    assert np.allclose(cli.circular_convolve_direct(x, h), brute_circular_conv(x, h))


def test_calibrate(capsys):
    code, out, _ = run(capsys, "calibrate", "--sigma", "0")
    assert code == 0
    assert float(re.search(r"post_residual=(\S+)", out).group(1)) < 1e-12
    assert "iterations=0" in out
    code, out, _ = run(capsys, "calibrate", "--sigma", "0.1", "--seed", "3")
    assert code == 0
    assert float(re.search(r"post_residual=(\S+)", out).group(1)) < 1e-3


def test_calibrate_stress_is_well_formed(capsys):
    code, out, _ = run(capsys, "calibrate", "--n", "4", "--sigma", "2.0", "--set", "calibration_threshold=1e-9")
    assert code in (0, 1)
    for key in ("pre_residual=", "post_residual=", "iterations="):
        assert key in out


def test_fom(capsys, in_tmp):
    code, out, _ = run(capsys, "fom", "--out", "a.csv")
    assert code == 0
    assert run(capsys, "fom", "--out", "b.csv")[0] == 0
    assert (in_tmp / "a.csv").read_bytes() == (in_tmp / "b.csv").read_bytes()
    rep = json.loads((in_tmp / "a.json").read_text())
    assert 32 <= rep["crossovers"]["serial"]["n_below"] <= 512
    assert 2048 <= rep["crossovers"]["parallel"]["n_below"] <= 32768
    assert rep["presets"]["dac"]["sample_rate"] == 100e9


def test_fom_degenerate_and_invalid(capsys, in_tmp):
    code, _, _ = run(capsys, "fom", "--n-min", "4", "--n-max", "4", "--report", "r.json")
    assert code == 0
    assert len((in_tmp / "fom.csv").read_text().splitlines()) == 4
    rep = json.loads((in_tmp / "r.json").read_text())
    assert rep["crossovers"] == {"serial": None, "parallel": None}
    assert run(capsys, "fom", "--n-min", "6")[0] == 2
    assert run(capsys, "fom", "--n-min", "64", "--n-max", "8")[0] == 2


def test_fom_set_override(capsys, in_tmp):
    code, _, _ = run(capsys, "fom", "--n-max", "64", "--set", "gpu.power=500")
    assert code == 0
    assert json.loads((in_tmp / "fom.json").read_text())["presets"]["gpu"]["power"] == 500


def test_plan(capsys, in_tmp):
    code, out, _ = run(capsys, "plan", "--n", "4", "--convention", "paper-eq1")
    assert code == 0 and json.loads(out)["n"] == 4
    assert run(capsys, "plan", "--out", "p.json")[0] == 0
    assert json.loads((in_tmp / "p.json").read_text())["n"] == 8
