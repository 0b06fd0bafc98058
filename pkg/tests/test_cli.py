import json
import subprocess
import sys

import pytest

from uglt.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_dims_unit_square(capsys):
    code, out, _ = run(capsys, "dims", "--domain", "unit_square", "--n", "4")
    assert code == 0
    assert out.splitlines() == ["n,dim,ratio,measure", "4,9,0.5625,1"]


def test_dims_writes_csv(capsys, tmp_path):
    code, out, _ = run(capsys, "dims", "--domain", "cusp", "--n", "8", "--n", "16", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "dims.csv").read_text() == out


@pytest.mark.parametrize("argv", [
    ["dims", "--domain", "sphere", "--n", "4"],
    ["toeplitz", "--symbol", "nope", "--n", "4"],
    ["dims", "--n", "8", "--n", "4"],
    ["experiment", "--t", "-1", "--n", "8"],
])
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "configuration error" in err


def test_empty_n_list_in_config(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('domain = "disk"\nn_list = []\n')
    assert run(capsys, "dims", "--config", str(cfg))[0] == 2
    cfg.write_text('domain = "disk"\nwobble = 3\n')
    assert run(capsys, "dims", "--config", str(cfg))[0] == 2


def test_cap_exceeded_exit_3(capsys, tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('n_list = [[40, 40]]\n[caps]\neig_dim = 100\n')
    code, _, err = run(capsys, "experiment", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 3 and "cap" in err


def test_experiment_is_reproducible(capsys, tmp_path):
    args = ["experiment", "--n", "8", "--n", "12", "--t", "2", "--t", "4"]
    assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--out", str(tmp_path / "b"), "--jobs", "2")[0] == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_experiment_oracle(capsys, tmp_path):
    code, _, _ = run(capsys, "experiment", "--domain", "unit_square", "--coefficient", "one",
                     "--n", "8", "--n", "16", "--t", "2", "--out", str(tmp_path))
    assert code == 0
    rows = (tmp_path / "oracle.csv").read_text().splitlines()[1:]
    assert all(float(r.split(",")[1]) < 1e-8 for r in rows)


def test_toeplitz_restrict_gacs_isometry(capsys, tmp_path):
    code, out, _ = run(capsys, "toeplitz", "--symbol", "lap1d", "--n", "5", "--out", str(tmp_path))
    assert code == 0 and out.splitlines()[1].startswith("5,5,13,True")
    assert json.loads((tmp_path / "fourier_lap1d.json").read_text())
    code, out, _ = run(capsys, "restrict-check", "--domain", "disk", "--n", "8", "--n", "16")
    assert code == 0 and out.count("pass") == 2
    code, out, _ = run(capsys, "gacs", "--n", "16", "--t", "2")
    assert code == 0 and out.splitlines()[1].endswith("pass")
    code, out, _ = run(capsys, "isometry", "--domain", "unit_square", "--n", "8", "--n", "16")
    assert code == 0 and len(out.splitlines()) == 3


def test_verify_negative_control(capsys, tmp_path):
    code, out, err = run(capsys, "verify", "--only", "3", "--inject-fault", "asymmetry",
                         "--out", str(tmp_path))
    assert code == 4
    verdict = json.loads(out)
    assert verdict[0]["status"] == "fail" and verdict[0]["failed_checks"]
    assert json.loads((tmp_path / "verdict.json").read_text()) == verdict
    code, out, _ = run(capsys, "verify", "--only", "3")
    assert code == 0 and json.loads(out)[0]["status"] == "pass"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "uglt", "dims", "--domain", "unit_square", "--n", "4"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "4,9,0.5625,1" in res.stdout
