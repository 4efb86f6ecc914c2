import json
import os
import subprocess
import sys

import numpy as np
import pytest

from fpetpf.euler import GasConstants, Grid
from fpetpf.harness import cli, io
from fpetpf.harness.problems import build_truth, get_problem
from fpetpf.harness.run import AssimilationFailure

GAS = GasConstants()
SMALL = ["--problem", "sod", "--set", "shape=(101,)", "--set", "n_obs=4", "--set", "skip=1",
         "--set", "n_ensemble=3", "--seed", "3"]


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    rc = cli.main(["run", *SMALL, "--out", str(out), "--filter", "etpf", "--filter", "fp-etpf"])
    assert rc == cli.EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["filters"]) == {"etpf", "fp-etpf"}
    for name in ("config.txt", "truth/snapshot_final.csv", "truth/spacetime_s.csv", "truth/observations.csv",
                 "etpf/errors.csv", "fp-etpf/weights.csv", "fp-etpf/features.csv",
                 "fp-etpf/snapshot_p02.csv", "etpf/spacetime_rho_p00.csv"):
        assert (out / name).is_file(), name
    header, data = io.read_table(out / "fp-etpf" / "errors.csv")
    assert header == ["step", "t", "assimilated", "error"] and data.shape == (4, 4)
    assert "final error" in capsys.readouterr().out


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("problem = sod\nshape = (51,)\nn_obs = 2\nskip = 0\nn_ensemble = 2\n")
    out = tmp_path / "o"
    assert cli.main(["run", "--config", str(cfg), "--set", "n_obs=3", "--out", str(out)]) == 0
    _, data = io.read_table(out / "fp-etpf" / "errors.csv")
    assert len(data) == 3


@pytest.mark.parametrize("extra", [
    ["--set", "n_obs=0"],
    ["--set", "beta_w=0.1"],
    ["--set", "bogus=1"],
    ["--set", "novalue"],
    ["--problem", "noh"],
    ["--config", "/nonexistent/cfg.txt"],
])
def test_config_errors_exit_2(tmp_path, extra, capsys):
    rc = cli.main(["run", *SMALL, "--out", str(tmp_path), *extra])
    assert rc == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_numerical_failure_exit_3(tmp_path, monkeypatch, capsys):
    def explode(setup, kind, progress=None):
        raise AssimilationFailure("negative pressure", 2, setup.initial, None)

    monkeypatch.setattr(cli, "run_filter", explode)
    rc = cli.main(["run", *SMALL, "--out", str(tmp_path)])
    assert rc == cli.EXIT_NUMERICAL
    dump = np.load(tmp_path / "failure_fp-etpf.npz")
    assert dump["q"].shape == (3, 3, 101) and int(dump["step"]) == 2
    assert "diagnostic dump" in capsys.readouterr().err


def test_truth_command(tmp_path, capsys):
    rc = cli.main(["truth", "--problem", "sod", "--set", "shape=(201,)", "--set", "t_final=0.1", "--out", str(tmp_path)])
    assert rc == 0
    text = capsys.readouterr().out
    l1 = float(text.split("L1(rho) vs exact:")[1].split()[0])
    assert l1 < 1e-2
    assert (tmp_path / "exact.csv").is_file()


def test_align_command_1d(tmp_path):
    rc = cli.main(["align", "--problem", "sod", "--set", "shape=(101,)", "--other", "x_d=0.6",
                   "--time", "0.05", "--alpha", "0.3", "--out", str(tmp_path)])
    assert rc == 0
    _, pairs = io.read_table(tmp_path / "path.csv")
    assert tuple(pairs[0]) == (0, 0) and tuple(pairs[-1]) == (100, 100)


def test_align_command_2d(tmp_path):
    rc = cli.main(["align", "--problem", "blast2d", "--set", "shape=(21,21)", "--other", "x_c=1.2",
                   "--out", str(tmp_path)])
    assert rc == 0
    assert (tmp_path / "path_rows.csv").is_file() and (tmp_path / "aligned_rho.ppm").is_file()


def test_align_rejects_unknown_parameter(tmp_path):
    assert cli.main(["align", "--problem", "sod", "--other", "gamma=1.3", "--out", str(tmp_path)]) == 2


def test_snapshot_round_trip(tmp_path):
    prob = get_problem("shu-osher")
    grid = prob.grid((51,))
    s = build_truth(prob, grid)
    io.write_snapshot(tmp_path / "s.csv", s, GAS)
    back = io.load_snapshot(tmp_path / "s.csv", grid, GAS)
    assert np.allclose(back.q, s.q, rtol=1e-15, atol=0)
    header, _ = io.read_table(tmp_path / "s.csv")
    assert header == ["x", "rho", "u", "E", "p", "s"]


def test_snapshot_round_trip_2d(tmp_path):
    prob = get_problem("blast2d")
    grid = prob.grid((9, 7))
    s = build_truth(prob, grid)
    io.write_snapshot(tmp_path / "s.csv", s, GAS)
    assert np.array_equal(io.load_snapshot(tmp_path / "s.csv", grid, GAS).q, s.q)


def test_float_format_round_trips(tmp_path):
    vals = np.array([0.1, 1 / 3, np.pi * 1e-300, 2.0 ** 52 + 1])
    io.write_table(tmp_path / "t.csv", ["v"], [vals])
    assert np.array_equal(io.read_table(tmp_path / "t.csv")[1][:, 0], vals)


def test_ppm(tmp_path):
    field = np.zeros((4, 3))
    field[3, 2] = 1.0
    io.write_ppm(tmp_path / "f.ppm", field)
    raw = (tmp_path / "f.ppm").read_bytes()
    head = b"P6\n4 3\n255\n"
    assert raw.startswith(head)
    pix = np.frombuffer(raw[len(head):], dtype=np.uint8).reshape(3, 4, 3)
    # top-right pixel is the largest x and y
    assert pix[0, 3, 0] == 255 and pix.sum() == 3 * 255


def _kernel_fingerprint(env):
    code = (
        "import numpy as np, fpetpf._accel as a\n"
        "from fpetpf.euler import GasConstants, advance\n"
        "from fpetpf.harness.problems import get_problem, build_truth\n"
        "from fpetpf.dtw import dtw_1d\n"
        "p = get_problem('sod'); s = advance(build_truth(p, p.grid((101,))), 0.05, GasConstants())\n"
        "r = dtw_1d(s.rho, s.rho[::-1])\n"
        "print(a.HAVE_NUMBA, repr(float(s.q.sum())), repr(float(r.distance)), len(r.pairs))\n"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return out.stdout.split()


def test_numpy_fallback_matches():
    base = {k: v for k, v in os.environ.items() if k != "FPETPF_DISABLE_NUMBA"}
    off = _kernel_fingerprint({**base, "FPETPF_DISABLE_NUMBA": "1"})
    on = _kernel_fingerprint(base)
    assert off[0] == "False"
    assert off[1:] == on[1:]
