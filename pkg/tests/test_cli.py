import json
import math
import subprocess
import sys

import numpy as np
import pytest

from qslkit import cli
from qslkit.modelio import files

DEPHASING = "dimension = 2\nchannel = sx\nstate = 1, 0\nlambda = 0.1\n"
BELL_STATES = """\
state Phi+ = sqrt(0.5), 0, 0, sqrt(0.5)
state Phi- = sqrt(0.5), 0, 0, -sqrt(0.5)
state Psi+ = 0, sqrt(0.5), sqrt(0.5), 0
state Psi- = 0, sqrt(0.5), -sqrt(0.5), 0
"""
BELL_MODEL = "dimension = 4\nchannel = coll_sm(2)\nstate = 0, sqrt(0.5), -sqrt(0.5), 0\n"
QUBIT_ENGINEERING = "dimension = 2\nchannel = sm\nstate = 0.5, sqrt(3)/2\n"


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "deph.model").write_text(DEPHASING)
    (tmp_path / "bell.model").write_text(BELL_MODEL)
    (tmp_path / "bell.states").write_text(BELL_STATES)
    (tmp_path / "qe.model").write_text(QUBIT_ENGINEERING)
    return tmp_path


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_qsl_human_and_json(workdir, capsys):
    code, out, _ = run(capsys, "qsl", "--model", "deph.model", "--lambda", "0.1")
    assert code == 0
    assert "T*     = 0.008839222" in out and "T_DC   = 0.007071068" in out
    code, out, _ = run(capsys, "qsl", "--model", "deph.model", "--lambda", "0.1", "--json")
    data = json.loads(out)
    assert data["t_star"] == pytest.approx(0.0088393, abs=1e-7)


def test_qsl_theta_and_default_lambda(workdir, capsys):
    _, a, _ = run(capsys, "qsl", "--model", "deph.model", "--theta", str(math.acos(1 - 0.01)), "--json")
    _, b, _ = run(capsys, "qsl", "--model", "deph.model", "--json")
    assert json.loads(a)["t_star"] == pytest.approx(json.loads(b)["t_star"], rel=1e-9)


def test_qsl_stationary(workdir, capsys):
    code, out, _ = run(capsys, "qsl", "--model", "bell.model", "--lambda", "0.2")
    assert code == 0 and "T* = infinity (stationary)" in out.replace("T*     =", "T* =")


def test_exit_codes(workdir, capsys):
    assert run(capsys, "qsl", "--model", "deph.model", "--lambda", "1.5")[0] == cli.EXIT_DOMAIN
    (workdir / "bad.model").write_text("dimension = 2\nchannel = sx +\nstate = 1, 0\n")
    code, _, err = run(capsys, "qsl", "--model", "bad.model", "--lambda", "0.1")
    assert code == cli.EXIT_MODEL and "^" in err
    assert run(capsys, "qsl", "--model", "missing.model", "--lambda", "0.1")[0] == cli.EXIT_MODEL
    (workdir / "wild.model").write_text("dimension = 2\nhamiltonian = 1e300*sz\nchannel = 1e160*sx\nstate = sqrt(0.5), sqrt(0.5)\n")
    code, _, err = run(capsys, "simulate", "--model", "wild.model", "--tmax", "1", "--step", "0.5")
    assert code == cli.EXIT_NUMERIC


def test_optimize(workdir, capsys):
    code, out, _ = run(capsys, "optimize", "--model", "qe.model")
    assert code == 0
    assert "u = [0, -0.1082532, 0]" in out and "nullspace dimension = 1" in out
    code, out, _ = run(capsys, "optimize", "--model", "qe.model", "--json", "--report", "opt.json")
    data = json.loads(out)
    assert data["u"][1] == pytest.approx(-math.sqrt(3) / 16, abs=1e-12)
    assert data["amplitude_after"] < data["amplitude_before"]
    assert json.loads((workdir / "opt.json").read_text()) == data


def test_optimize_residual_exit(workdir, capsys, monkeypatch):
    monkeypatch.setattr(cli, "RESIDUAL_TOL", -1.0)
    assert run(capsys, "optimize", "--model", "qe.model")[0] == cli.EXIT_RESIDUAL


def test_escape(workdir, capsys):
    code, out, _ = run(capsys, "escape", "--model", "deph.model", "--lambda", "0.1")
    assert code == 0 and out.startswith("T = 0.01010135")
    code, out, _ = run(capsys, "escape", "--model", "bell.model", "--lambda", "0.1", "--tmax", "2")
    assert "not escaped within tmax = 2" in out
    _, out, _ = run(capsys, "escape", "--model", "deph.model", "--lambda", "0.1", "--json")
    data = json.loads(out)
    assert data["bound_holds"] and data["time"] == pytest.approx(-0.5 * math.log(0.98), abs=1e-9)


def test_rank_bell_states(workdir, capsys):
    code, out, _ = run(capsys, "rank", "--model", "bell.model", "--states", "bell.states", "--lambda", "0.1")
    assert code == 0
    labels = [line.split()[1] for line in out.splitlines()]
    assert labels == ["Psi-", "Phi+", "Phi-", "Psi+"]


def test_ratio_grid(workdir, capsys):
    code, _, _ = run(capsys, "ratio-grid", "--kmax", "0.5", "--lmax", "1", "--n", "10", "--out", "g.csv")
    assert code == 0
    cols = files.read_csv(workdir / "g.csv")
    assert list(cols) == ["k", "lambda", "ratio"] and len(cols["k"]) == 100
    rows = list(zip(*cols.values()))
    assert ("0.5", "0.1", "1.250055") in rows
    assert run(capsys, "ratio-grid", "--kmax", "0.9")[0] == cli.EXIT_DOMAIN


def test_simulate_three_runs(workdir, capsys):
    code, out, _ = run(
        capsys, "simulate", "--model", "qe.model", "--tmax", "10",
        "--hamiltonian", "opt", "--hamiltonian", "0", "--hamiltonian", "sz", "--out", "sim.csv",
    )
    assert code == 0
    cols = files.read_csv(workdir / "sim.csv")
    assert list(cols) == ["time", "overlap[opt]", "overlap[0]", "overlap[sz]"]
    mins = {k: min(map(float, v)) for k, v in cols.items() if k != "time"}
    assert mins["overlap[opt]"] > 0.9 and mins["overlap[0]"] < 0.9 and mins["overlap[sz]"] < 0.9


def test_scan_gamma_and_theta(workdir, capsys):
    code, out, _ = run(capsys, "scan", "--model", "deph.model", "--param", "gamma", "--range", "0.5:2:4")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "gamma,amplitude,excess,k,t_star,t_dc,ratio" and len(lines) == 5
    code, out, _ = run(capsys, "scan", "--model", "deph.model", "--param", "theta", "--range", "0:1.5:3", "--json")
    assert len(json.loads(out)["t_star"]) == 3
    assert run(capsys, "scan", "--model", "deph.model", "--param", "lambda", "--range", "0:1:3")[0] == cli.EXIT_DOMAIN
    assert run(capsys, "scan", "--model", "deph.model", "--param", "gamma", "--range", "1:2")[0] == cli.EXIT_DOMAIN


def test_ensemble_scaling(workdir, capsys):
    code, out, err = run(capsys, "ensemble-scaling", "--nmax", "6", "--lambda", "0.1")
    assert code == 0
    assert out.splitlines()[0].startswith("N,A_product")
    assert "slope" in err
    assert run(capsys, "ensemble-scaling", "--nmax", "13", "--lambda", "0.1")[0] == cli.EXIT_DOMAIN


def test_scenario_export_round_trip(workdir, capsys):
    code, out, _ = run(capsys, "scenario", "bell-collective", "--write-model", "b.model")
    assert code == 0 and "wrote b-Psi-.model" in out
    code, out, _ = run(capsys, "qsl", "--model", "b-Psi+.model", "--lambda", "0.1", "--json")
    data = json.loads(out)
    assert (data["amplitude"], data["excess"]) == pytest.approx((4.0, 2.0))
    assert run(capsys, "scenario", "ensemble", "--omega", "1")[0] == cli.EXIT_DOMAIN


def test_outputs_are_byte_identical(workdir, capsys, monkeypatch):
    argv = ["ratio-grid", "--n", "20", "--out"]
    run(capsys, *argv, "a.csv")
    monkeypatch.setenv("QSLKIT_THREADS", "4")
    run(capsys, *argv, "b.csv")
    assert (workdir / "a.csv").read_bytes() == (workdir / "b.csv").read_bytes()
    _, first, _ = run(capsys, "scan", "--model", "deph.model", "--param", "lambda", "--range", "0.1:1:7")
    monkeypatch.setenv("QSLKIT_THREADS", "1")
    _, second, _ = run(capsys, "scan", "--model", "deph.model", "--param", "lambda", "--range", "0.1:1:7")
    assert first == second


def test_plots_are_written(workdir, capsys):
    pytest.importorskip("matplotlib")
    assert run(capsys, "ratio-grid", "--n", "10", "--out", "g.csv", "--plot", "g.png")[0] == 0
    assert run(capsys, "simulate", "--model", "deph.model", "--tmax", "1", "--out", "s.csv", "--plot", "s.png")[0] == 0
    for name in ("g.png", "s.png"):
        assert (workdir / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_console_entry_point(workdir):
    proc = subprocess.run(
        [sys.executable, "-m", "qslkit", "qsl", "--model", "deph.model", "--lambda", "2"],
        capture_output=True, text=True,
    )
    assert proc.returncode == cli.EXIT_DOMAIN and "lambda" in proc.stderr


def test_parallel_map_keeps_order(monkeypatch):
    monkeypatch.setenv("QSLKIT_THREADS", "8")
    assert cli._map(lambda x: x * x, range(50)) == [x * x for x in range(50)]
    monkeypatch.setenv("QSLKIT_THREADS", "nonsense")
    assert cli._threads() == 1
    assert np.isclose(cli._slope([1, 2, 4], [1, 0.5, 0.25]), -1.0)
