import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from fluxring import io
from fluxring.analysis import scan_flux
from fluxring.cli import main
from fluxring.model import RingModel, Sector


def _meta():
    return io.Metadata("scan", {"system": {"L": 5}}, 3, {"set_tol": 1e-4})


def test_curve_csv_round_trip(tmp_path):
    m = RingModel.build(5, 1.0, [0, np.inf, 1, 2, 3])
    curve = scan_flux(m, Sector.of(m, 2, 1), 60)
    p = tmp_path / "c.csv"
    io.write_curve_csv(p, curve, _meta())
    back, meta = io.read_curve_csv(p)
    assert meta.seed == 3 and meta.config_hash == _meta().config_hash
    assert back.sector == curve.sector and back.method == curve.method
    assert np.max(np.abs(back.grid - curve.grid)) <= 1e-12
    assert np.max(np.abs(back.energies - curve.energies)) <= 1e-12
    for a, b in zip(back.minimizers + back.maximizers, curve.minimizers + curve.maximizers):
        assert abs(a.phi - b.phi) <= 1e-12 and abs(a.energy - b.energy) <= 1e-12
    assert back.period_estimate == curve.period_estimate


def test_metadata_header_fields(tmp_path):
    text = io.curve_to_csv(scan_flux(RingModel.uniform(3), Sector(3, 1, 0), 16), _meta())
    header = json.loads(text.splitlines()[0].partition(": ")[2])
    for key in ("config_hash", "seed", "tolerances", "version", "timestamp"):
        assert key in header


def test_config_hash_is_stable():
    assert io.config_hash({"a": 1, "b": [1, 2]}) == io.config_hash({"b": [1, 2], "a": 1})
    assert io.config_hash({"a": 1}) != io.config_hash({"a": 2})


def _run(*args):
    return subprocess.run([sys.executable, "-m", "fluxring.cli", *args], capture_output=True, text=True)


def test_cli_verify_theorem(tmp_path):
    out = tmp_path / "rep.json"
    r = _run("verify-theorem", "--L", "6", "--ne", "4", "--random-couplings", "--seed", "7", "--out", str(out),
             "--workers", "1")
    assert r.returncode == 0, r.stderr
    rep = json.loads(out.read_text())
    assert rep["pass"] and rep["metadata"]["seed"] == 7
    check = rep["checks"][0]
    assert {"name", "predicted", "measured", "tolerance", "pass"} <= set(check)


def test_cli_scan_csv(tmp_path):
    out = tmp_path / "curve.csv"
    r = _run("scan", "--L", "4", "--ne", "3", "--t", "1", "--U", "0", "--out", str(out), "--workers", "1")
    assert r.returncode == 0, r.stderr
    body = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")]
    rows = list(csv.reader(body))
    assert rows[0] == ["phi", "energy", "sector", "method"]
    assert all(len(r) == 4 for r in rows)
    curve, _ = io.read_curve_csv(out)
    target = 4 * math.asin(1 / math.sqrt(5))
    assert sorted(curve.minimizer_phis) == pytest.approx([target, 2 * math.pi - target], abs=1e-4)


def test_cli_graph(tmp_path):
    stem = tmp_path / "g"
    r = _run("graph", "--L", "4", "--nup", "2", "--ndown", "2", "--phi", "3.14159265", "--out", str(stem))
    assert r.returncode == 0, r.stderr
    rep = json.loads((tmp_path / "g.cycles.json").read_text())
    assert rep["max_psi_deviation"] < 1e-10
    assert all(min(c["flux"], 2 * math.pi - c["flux"]) < 1e-7 for c in rep["fundamental_cycles"])
    assert (tmp_path / "g.dot").read_text().startswith("//")


def test_cli_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("system:\n  L: 5\n  t: [1, 1.5, 0.7, 1, 1.2]\n  U: inf\nsector:\n  n_up: 2\n  n_down: 2\n"
                   "scan:\n  grid: 80\n")
    out = tmp_path / "r.json"
    assert main(["verify-theorem", "--config", str(cfg), "--out", str(out), "--workers", "1"]) == 0
    rep = json.loads(out.read_text())
    assert rep["metadata"]["config"]["system"]["U"] == "inf"
    # flag overrides the file: finite U, odd L, N_e = 4 predicts 0
    assert main(["verify-theorem", "--config", str(cfg), "--U", "2", "--out", str(out), "--workers", "1"]) == 0
    assert json.loads(out.read_text())["checks"][0]["predicted"] == [0.0]


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["scan", "--L", "4", "--U", "oops", "--ne", "2"]) == 1
    assert "system.U" in capsys.readouterr().err
    bad = tmp_path / "bad.yaml"
    bad.write_text("system:\n  L: 4\n  colour: red\n")
    assert main(["scan", "--config", str(bad), "--ne", "2"]) == 1
    assert "colour" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1
    # a failing check exits with 2: with five infinite sites E(0) != E(pi)
    assert main(["verify-theorem", "--L", "6", "--nup", "2", "--ndown", "2", "--U", "1,inf,inf,inf,inf,inf",
                 "--workers", "1"]) == 2


def test_cli_other_commands(tmp_path):
    assert main(["gauge-check", "--L", "5", "--nup", "2", "--ndown", "1", "--phi", "0.8", "--random-couplings"]) == 0
    assert main(["oracle", "--L", "6", "--nup", "2", "--ndown", "2", "--table", str(tmp_path / "o.csv")]) == 0
    assert main(["oracle", "--L", "6", "--ne", "4", "--U", "1"]) == 1
    assert main(["spin", "--L", "8", "--ne", "6", "--U", "inf", "--phi", str(math.pi),
                 "--out", str(tmp_path / "s.json")]) == 0
    assert 3.0 in json.loads((tmp_path / "s.json").read_text())["ground_spins"]
    assert main(["verify-remarks", "--select", "3", "--out", str(tmp_path / "r.json")]) == 0
    assert main(["scan", "--L", "4", "--ne", "2", "--grid", "32", "--out", str(tmp_path / "x.csv"),
                 "--dump-basis", str(tmp_path / "b.csv"), "--dump-matrix", str(tmp_path / "h.txt"),
                 "--workers", "1"]) == 0
    assert (tmp_path / "b.csv").read_text().startswith("index,up_mask,down_mask")
    assert (tmp_path / "h.txt").exists()


def test_exploratory_odd_filling_scan(tmp_path):
    # odd N_e at finite U: the curve is produced, no verdict is attached
    assert main(["scan", "--L", "5", "--ne", "3", "--U", "4", "--out", str(tmp_path / "odd.csv"),
                 "--workers", "1"]) == 0
