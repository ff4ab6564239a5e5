"""CLI contract: outputs, determinism, exit codes, schemas."""

import json
import subprocess
import sys

import pytest

from gfflab.cli import bundled_fixture_path, main


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "gfflab.cli", *args], capture_output=True, text=True
    )
    return proc.returncode, proc.stdout, proc.stderr


def test_heatkernel_flat_quarter():
    code, out, _ = run_cli("heatkernel", "--T", "1", "--gamma", "0", "--size", "8", "--deterministic")
    assert code == 0
    assert json.loads(out)["p_return"] == pytest.approx(0.25)


def test_resistance_bundled_fixture():
    code, out, _ = run_cli(
        "resistance", "--network", str(bundled_fixture_path()),
        "--source", "0,0", "--target", "1,0", "--deterministic",
    )
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(0.75, rel=1e-9)


def test_sample_determinism_and_pinned_origin(tmp_path):
    f1 = tmp_path / "a.csv"
    f2 = tmp_path / "b.csv"
    for f in (f1, f2):
        code, _, _ = run_cli("sample", "--size", "8", "--kind", "dgff", "--seed", "7", "--out", str(f), "--deterministic")
        assert code == 0
    assert f1.read_bytes() == f2.read_bytes()

    p = tmp_path / "p.csv"
    code, _, _ = run_cli("sample", "--size", "4", "--kind", "pinned", "--seed", "3", "--out", str(p), "--deterministic")
    assert code == 0
    rows = {tuple(line.split(",")[:2]): line.split(",")[2] for line in p.read_text().splitlines()[1:]}
    assert float(rows[("0", "0")]) == 0.0


def test_sample_size_zero_single_vertex(tmp_path):
    p = tmp_path / "z.csv"
    code, _, _ = run_cli("sample", "--size", "0", "--kind", "pinned", "--seed", "1", "--out", str(p))
    assert code == 0
    lines = p.read_text().splitlines()
    assert lines == ["x,y,value", "0,0,0.0"]


def test_scaling_volume_deterministic_slope():
    code, out, _ = run_cli(
        "scaling", "--quantity", "volume", "--gammas", "0", "--sizes", "8,16,32",
        "--replicas", "1", "--seed", "1", "--deterministic",
    )
    assert code == 0
    report = json.loads(out)["0"]
    assert report["slope"] == pytest.approx(2.0, abs=1e-9)


def test_walk_writes_traj_and_pgm(tmp_path):
    traj = tmp_path / "t.csv"
    pgm = tmp_path / "o.pgm"
    code, _, _ = run_cli(
        "walk", "--steps", "50", "--gamma", "0", "--size", "10", "--seed", "9",
        "--traj", str(traj), "--pgm", str(pgm), "--deterministic",
    )
    assert code == 0
    lines = traj.read_text().splitlines()
    assert lines[0] == "t,x,y"
    assert len(lines) == 52
    head = pgm.read_text().splitlines()
    assert head[0] == "P2"
    assert head[1] == "21 21"


def test_exit_codes():
    code, _, err = run_cli("resistance", "--network", "/nonexistent.csv")
    assert code == 2
    code, _, err = run_cli("resistance", "--gamma", "0.5")  # no source/target/boundary
    assert code == 4
    code, _, _ = run_cli("heatkernel", "--T", "2", "--gamma", "0.5")  # missing seed
    assert code == 4
    code, _, _ = run_cli("nonsense")
    assert code == 2


def test_schema_flag():
    for sub in ("sample", "resistance", "heatkernel", "exittime", "walk", "scaling", "crossing"):
        code, out, _ = run_cli(sub, "--schema")
        assert code == 0
        json.loads(out)


def test_crossing_subcommand(tmp_path):
    f = tmp_path / "f.csv"
    run_cli("sample", "--size", "8", "--kind", "dgff", "--seed", "2", "--out", str(f))
    code, out, _ = run_cli(
        "crossing", "--field", str(f), "--gamma", "0.5", "--rect", "17x17", "--deterministic"
    )
    assert code == 0
    payload = json.loads(out)
    assert "value_log" in payload

    code, out, _ = run_cli(
        "crossing", "--field", str(f), "--gamma", "0.5", "--rect", "17x17",
        "--restricted=-2,5", "--deterministic",
    )
    assert code == 0
    assert json.loads(out)["restricted"] == [-2, 5]


def test_exittime_subcommand():
    code, out, _ = run_cli("exittime", "--size", "2", "--gamma", "0", "--deterministic")
    assert code == 0
    payload = json.loads(out)
    assert payload["expected_exit_time"] > 0
    assert payload["residual_hitting_identity"] <= 1e-6


def test_currents_export(tmp_path):
    cur = tmp_path / "cur.csv"
    code, out, _ = run_cli(
        "resistance", "--network", str(bundled_fixture_path()),
        "--source", "0,0", "--target", "1,0", "--currents", str(cur), "--deterministic",
    )
    assert code == 0
    lines = cur.read_text().splitlines()
    assert lines[0] == "x1,y1,x2,y2,current"
    assert len(lines) == 5


def test_main_callable_inprocess(capsys):
    assert main(["heatkernel", "--T", "1", "--gamma", "0", "--size", "6", "--deterministic"]) == 0
    out = capsys.readouterr().out
    assert json.loads(out)["p_return"] == pytest.approx(0.25)
