"""Acceptance for the plotting package: all four figure kinds regenerate from
the bundled sample outputs with exit code 0 and the expected image dimensions."""

import struct
import subprocess
import sys
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


def png_size(path):
    raw = Path(path).read_bytes()
    assert raw[:8] == b"\x89PNG\r\n\x1a\n"
    w, h = struct.unpack(">II", raw[16:24])
    return w, h


def run_plot(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "plotkit.cli", *args], capture_output=True, text=True
    )
    return proc.returncode, proc.stdout, proc.stderr


def test_trajectory_panels(tmp_path):
    out = tmp_path / "traj.png"
    code, _, err = run_plot(
        "trajectory", str(DATA / "traj_flat.csv"), str(DATA / "traj_gamma.csv"),
        "--out", str(out), "--box", "30",
    )
    assert code == 0, err
    assert png_size(out) == (1200, 600)


def test_single_point_trajectory(tmp_path):
    one = tmp_path / "one.csv"
    one.write_text("t,x,y\n0,0,0\n")
    out = tmp_path / "one.png"
    code, _, err = run_plot("trajectory", str(one), "--out", str(out))
    assert code == 0, err
    assert png_size(out) == (600, 600)


def test_empty_trajectory_error_named_column(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("t,x,y\n")
    out = tmp_path / "never.png"
    code, _, err = run_plot("trajectory", str(empty), "--out", str(out))
    assert code != 0
    assert "'t'" in err
    assert not out.exists()


def test_bad_header_named_column(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("time,x,y\n0,0,0\n")
    code, _, err = run_plot("trajectory", str(bad), "--out", str(tmp_path / "x.png"))
    assert code != 0
    assert "'t'" in err


def test_current_heatmap(tmp_path):
    out = tmp_path / "cur.png"
    code, _, err = run_plot("current", str(DATA / "currents.csv"), "--out", str(out))
    assert code == 0, err
    assert png_size(out) == (600, 600)


def test_voltage_surface(tmp_path):
    out = tmp_path / "volt.png"
    code, _, err = run_plot("voltage", str(DATA / "phi.csv"), "--out", str(out))
    assert code == 0, err
    assert png_size(out) == (600, 600)


def test_scaling_figure_and_reference_slope(tmp_path):
    out = tmp_path / "scal.png"
    code, _, err = run_plot("scaling", str(DATA / "scaling_report.json"), "--out", str(out))
    assert code == 0, err
    assert png_size(out) == (700, 500)

    # metadata assertion: the fitted slope drawn equals the report's slope
    import json

    from plotkit.figures import plot_scaling

    rep = json.loads((DATA / "scaling_report.json").read_text())
    drawn = plot_scaling(DATA / "scaling_report.json", tmp_path / "again.png")
    assert drawn == pytest.approx(rep["slope"])


def test_all_bundled_inputs_plot_without_warnings(tmp_path):
    import warnings

    from plotkit.figures import plot_current, plot_scaling, plot_trajectory, plot_voltage

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        plot_trajectory([DATA / "traj_flat.csv"], tmp_path / "a.png")
        plot_current(DATA / "currents.csv", tmp_path / "b.png")
        plot_voltage(DATA / "phi.csv", tmp_path / "c.png")
        plot_scaling(DATA / "scaling_report.json", tmp_path / "d.png")


def test_criterion_15_all_four_kinds(tmp_path):
    results = {}
    for kind, inputs, size in [
        ("trajectory", [str(DATA / "traj_flat.csv")], (600, 600)),
        ("current", [str(DATA / "currents.csv")], (600, 600)),
        ("voltage", [str(DATA / "phi.csv")], (600, 600)),
        ("scaling", [str(DATA / "scaling_report.json")], (700, 500)),
    ]:
        out = tmp_path / f"{kind}.png"
        code, _, err = run_plot(kind, *inputs, "--out", str(out))
        results[kind] = (code, png_size(out) if code == 0 else None, size)
    ok = all(code == 0 and got == want for code, got, want in results.values())
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion 15: figure kinds {results}")
    assert ok
