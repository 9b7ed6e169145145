import csv
import io
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

from lgspdc.cli import COLUMNS, _join_negative_values, run

HERE = Path(__file__).parent
GOLDEN = HERE / "golden"
SIXPS = str(HERE / "data" / "sixps.pump")
SIX_INLINE = "0.65,60;1.85,120;1.06,180;0.54,240;1.53,300;1.24,360"

# Plot data with no published numbers to compare against; regenerate with
# LGSPDC_REGEN_GOLDEN=1 after a deliberate, verified change.
RECIPES = {
    "gaussian_slices.csv": ["scan", "--pump", "0,0", "--gamma-grid", "1:3:1"],
    **{f"lg2_pump_pp{pp}.csv": ["scan", "--pump", f"2,{pp}", "--gamma-grid", "0.5:3:0.5"] for pp in range(4)},
    **{f"lg2p2_pump_radial{q}.csv": ["scan", "--pump", "2,2", "--p-family", f"{q},{q}", "--gamma-grid", "0.5:3:0.5"]
       for q in range(4)},
    "six_vortex_scan.csv": ["scan", "--pump-file", SIXPS, "--gamma-grid", "0.5:3:0.5"],
}


def invoke(args, capsys):
    code = run(args)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_amplitude_example(capsys):
    code, out, err = invoke(["amplitude", "--pump", "0,0", "--signal", "1,0", "--idler", "-1,0", "--gamma", "1"],
                            capsys)
    assert code == 0
    (row,) = rows(out)
    assert out.splitlines()[0] == ",".join(COLUMNS)
    assert float(row["amplitude_re"]) == pytest.approx(0.3546154, abs=1e-7)
    assert row["ell_i"] == "-1"
    assert "# path=gaussian_pump" in err


def test_amplitude_general_path_flag(capsys):
    code, out, err = invoke(["amplitude", "--pump", "0,0", "--signal", "1,0", "--idler", "-1,0", "--path", "general"],
                            capsys)
    assert code == 0 and "# path=general" in err
    assert float(rows(out)[0]["amplitude_re"]) == pytest.approx(0.3546154, abs=1e-7)


def test_spectrum_normalisation(capsys):
    code, out, err = invoke(["spectrum", "--pump", "0,0", "--gamma", "1", "--ell-window", "-15:15"], capsys)
    assert code == 0
    data = rows(out)
    assert len(data) == 31
    outside = float(next(l for l in err.splitlines() if l.startswith("# outside_window_mass=")).split("=")[1])
    assert math.fsum(float(r["probability"]) for r in data) + outside == pytest.approx(1.0, abs=1e-9)


def test_spectrum_json(capsys):
    code, out, _ = invoke(["spectrum", "--pump", "2,1", "--gamma-s", "1.5", "--gamma-i", "2",
                           "--ell-window", "-2:2", "--p-family", "0,0;1,1", "--format", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["columns"] == list(COLUMNS)
    assert len(doc["rows"]) == 10
    assert doc["meta"]["ell_support"].count(":") == 1


def test_equalize_from_file(capsys):
    code, out, err = invoke(["equalize", "--pump-file", SIXPS, "--states", "0,0;1,1;2,2;3,3",
                             "--interval", "0.3:3", "--mode", "paper"], capsys)
    assert code == 0
    roots = sorted({float(r["gamma_s"]) for r in rows(out)})
    assert len(roots) == 2
    assert roots[0] == pytest.approx(0.5, abs=0.05) and roots[1] == pytest.approx(1.0, abs=0.05)


def test_equalize_strict_no_roots(capsys):
    code, out, err = invoke(["equalize", "--singularities", SIX_INLINE, "--states", "0,0;1,1;2,2;3,3",
                             "--step", "0.05"], capsys)
    assert code == 0
    assert out.strip() == ",".join(COLUMNS)
    assert "# roots=\n" in err


def test_decompose_round_trips_through_pump_file(tmp_path, capsys):
    code, out, _ = invoke(["decompose", "--pump-file", SIXPS], capsys)
    assert code == 0 and out.startswith("type: superposition")
    path = tmp_path / "lg.pump"
    path.write_text(out)
    a = invoke(["scan", "--pump-file", str(path), "--gamma-grid", "1", "--states", "0,0;1,1"], capsys)[1]
    b = invoke(["scan", "--pump-file", SIXPS, "--gamma-grid", "1", "--states", "0,0;1,1"], capsys)[1]
    for ra, rb in zip(rows(a), rows(b)):
        assert float(ra["probability"]) == pytest.approx(float(rb["probability"]), rel=1e-12)


def test_decompose_json(capsys):
    code, out, _ = invoke(["decompose", "--singularities", "0,0", "--format", "json"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["modes"] == [[1, 0, 1.0, 0.0]]


def test_oracle_check(capsys):
    code, out, err = invoke(["oracle-check", "--pump", "2,1", "--gamma-s", "0.5", "--gamma-i", "3",
                             "--ell-window", "-3:3", "--p-max", "2"], capsys)
    assert code == 0
    assert "# status=ok" in err
    data = rows(out)
    assert len(data) == 7 * 9 and all(r["ok"] == "1" for r in data)


def test_scan_with_ratio_and_states(capsys):
    code, out, _ = invoke(["scan", "--pump", "2,0", "--gamma-grid", "1,2", "--gamma-ratio", "2",
                           "--states", "0,2;1,1"], capsys)
    assert code == 0
    data = rows(out)
    assert [(r["gamma_s"], r["gamma_i"]) for r in data] == [("1", "2"), ("1", "2"), ("2", "4"), ("2", "4")]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "o.csv"
    code, out, _ = invoke(["spectrum", "--pump", "0,0", "--out", str(target)], capsys)
    assert code == 0 and out == ""
    assert len(rows(target.read_text())) == 31


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["amplitude", "--pump", "0,0", "--signal", "1,0"],
    ["amplitude", "--pump", "0,0", "--pump-file", SIXPS, "--signal", "1,0", "--idler", "-1,0"],
    ["amplitude", "--pump", "0,-1", "--signal", "1,0", "--idler", "-1,0"],
    ["amplitude", "--pump", "0,0", "--signal", "1,0", "--idler", "-1,0", "--gamma", "-2"],
    ["amplitude", "--pump", "0,0", "--signal", "1,0", "--idler", "-1,0", "--gamma", "1", "--gamma-s", "2"],
    ["spectrum", "--pump-file", "/no/such/file.pump"],
    ["spectrum", "--pump", "0,0", "--ell-window", "5:-5"],
    ["scan", "--pump", "0,0", "--gamma-grid", "3:1:0.5"],
    ["equalize", "--pump", "0,0", "--states", "0,0"],
    ["oracle-check", "--singularities", SIX_INLINE],
    ["spectrum", "--pump", "0,0", "--format", "xml"],
])
def test_usage_errors_exit_1(argv, capsys):
    code, out, err = invoke(argv, capsys)
    assert code == 1
    assert out == ""
    assert err


def test_bad_pump_file_contents_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.pump"
    path.write_text("type: superposition\n0,0,0,0\n")
    assert invoke(["spectrum", "--pump-file", str(path)], capsys)[0] == 1


def test_numeric_error_exit_2(monkeypatch, capsys):
    import lgspdc.cli as cli
    from lgspdc.errors import NonConvergentSpectrumError

    def fail(*a, **k):
        raise NonConvergentSpectrumError("tail too heavy")

    monkeypatch.setattr(cli, "spiral_spectrum", fail)
    code, out, err = invoke(["spectrum", "--pump", "0,0"], capsys)
    assert code == 2 and "tail too heavy" in err and out == ""


def test_help_exits_0(capsys):
    assert run(["--help"]) == 0


def test_negative_value_gluing():
    assert _join_negative_values(["--idler", "-1,0", "--gamma", "2", "-h"]) == ["--idler=-1,0", "--gamma", "2", "-h"]
    assert _join_negative_values(["--ell-window", "-15:15"]) == ["--ell-window=-15:15"]


def test_parallel_scan_byte_identical(capsys):
    args = ["scan", "--pump", "2,1", "--gamma-grid", "0.5:3:0.5"]
    serial = invoke(args, capsys)[1]
    parallel = invoke(args + ["--jobs", "3"], capsys)[1]
    assert serial == parallel


def test_console_script_runs():
    proc = subprocess.run([sys.executable, "-m", "lgspdc", "amplitude", "--pump", "1,0", "--signal", "1,0",
                           "--idler", "0,0"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "0.354615360357" in proc.stdout


@pytest.mark.parametrize("name", sorted(RECIPES))
def test_golden(name, capsys):
    code, out, _ = invoke(RECIPES[name], capsys)
    assert code == 0
    path = GOLDEN / name
    if os.environ.get("LGSPDC_REGEN_GOLDEN"):
        path.write_text(out, encoding="utf-8", newline="")
    assert path.read_bytes() == out.encode("utf-8")
    again = invoke(RECIPES[name], capsys)[1]
    assert again == out
