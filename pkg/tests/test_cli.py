import csv
import json

from flatheat.cli import main

FAST_PLAN = ["--s", "1.6", "--tau", "0.3", "--rprime", "0.2",
             "--imax", "12", "--kmax", "20", "--nmax", "10"]


def test_plan_command(tmp_path, capsys):
    out_csv = tmp_path / "control.csv"
    out_json = tmp_path / "summary.json"
    code = main(["plan", "--profile", "step", *FAST_PLAN,
                 "--grid", "101", "--norm-grid", "201",
                 "--out-control", str(out_csv), "--out-summary", str(out_json)])
    assert code == 0
    payload = json.loads(out_json.read_text())
    assert payload["plan"]["s"] == 1.6
    assert payload["l2"] > 0
    rows = list(csv.reader(out_csv.open()))
    assert rows[0] == ["t", "u"]
    assert len(rows) == 102
    # round-trip exact formatting
    assert repr(float(rows[5][1])) == rows[5][1]


def test_simulate_command(tmp_path):
    out_csv = tmp_path / "traj.csv"
    out_json = tmp_path / "sim.json"
    code = main(["simulate", "--profile", "step", *FAST_PLAN,
                 "--nx", "32", "--dt", "1e-3", "--save-stride", "50",
                 "--csv-stride", "2",
                 "--out-trajectory", str(out_csv), "--out-summary", str(out_json)])
    assert code == 0
    payload = json.loads(out_json.read_text())
    assert payload["solver"]["nx"] == 32
    assert "terminal_linf" in payload and "max_gap" in payload


def test_sweep_command(tmp_path):
    out_points = tmp_path / "points.csv"
    out_fit = tmp_path / "fit.json"
    code = main(["sweep", "--profile", "step", *FAST_PLAN,
                 "--precision", "extended",
                 "--vary", "k_max", "--values", "10,14,18,22",
                 "--out-points", str(out_points), "--out-fit", str(out_fit)])
    assert code == 0
    payload = json.loads(out_fit.read_text())
    assert payload["vary"] == "k_max"
    assert payload["r_squared"] > 0.5


def test_tables_command(tmp_path, capsys):
    out_csv = tmp_path / "tables.csv"
    code = main(["tables", "--s-list", "1.6", "--r-list", "0.2,0.25",
                 "--tau", "0.3", "--imax", "12", "--kmax", "20", "--nmax", "10",
                 "--norm-grid", "201", "--out-csv", str(out_csv)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "control L2 norm" in printed
    rows = list(csv.reader(out_csv.open()))
    assert len(rows) == 3


def test_figures_command(tmp_path):
    code = main(["figures", "--profile", "step", *FAST_PLAN,
                 "--outdir", str(tmp_path / "figs")])
    assert code == 0
    assert (tmp_path / "figs" / "state_surface.csv").exists()
    assert (tmp_path / "figs" / "control_trace.csv").exists()


def test_invalid_config_yields_error_json(capsys):
    code = main(["plan", "--profile", "step", "--s", "2.5"])
    assert code == 1
    err = capsys.readouterr().err
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["error"] == "ValueError"
    assert "s" in payload["message"]


def test_unknown_argument_yields_error_json(capsys):
    code = main(["plan", "--nonsense", "1"])
    assert code == 1
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert payload["error"] == "ValueError"


def test_bad_profile_file_yields_error_json(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    code = main(["plan", "--profile", str(missing)])
    assert code == 1
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert payload["error"] == "FileNotFoundError"
