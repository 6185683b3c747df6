import csv
import json
import math

import numpy as np
import pytest

import flatheat as fh
from flatheat.bench import (render_tables_text, write_sweep_fit_json,
                            write_sweep_points_csv, write_tables_csv)

TAU, RP = 0.3, 0.2


@pytest.fixture(scope="module")
def base_extended():
    return fh.FlatnessPlanner(s=1.6, tau=TAU, r_prime=RP, horizon=TAU + RP,
                              precision="extended")


@pytest.fixture(scope="module")
def k_sweep_fit(base_extended, step_profile):
    spec = fh.SweepSpec(vary="k_max", values=[10, 14, 18, 22, 26],
                        base=base_extended, profile=step_profile)
    return fh.sweep(spec)


def test_sweep_spec_validation(base_extended, step_profile):
    with pytest.raises(ValueError):
        fh.SweepSpec(vary="tau", values=[1, 2, 3, 4], base=base_extended,
                     profile=step_profile)
    with pytest.raises(ValueError):
        fh.SweepSpec(vary="k_max", values=[1, 2, 3], base=base_extended,
                     profile=step_profile)
    with pytest.raises(ValueError):
        fh.SweepSpec(vary="k_max", values=[4, 4, 5, 6], base=base_extended,
                     profile=step_profile)


def test_seed_series_sweep_rate_and_quality(k_sweep_fit):
    # tail of the seed series shrinks like (R'/tau)^k: fitted rate must stay
    # below ln(tau/R') and the log-linear fit must be tight
    assert k_sweep_fit.r_squared >= 0.9
    assert 0.0 < k_sweep_fit.rate <= math.log(TAU / RP)
    assert k_sweep_fit.c2_hat == k_sweep_fit.rate
    assert k_sweep_fit.c1_hat is None and k_sweep_fit.c3_hat is None


def test_sweep_errors_positive_finite_nonincreasing(k_sweep_fit):
    errs = np.asarray(k_sweep_fit.errors)
    assert np.all(errs > 0) and np.all(np.isfinite(errs))
    assert np.all(np.diff(errs[1:]) <= 0)


def test_mode_count_sweep_above_the_seed_peak(step_profile):
    # the n^2-decay regime only starts past the seed integrand's peak mode
    # n* = sqrt(k_max/(pi^2 tau)); tau = 0.05 keeps several usable points
    # (only odd values: even modes of the step vanish)
    base = fh.FlatnessPlanner(s=1.6, tau=0.05, r_prime=0.05, horizon=0.1,
                              i_max=20, k_max=10, n_max=30, precision="extended")
    fit = fh.sweep(fh.SweepSpec(vary="n_max", values=[5, 7, 9, 11],
                                base=base, profile=step_profile))
    assert fit.r_squared >= 0.9
    assert 0.0 < fit.rate <= math.pi ** 2 * 0.05
    assert fit.c3_hat == fit.rate


def test_derivative_order_sweep(base_extended, step_profile):
    fit = fh.sweep(fh.SweepSpec(vary="i_max", values=[8, 10, 12, 14, 16, 18],
                                base=base_extended, profile=step_profile))
    assert fit.r_squared >= 0.9
    assert fit.rate > 0
    errs = np.asarray(fit.errors)
    assert np.all(np.diff(errs[1:]) <= 0)


def test_sweep_degenerate_when_all_points_converged(base_extended, step_profile):
    with pytest.raises(fh.FitDegenerateError):
        fh.sweep(fh.SweepSpec(vary="n_max", values=[20, 22, 24, 26],
                              base=base_extended, profile=step_profile))


def test_sweep_output_files(tmp_path, k_sweep_fit):
    points = tmp_path / "points.csv"
    fit_json = tmp_path / "fit.json"
    write_sweep_points_csv(k_sweep_fit, points)
    write_sweep_fit_json(k_sweep_fit, fit_json)
    rows = list(csv.reader(points.open()))
    assert rows[0] == ["k_max", "sup_error"]
    assert len(rows) == 6
    payload = json.loads(fit_json.read_text())
    assert payload["vary"] == "k_max"
    assert payload["rate"] == k_sweep_fit.rate


# ------------------------------------------------------------------ tables

@pytest.fixture(scope="module")
def small_table(step_profile):
    base = fh.FlatnessPlanner(tau=TAU, precision="extended")
    return fh.reproduce_tables([1.6, 1.8], [0.2, 0.25], base, grid_points=2001)


def test_tables_cells_and_ordering(small_table):
    keys = [(r["s"], r["r_prime"]) for r in small_table]
    assert keys == [(1.6, 0.2), (1.6, 0.25), (1.8, 0.2), (1.8, 0.25)]
    assert all(r["error"] is None for r in small_table)


def test_tables_reference_cell_value(small_table):
    cell = small_table[0]
    assert cell["l2"] == pytest.approx(3.05313, rel=1e-3)
    assert cell["linf"] == pytest.approx(25.1509, rel=1e-3)
    assert cell["l2_unit_window"] == pytest.approx(cell["l2"] / math.sqrt(0.2))


def test_effort_decreases_with_longer_windows(small_table):
    by_key = {(r["s"], r["r_prime"]): r for r in small_table}
    assert by_key[(1.6, 0.2)]["l2"] > by_key[(1.6, 0.25)]["l2"]


def test_small_s_needs_more_effort_than_large_s(step_profile):
    base = fh.FlatnessPlanner(tau=TAU, precision="extended")
    records = fh.reproduce_tables([1.5, 1.8], [0.25], base, grid_points=1001)
    by_s = {r["s"]: r for r in records}
    assert by_s[1.5]["l2"] > by_s[1.8]["l2"]


def test_table_cell_failure_is_recorded_not_raised(step_profile):
    base = fh.FlatnessPlanner(tau=TAU)
    records = fh.reproduce_tables([2.5], [0.2], base, grid_points=101)
    assert len(records) == 1
    assert records[0]["error"] is not None
    assert records[0]["l2"] is None


def test_converged_cells_invariant_under_doubled_truncations(step_profile):
    # 3-significant-figure stability when i_max, k_max, n_max all double
    vals = {}
    for label, (im, km, nm) in {"base": (40, 60, 30), "double": (80, 120, 60)}.items():
        base = fh.FlatnessPlanner(tau=TAU, i_max=im, k_max=km, n_max=nm,
                                  precision="extended")
        recs = fh.reproduce_tables([1.6], [0.2], base, grid_points=2001)
        vals[label] = (recs[0]["l2"], recs[0]["linf"])
    assert vals["double"][0] == pytest.approx(vals["base"][0], rel=5e-4)
    assert vals["double"][1] == pytest.approx(vals["base"][1], rel=5e-4)


def test_render_and_csv(tmp_path, small_table):
    text = render_tables_text(small_table)
    assert "control L2 norm" in text and "1.6" in text
    path = tmp_path / "tables.csv"
    write_tables_csv(small_table, path)
    rows = list(csv.reader(path.open()))
    assert rows[0][:4] == ["s", "r_prime", "l2", "linf"]
    assert float(rows[1][2]) == small_table[0]["l2"]


# ------------------------------------------------------------------ traces

def test_figure_traces_consistency(tmp_path, step_planner):
    paths = fh.figure_traces(step_planner, tmp_path, surface_t=41, surface_x=21,
                             control_t=4001)
    rows = list(csv.reader(open(paths["control"])))
    assert rows[0] == ["t", "u", "l2_cumulative"]
    final_cum = float(rows[-1][2])
    l2, _ = step_planner.control_norms(4001)
    assert final_cum == pytest.approx(l2, rel=1e-6)

    surf = list(csv.reader(open(paths["surface"])))
    assert surf[0] == ["t", "x", "theta"]
    # value at (t=tau, x=0.25) agrees with the free evolution at the splice
    target = fh.free_state(step_planner.spectral_, TAU, 0.25)
    hits = [r for r in surf[1:]
            if abs(float(r[0]) - TAU) < 1e-9 and abs(float(r[1]) - 0.25) < 1e-9]
    assert hits and float(hits[0][2]) == pytest.approx(target, abs=1e-6)


def test_figure_traces_zero_profile(tmp_path):
    plan = fh.FlatnessPlanner().fit(fh.ConstantProfile(0.0))
    paths = fh.figure_traces(plan, tmp_path, surface_t=11, surface_x=5,
                             control_t=101)
    for key in ("surface", "control"):
        rows = list(csv.reader(open(paths[key])))[1:]
        values = [float(r[-1]) for r in rows]
        assert all(v == 0.0 for v in values)
