import json
import math

import numpy as np
import pytest

import flatheat as fh
from flatheat.spectral import PI_SQ


def zero_plan(tau=0.15, r_prime=0.15, horizon=0.3):
    return fh.FlatnessPlanner(tau=tau, r_prime=r_prime,
                              horizon=horizon).fit(fh.ConstantProfile(0.0))


def test_solver_config_validation():
    with pytest.raises(ValueError):
        fh.SolverConfig(nx=4)
    with pytest.raises(ValueError):
        fh.SolverConfig(dt=-1e-4)
    with pytest.raises(ValueError):
        fh.SolverConfig(scheme="explicit_euler")


def test_constant_profile_is_a_steady_state():
    traj = fh.simulate(fh.ConstantProfile(2.5), zero_plan(),
                       fh.SolverConfig(nx=64, dt=1e-3))
    np.testing.assert_allclose(traj.fields, 2.5, atol=1e-12)


def test_single_mode_matches_exact_solution():
    traj = fh.simulate(fh.SingleModeProfile(1), zero_plan(),
                       fh.SolverConfig(nx=200, dt=1e-4), save_stride=10 ** 9)
    exact = math.sqrt(2.0) * math.exp(-PI_SQ * 0.3) * np.cos(math.pi * traj.x)
    assert np.abs(traj.final_field - exact).max() <= 1e-5


def test_second_order_convergence_factor():
    errs = []
    for nx, dt in [(100, 2e-4), (200, 1e-4)]:
        traj = fh.simulate(fh.SingleModeProfile(1), zero_plan(),
                           fh.SolverConfig(nx=nx, dt=dt), save_stride=10 ** 9)
        exact = math.sqrt(2.0) * math.exp(-PI_SQ * 0.3) * np.cos(math.pi * traj.x)
        errs.append(np.abs(traj.final_field - exact).max())
    factor = errs[0] / errs[1]
    assert 3.0 <= factor <= 5.0


def test_zero_control_energy_decays(step_profile):
    traj = fh.simulate(step_profile, zero_plan(),
                       fh.SolverConfig(nx=100, dt=5e-4))
    energies = [np.trapezoid(f ** 2, traj.x) for f in traj.fields]
    assert all(b <= a + 1e-14 for a, b in zip(energies, energies[1:]))


def test_mean_evolves_by_the_injected_flux(step_profile, step_planner):
    solver = fh.SolverConfig(nx=100, dt=1e-3)
    traj = fh.simulate(step_profile, step_planner, solver)
    means = np.trapezoid(traj.fields, traj.x, axis=1)
    for m in range(1, traj.times.size):
        h = traj.times[m] - traj.times[m - 1]
        u_half = step_planner.control(min(traj.times[m - 1] + h / 2,
                                          step_planner.config_.horizon))
        assert means[m] - means[m - 1] == pytest.approx(h * u_half, abs=1e-4)


def test_divergence_is_reported_with_step_index(step_planner):
    class BrokenProfile(fh.InitialProfile):
        def sample(self, x):
            out = np.zeros_like(np.asarray(x, dtype=float))
            out[0] = np.inf
            return out

        def coefficients(self, n_max):
            return np.zeros(n_max + 1)

    with pytest.raises(fh.SimulationDivergedError) as err:
        fh.simulate(BrokenProfile(), step_planner, fh.SolverConfig(nx=16, dt=1e-3))
    assert err.value.step == 0


def test_compare_zero_profile_is_null(step_profile):
    plan = fh.FlatnessPlanner().fit(fh.ConstantProfile(0.0))
    traj = fh.simulate(fh.ConstantProfile(0.0), plan,
                       fh.SolverConfig(nx=64, dt=1e-3))
    linf, l2, gap = fh.compare(traj, plan)
    assert linf == 0.0 and l2 == 0.0 and gap == 0.0


def test_compare_single_mode_free_phase_gap_is_discretization_level():
    plan = fh.FlatnessPlanner(tau=0.25, r_prime=0.25, horizon=0.5).fit(
        fh.SingleModeProfile(1))
    traj = fh.simulate(fh.SingleModeProfile(1), plan,
                       fh.SolverConfig(nx=200, dt=2e-4), save_stride=25)
    keep = traj.times <= 0.25
    series = plan.state(traj.times[keep], traj.x)
    gap = np.abs(traj.fields[keep] - series).max()
    assert gap <= 2e-5


def test_compare_requires_matching_horizon(step_profile, step_planner):
    short = fh.FlatnessPlanner(tau=0.15, r_prime=0.15, horizon=0.3).fit(step_profile)
    traj = fh.simulate(step_profile, short, fh.SolverConfig(nx=32, dt=1e-3))
    with pytest.raises(ValueError):
        fh.compare(traj, step_planner)


def test_compare_step_experiment_gap(step_profile, step_planner):
    traj = fh.simulate(step_profile, step_planner,
                       fh.SolverConfig(nx=200, dt=1e-4), save_stride=50)
    linf, l2, gap = fh.compare(traj, step_planner)
    assert gap <= 5e-3
    assert linf <= 1e-3


def test_gap_decreases_under_grid_refinement(step_profile, step_planner):
    # strides chosen so all three runs snapshot the same physical times
    gaps = []
    for nx, dt, stride in [(50, 8e-4, 25), (100, 4e-4, 50), (200, 2e-4, 100)]:
        traj = fh.simulate(step_profile, step_planner,
                           fh.SolverConfig(nx=nx, dt=dt), save_stride=stride)
        gaps.append(fh.compare(traj, step_planner)[2])
    assert gaps[0] > gaps[1] > gaps[2]


def test_spectral_splice_agrees_with_full_integration(step_profile, step_planner):
    full = fh.simulate(step_profile, step_planner,
                       fh.SolverConfig(nx=200, dt=2e-4), save_stride=10 ** 9)
    spliced = fh.simulate(step_profile, step_planner,
                          fh.SolverConfig(nx=200, dt=2e-4, scheme="spectral_splice"),
                          save_stride=10 ** 9)
    assert spliced.times[1] == pytest.approx(0.3)
    assert np.abs(full.final_field - spliced.final_field).max() <= 1e-4


def test_short_last_step(step_profile):
    plan = fh.FlatnessPlanner(tau=0.15, r_prime=0.15, horizon=0.3).fit(step_profile)
    traj = fh.simulate(step_profile, plan, fh.SolverConfig(nx=32, dt=7e-4))
    assert traj.times[-1] == pytest.approx(0.3, abs=1e-12)


def test_trajectory_csv_and_summary(tmp_path, step_profile):
    plan = fh.FlatnessPlanner(tau=0.15, r_prime=0.15, horizon=0.3).fit(step_profile)
    solver = fh.SolverConfig(nx=16, dt=1e-3)
    traj = fh.simulate(step_profile, plan, solver, save_stride=50)
    csv_path = tmp_path / "traj.csv"
    from flatheat.simulator import write_summary_json, write_trajectory_csv
    write_trajectory_csv(traj, csv_path, stride=2)
    rows = csv_path.read_text().strip().splitlines()
    assert rows[0] == "t,x,theta"
    linf, l2, gap = fh.compare(traj, plan)
    json_path = tmp_path / "summary.json"
    write_summary_json(json_path, plan, solver,
                       {"terminal_linf": linf, "terminal_l2": l2, "max_gap": gap})
    payload = json.loads(json_path.read_text())
    assert payload["solver"]["nx"] == 16
    assert payload["plan"]["tau"] == 0.15
    assert payload["terminal_linf"] == linf
