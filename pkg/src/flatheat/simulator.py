"""Finite-difference verification of the synthesized control.

Crank-Nicolson in time, second-order central differences in space, Neumann
conditions through ghost points (zero flux at x = 0, the control flux at
x = 1).  The solver integrates the full horizon numerically so its result
is independent of the series construction; a spectral_splice variant skips
to the splice time exactly for fast runs.
"""

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .exceptions import SimulationDivergedError
from .planner import FlatnessPlanner
from .profiles import InitialProfile
from .spectral import free_state
from .validation import check_int, check_scalar

SCHEMES = ("crank_nicolson", "spectral_splice")


@dataclass(frozen=True)
class SolverConfig:
    """Spatial intervals, time step, and integration scheme."""

    nx: int = 200
    dt: float = 1e-4
    scheme: str = "crank_nicolson"

    def __post_init__(self):
        check_int(self.nx, "nx", ge=8)
        check_scalar(self.dt, "dt", gt=0.0)
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")


@dataclass
class Trajectory:
    """Saved temperature fields over time, plus the control samples applied."""

    x: np.ndarray
    times: np.ndarray
    fields: np.ndarray
    applied_control: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.fields.shape != (self.times.size, self.x.size):
            raise ValueError("fields must be (n_times, nx+1)")

    @property
    def final_field(self):
        return self.fields[-1]


def _factor_step_matrix(nx, r):
    """LU-factor the tridiagonal (I - dt/2 * A) with ghost Neumann rows."""
    d = np.full(nx + 1, 1.0 + r)
    du = np.full(nx, -r / 2.0)
    dl = np.full(nx, -r / 2.0)
    du[0] = -r    # row 0: ghost doubles the theta_1 coupling
    dl[-1] = -r   # row nx: ghost doubles the theta_{nx-1} coupling
    dl_, d_, du_, du2, ipiv, info = lapack.dgttrf(dl, d, du)
    if info != 0:
        raise RuntimeError(f"tridiagonal factorization failed (info={info})")
    return dl_, d_, du_, du2, ipiv


def _apply_laplacian(theta, out):
    """out = L theta with ghost Neumann rows (zero-flux form, no control term)."""
    out[0] = 2.0 * (theta[1] - theta[0])
    out[1:-1] = theta[2:] - 2.0 * theta[1:-1] + theta[:-2]
    out[-1] = 2.0 * (theta[-2] - theta[-1])
    return out


def simulate(profile: InitialProfile, plan: FlatnessPlanner,
             solver: SolverConfig = SolverConfig(), save_stride: int = 1) -> Trajectory:
    """Integrate the controlled rod over the plan's horizon.

    The control is sampled at the half-step time level, matching the
    trapezoidal accuracy of the scheme.  The last step is shortened when the
    horizon is not a whole multiple of dt.  Fields are saved every
    ``save_stride`` steps (the final state is always saved).
    """
    check_int(save_stride, "save_stride", ge=1)
    horizon = plan.config_.horizon
    if solver.dt > horizon:
        raise ValueError("violated: dt <= horizon")
    nx, dt = solver.nx, solver.dt
    dx = 1.0 / nx
    x = np.linspace(0.0, 1.0, nx + 1)

    if solver.scheme == "spectral_splice":
        t0 = plan.config_.tau
        theta = free_state(plan.spectral_, t0, x)
        times = [0.0, t0]
        fields = [np.asarray(profile.sample(x), dtype=float), theta.copy()]
    else:
        t0 = 0.0
        theta = np.asarray(profile.sample(x), dtype=float)
        times = [0.0]
        fields = [theta.copy()]

    span = horizon - t0
    n_whole = int(math.floor(span / dt + 1e-9))
    last_dt = span - n_whole * dt
    if last_dt < 1e-12 * max(dt, 1.0):
        last_dt = 0.0
    steps = [dt] * n_whole + ([last_dt] if last_dt > 0.0 else [])

    # precompute half-step control samples in one batched call
    t_half = np.empty(len(steps))
    acc_t = t0
    for m, h in enumerate(steps):
        t_half[m] = acc_t + h / 2.0
        acc_t += h
    u_half = plan.control(np.minimum(t_half, horizon))

    factor = _factor_step_matrix(nx, dt / dx ** 2)
    lap = np.empty_like(theta)
    t = t0
    with np.errstate(invalid="ignore"):  # divergence is detected explicitly
        for m, h in enumerate(steps):
            if h != dt:
                factor = _factor_step_matrix(nx, h / dx ** 2)
            r = h / dx ** 2
            rhs = theta + (r / 2.0) * _apply_laplacian(theta, lap)
            rhs[-1] += h * 2.0 * u_half[m] / dx
            theta, info = lapack.dgttrs(*factor, rhs)
            if info != 0:
                raise RuntimeError(f"tridiagonal solve failed (info={info})")
            t += h
            if not np.all(np.isfinite(theta)):
                raise SimulationDivergedError(m, t)
            if (m + 1) % save_stride == 0 or m == len(steps) - 1:
                times.append(t)
                fields.append(theta.copy())

    times = np.asarray(times)
    fields = np.asarray(fields)
    applied = plan.control(np.minimum(times, horizon))
    return Trajectory(x=x, times=times, fields=fields, applied_control=applied)


def compare(trajectory: Trajectory, plan: FlatnessPlanner, t_min: float = 0.01):
    """Terminal norms of the simulated field and the max simulator/series gap.

    Returns (linf_final, l2_final, max_gap).  The gap is taken over saved
    times >= t_min: before a short burn-in the truncated cosine expansion of
    a rough initial profile has not yet converged to the true solution, so
    early gaps would measure series truncation rather than solver agreement.
    """
    horizon = plan.config_.horizon
    if abs(trajectory.times[-1] - horizon) > 1e-8 + 1e-6 * horizon:
        raise ValueError("trajectory and plan do not share the horizon")
    final = trajectory.final_field
    linf_final = float(np.max(np.abs(final)))
    l2_final = float(math.sqrt(np.trapezoid(final ** 2, trajectory.x)))
    keep = trajectory.times >= t_min
    if not np.any(keep):
        keep = trajectory.times == trajectory.times[-1]
    series = plan.state(trajectory.times[keep], trajectory.x)
    max_gap = float(np.max(np.abs(trajectory.fields[keep] - series)))
    return linf_final, l2_final, max_gap


def write_trajectory_csv(trajectory: Trajectory, path, stride: int = 1):
    """CSV snapshots (t, x, theta) every ``stride`` saved times."""
    check_int(stride, "stride", ge=1)
    idx = list(range(0, trajectory.times.size, stride))
    if idx[-1] != trajectory.times.size - 1:
        idx.append(trajectory.times.size - 1)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "theta"])
        for i in idx:
            t = trajectory.times[i]
            for j, xv in enumerate(trajectory.x):
                w.writerow([repr(float(t)), repr(float(xv)),
                            repr(float(trajectory.fields[i, j]))])


def write_summary_json(path, plan: FlatnessPlanner, solver: SolverConfig,
                       metrics: dict):
    """Summary JSON: metrics plus an echo of the plan and solver settings."""
    payload = {
        "plan": plan.get_params(),
        "solver": {"nx": solver.nx, "dt": solver.dt, "scheme": solver.scheme},
        **metrics,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
