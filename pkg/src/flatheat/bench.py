"""Benchmarks: control-effort tables, truncation sweeps, and figure traces.

The sweeps quantify how fast the truncated construction converges in each
of its three orders by measuring sup-norm differences against a richer
reference and fitting log-linear decay rates; the tables evaluate the
control effort over a grid of (s, R') configurations.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson
from sklearn.base import clone

from .exceptions import FitDegenerateError
from .planner import FlatnessPlanner
from .profiles import InitialProfile
from .validation import check_int

ROUNDOFF_FLOOR = 1e-13

_SWEEPABLE = ("i_max", "k_max", "n_max")
_REFERENCES = ("richest_truncation", "extended_precision")


@dataclass(frozen=True)
class SweepSpec:
    """One truncation-order sweep: which order varies, over which values."""

    vary: str
    values: Sequence[int]
    base: FlatnessPlanner
    profile: InitialProfile
    reference: str = "richest_truncation"

    def __post_init__(self):
        if self.vary not in _SWEEPABLE:
            raise ValueError(f"vary must be one of {_SWEEPABLE}")
        vals = [check_int(v, "sweep value", ge=1) for v in self.values]
        if len(vals) < 4:
            raise ValueError("violated: len(values) >= 4")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.reference not in _REFERENCES:
            raise ValueError(f"reference must be one of {_REFERENCES}")
        object.__setattr__(self, "values", tuple(vals))


@dataclass(frozen=True)
class DecayFit:
    """Fitted exponential decay of sweep errors against the predicted scale.

    ``rate`` is the fitted coefficient of i*ln(i), k, or n^2 depending on
    the swept order; the matching c1_hat/c2_hat/c3_hat property exposes it.
    """

    vary: str
    values: tuple
    errors: tuple
    rate: float
    intercept: float
    r_squared: float
    used: tuple = field(default=())

    def _when(self, name):
        return self.rate if self.vary == name else None

    @property
    def c1_hat(self) -> Optional[float]:
        return self._when("i_max")

    @property
    def c2_hat(self) -> Optional[float]:
        return self._when("k_max")

    @property
    def c3_hat(self) -> Optional[float]:
        return self._when("n_max")


def _decay_scale(vary, values):
    v = np.asarray(values, dtype=float)
    if vary == "i_max":
        return v * np.log(v)
    if vary == "k_max":
        return v
    return v ** 2


def _sup_difference(plan_a, plan_b, t_grid, x_grid):
    a = plan_a.state(t_grid, x_grid)
    b = plan_b.state(t_grid, x_grid)
    return float(np.max(np.abs(a - b)))


def sweep(spec: SweepSpec, t_points: int = 81, x_points: int = 41) -> DecayFit:
    """Measure sup-norm errors against a richer reference and fit the decay.

    The reference doubles the swept order (2x the largest swept value),
    keeping the other truncations at their base values so the difference
    isolates the swept tail; with reference='extended_precision' it is also
    evaluated in double-double arithmetic.  Points below the round-off
    floor are excluded from the fit.
    """
    base_params = spec.base.get_params()
    ref_params = dict(base_params)
    ref_params[spec.vary] = 2 * max(spec.values)
    if spec.reference == "extended_precision":
        ref_params["precision"] = "extended"
    reference = FlatnessPlanner(**ref_params).fit(spec.profile)

    cfg = reference.config_
    t_grid = np.linspace(cfg.tau, cfg.t_off, t_points + 1)[1:]
    x_grid = np.linspace(0.0, 1.0, x_points)

    errors = []
    for v in spec.values:
        params = dict(base_params)
        params[spec.vary] = v
        plan_v = FlatnessPlanner(**params).fit(spec.profile)
        errors.append(_sup_difference(plan_v, reference, t_grid, x_grid))

    errors = np.asarray(errors)
    usable = errors > ROUNDOFF_FLOOR
    if np.count_nonzero(usable) < 3:
        raise FitDegenerateError(
            f"only {np.count_nonzero(usable)} sweep points above the "
            f"{ROUNDOFF_FLOOR:g} floor; need at least 3")

    g = _decay_scale(spec.vary, np.asarray(spec.values)[usable])
    log_err = np.log(errors[usable])
    slope, intercept = np.polyfit(g, log_err, 1)
    pred = slope * g + intercept
    ss_res = float(np.sum((log_err - pred) ** 2))
    ss_tot = float(np.sum((log_err - log_err.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return DecayFit(vary=spec.vary, values=tuple(spec.values),
                    errors=tuple(float(e) for e in errors),
                    rate=float(-slope), intercept=float(intercept),
                    r_squared=float(r2),
                    used=tuple(int(v) for v in np.asarray(spec.values)[usable]))


def write_sweep_points_csv(fit: DecayFit, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([fit.vary, "sup_error"])
        for v, e in zip(fit.values, fit.errors):
            w.writerow([v, repr(float(e))])


def write_sweep_fit_json(fit: DecayFit, path):
    payload = {
        "vary": fit.vary,
        "values": list(fit.values),
        "errors": list(fit.errors),
        "used_in_fit": list(fit.used),
        "rate": fit.rate,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def reproduce_tables(s_values: Sequence[float], r_values: Sequence[float],
                     base: FlatnessPlanner, profile: InitialProfile = None,
                     grid_points: int = 4001):
    """Control-effort norms over a grid of (s, R') configurations.

    Rows iterate s ascending, columns R' ascending.  Each cell fits the
    planner with horizon = tau + R' and reports (L2, Linf) of the control,
    plus the window-normalized L2/sqrt(R') (the effort per unit active
    duration, comparable across window lengths).  Cell-level failures are
    recorded and the run continues.
    """
    from .profiles import StepProfile

    if profile is None:
        profile = StepProfile()
    records = []
    for s in sorted(float(v) for v in s_values):
        for rp in sorted(float(v) for v in r_values):
            rec = {"s": s, "r_prime": rp, "l2": None, "linf": None,
                   "l2_unit_window": None, "error": None}
            try:
                planner = clone(base)
                planner.set_params(s=s, r_prime=rp, horizon=base.tau + rp)
                planner.fit(profile)
                l2, linf = planner.control_norms(grid_points)
                rec.update(l2=l2, linf=linf, l2_unit_window=l2 / math.sqrt(rp))
            except Exception as exc:  # cell failures must not kill the run
                rec["error"] = f"{type(exc).__name__}: {exc}"
            records.append(rec)
    return records


def render_tables_text(records) -> str:
    """Aligned text rendering: one block per norm, s rows by R' columns."""
    s_vals = sorted({r["s"] for r in records})
    r_vals = sorted({r["r_prime"] for r in records})
    cell = {(r["s"], r["r_prime"]): r for r in records}

    def block(key, title):
        lines = [title]
        header = "s\\R'".rjust(6) + "".join(f"{rv:>12g}" for rv in r_vals)
        lines.append(header)
        for sv in s_vals:
            row = f"{sv:>6g}"
            for rv in r_vals:
                rec = cell.get((sv, rv))
                if rec is None or rec[key] is None:
                    row += f"{'-':>12}"
                else:
                    row += f"{rec[key]:>12.4g}"
            lines.append(row)
        return "\n".join(lines)

    return block("l2", "control L2 norm") + "\n\n" + block("linf", "control Linf norm") + "\n"


def write_tables_csv(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "r_prime", "l2", "linf", "l2_unit_window", "error"])
        for r in records:
            w.writerow([repr(float(r["s"])), repr(float(r["r_prime"]))]
                       + [("" if r[k] is None else repr(float(r[k])))
                          for k in ("l2", "linf", "l2_unit_window")]
                       + [r["error"] or ""])


def figure_traces(planner: FlatnessPlanner, outdir, surface_t: int = 251,
                  surface_x: int = 101, control_t: int = 5001):
    """Emit the (t, x, theta) surface and (t, u, cumulative L2) trace CSVs.

    The cumulative norm is the running Simpson quadrature of u^2 from 0,
    so its final value matches control_norms' L2 on a converged grid.
    """
    import os

    os.makedirs(outdir, exist_ok=True)
    surface_path = os.path.join(outdir, "state_surface.csv")
    control_path = os.path.join(outdir, "control_trace.csv")

    planner.write_state_trace(surface_path, t_points=surface_t, x_points=surface_x)

    ts = np.linspace(0.0, planner.config_.horizon, control_t)
    us = planner.control(ts)
    cum = cumulative_simpson(us * us, x=ts, initial=0.0)
    cum_l2 = np.sqrt(np.maximum(cum, 0.0))
    with open(control_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "u", "l2_cumulative"])
        for t, u, c in zip(ts, us, cum_l2):
            w.writerow([repr(float(t)), repr(float(u)), repr(float(c))])
    return {"surface": surface_path, "control": control_path}
