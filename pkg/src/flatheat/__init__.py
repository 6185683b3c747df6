"""Flatness-based null control of the boundary-controlled 1-D heat equation.

Compute, from any square-integrable initial temperature profile, an explicit
boundary-flux control steering the rod temperature to zero in finite time;
verify it against an independent finite-difference simulation; quantify the
truncation behaviour of the underlying series.
"""

from .bench import DecayFit, SweepSpec, figure_traces, reproduce_tables, sweep
from .exceptions import (FitDegenerateError, JetContractError, JetSingularityError,
                         SimulationDivergedError)
from .jets import (DEFAULT_MAX_ORDER, GevreyParams, Jet, jet_exp, jet_log, jet_mul,
                   jet_pow, jet_reciprocal, phi, phi_jet)
from .planner import FlatnessPlanner, PlanConfig, build_plan
from .profiles import (CoefficientProfile, ConstantProfile, InitialProfile,
                       SampledProfile, SingleModeProfile, StepProfile,
                       load_profile_csv, parse_profile)
from .simulator import SolverConfig, Trajectory, compare, simulate
from .spectral import FlatCoefficients, SpectralState, cosine_coeffs, flat_coeffs, free_state

__version__ = "0.1.0"

__all__ = [
    "CoefficientProfile", "ConstantProfile", "DecayFit", "DEFAULT_MAX_ORDER",
    "FitDegenerateError", "FlatCoefficients", "FlatnessPlanner", "GevreyParams",
    "InitialProfile", "Jet", "JetContractError", "JetSingularityError",
    "PlanConfig", "SampledProfile", "SimulationDivergedError", "SingleModeProfile",
    "SolverConfig", "SpectralState", "StepProfile", "SweepSpec", "Trajectory",
    "build_plan", "compare", "cosine_coeffs", "figure_traces", "flat_coeffs",
    "free_state", "jet_exp", "jet_log", "jet_mul", "jet_pow", "jet_reciprocal",
    "load_profile_csv", "parse_profile", "phi", "phi_jet", "reproduce_tables",
    "simulate", "sweep",
]
