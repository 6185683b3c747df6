"""Initial temperature profiles on [0,1] and their cosine-series coefficients.

Presets carry closed-form coefficients; sampled profiles are integrated by
composite Simpson quadrature.  All profiles expose ``sample(x)`` for the
finite-difference simulator and ``coefficients(n_max)`` for the spectral
pipeline (coefficients against the family sqrt(2)*cos(n*pi*x), n >= 0).
"""

import csv
import math

import numpy as np
from scipy.integrate import simpson

from .validation import check_int

SQRT2 = math.sqrt(2.0)


class InitialProfile:
    """Base class: a square-integrable initial temperature profile."""

    def sample(self, x):
        raise NotImplementedError

    def coefficients(self, n_max: int) -> np.ndarray:
        raise NotImplementedError


class StepProfile(InitialProfile):
    """The two-level step: -1 on [0, 1/2), +1 on (1/2, 1], 0 at the jump.

    Coefficients vanish for even modes; odd modes carry
    (-1)^(p+1)/(2p+1) * 2*sqrt(2)/pi for n = 2p+1.
    """

    def sample(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < 0.5, -1.0, 1.0)
        return np.where(x == 0.5, 0.0, out)

    def coefficients(self, n_max):
        check_int(n_max, "n_max", ge=0)
        c = np.zeros(n_max + 1)
        for p in range((n_max + 1) // 2):
            n = 2 * p + 1
            if n <= n_max:
                c[n] = ((-1) ** (p + 1) / n) * (2.0 * SQRT2 / math.pi)
        return c


class ConstantProfile(InitialProfile):
    """Uniform temperature a; only the n = 0 coefficient a/sqrt(2) survives."""

    def __init__(self, value: float):
        self.value = float(value)

    def sample(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.value)

    def coefficients(self, n_max):
        check_int(n_max, "n_max", ge=0)
        c = np.zeros(n_max + 1)
        c[0] = self.value / SQRT2
        return c


class SingleModeProfile(InitialProfile):
    """amplitude * sqrt(2) * cos(mode * pi * x): one cosine mode."""

    def __init__(self, mode: int, amplitude: float = 1.0):
        self.mode = check_int(mode, "mode", ge=0)
        self.amplitude = float(amplitude)

    def sample(self, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude * SQRT2 * np.cos(self.mode * math.pi * x)

    def coefficients(self, n_max):
        check_int(n_max, "n_max", ge=0)
        if self.mode > n_max:
            raise ValueError(f"n_max={n_max} cannot represent mode {self.mode}")
        c = np.zeros(n_max + 1)
        c[self.mode] = self.amplitude
        return c


class SampledProfile(InitialProfile):
    """Profile given by samples (x_i, theta0_i); quadrature by composite Simpson.

    The grid needs at least 2 strictly increasing abscissae inside [0,1].
    Pointwise evaluation interpolates linearly.
    """

    def __init__(self, x, values):
        x = np.asarray(x, dtype=float)
        values = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise ValueError("sample grid needs at least 2 points")
        if x.size != values.size:
            raise ValueError("x and values must have equal length")
        if np.any(np.diff(x) <= 0):
            raise ValueError("sample abscissae must be strictly increasing")
        if x[0] < 0.0 or x[-1] > 1.0:
            raise ValueError("sample abscissae must lie in [0, 1]")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(values))):
            raise ValueError("samples must be finite")
        self.x = x
        self.values = values

    def sample(self, x):
        return np.interp(np.asarray(x, dtype=float), self.x, self.values)

    def coefficients(self, n_max):
        check_int(n_max, "n_max", ge=0)
        c = np.empty(n_max + 1)
        # expansion theta0 = sum_n c_n sqrt(2) cos(n pi x): the n = 0 basis
        # function sqrt(2) has squared norm 2, so c_0 = <theta0, 1>/sqrt(2)
        c[0] = simpson(self.values, x=self.x) / SQRT2
        for n in range(1, n_max + 1):
            integrand = self.values * SQRT2 * np.cos(n * math.pi * self.x)
            c[n] = simpson(integrand, x=self.x)
        return c


class CoefficientProfile(InitialProfile):
    """Profile defined directly by its cosine coefficients c_0..c_N."""

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise ValueError("coeffs must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coeffs must be finite")
        self.coeffs = coeffs

    def sample(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        n = np.arange(self.coeffs.size)
        out = SQRT2 * np.cos(np.outer(x, n) * math.pi) @ self.coeffs
        return out if np.ndim(x) else float(out[0])

    def coefficients(self, n_max):
        check_int(n_max, "n_max", ge=0)
        c = np.zeros(n_max + 1)
        m = min(n_max + 1, self.coeffs.size)
        c[:m] = self.coeffs[:m]
        return c


def load_profile_csv(path) -> SampledProfile:
    """Read a two-column (x, theta0) CSV with a header row and '.' decimals."""
    xs, vals = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty profile file")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise ValueError(f"{path}:{lineno}: expected two columns")
            xs.append(float(row[0]))
            vals.append(float(row[1]))
    return SampledProfile(xs, vals)


def parse_profile(text: str) -> InitialProfile:
    """Turn a CLI profile argument into a profile.

    Accepts 'step', 'zero', 'constant:<a>', 'mode:<m>[:<amplitude>]', or a
    path to a samples CSV.
    """
    if text == "step":
        return StepProfile()
    if text == "zero":
        return ConstantProfile(0.0)
    if text.startswith("constant:"):
        return ConstantProfile(float(text.split(":", 1)[1]))
    if text.startswith("mode:"):
        parts = text.split(":")
        amp = float(parts[2]) if len(parts) > 2 else 1.0
        return SingleModeProfile(int(parts[1]), amp)
    return load_profile_csv(text)
