"""Cosine-spectral analysis: free evolution and the flat-output seed sequence.

The temperature profile is expanded as theta0 = sum_n c_n sqrt(2) cos(n pi x).
Under zero control each mode decays by e^{-n^2 pi^2 t}; at the splice time tau
the smoothed state is analytic and its even-order spatial Taylor data yield
the seed sequence y_k that the planner extends into a full flat trajectory.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .doubledouble import DoubleDouble, dd_exp, dd_log, dd_pi_squared
from .profiles import SQRT2, InitialProfile
from .validation import check_int, check_scalar

PI_SQ = math.pi ** 2


@dataclass(frozen=True)
class SpectralState:
    """Coefficients c_n, n = 0..n_max, against {sqrt(2) cos(n pi x)}."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("coeffs must be a non-empty 1-D array")
        if not np.all(np.isfinite(arr)):
            raise ValueError("spectral coefficients must be finite")
        object.__setattr__(self, "coeffs", arr)

    @property
    def n_max(self):
        return self.coeffs.size - 1

    def norm_sq(self):
        """Squared L2 norm: 2|c_0|^2 + sum_{n>=1} |c_n|^2 (the n = 0 basis
        function sqrt(2) has squared norm 2)."""
        return 2.0 * self.coeffs[0] ** 2 + float(np.sum(self.coeffs[1:] ** 2))


def cosine_coeffs(profile: InitialProfile, n_max: int) -> SpectralState:
    """Expand a profile in the cosine family up to mode n_max."""
    check_int(n_max, "n_max", ge=0)
    return SpectralState(profile.coefficients(n_max))


def free_state(state: SpectralState, t, x):
    """Zero-control solution sum_n c_n e^{-n^2 pi^2 t} sqrt(2) cos(n pi x).

    ``t`` and ``x`` may be scalars or 1-D arrays; with both arrays the result
    has shape (len(t), len(x)).
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(t_arr < 0.0):
        raise ValueError("violated: t >= 0")
    if np.any((x_arr < 0.0) | (x_arr > 1.0)):
        raise ValueError("violated: 0 <= x <= 1")
    n = np.arange(state.coeffs.size)
    decay = np.exp(-np.outer(t_arr, n ** 2) * PI_SQ) * state.coeffs  # (nt, n)
    basis = SQRT2 * np.cos(math.pi * np.outer(n, x_arr))             # (n, nx)
    out = decay @ basis
    if np.ndim(t) == 0 and np.ndim(x) == 0:
        return float(out[0, 0])
    if np.ndim(t) == 0:
        return out[0]
    if np.ndim(x) == 0:
        return out[:, 0]
    return out


@dataclass(frozen=True)
class FlatCoefficients:
    """Seed sequence y_k = flat output's k-th time derivative at the splice.

    ``y_dd`` carries the same values in double-double precision when the
    sequence was computed under the extended setting.
    """

    y: np.ndarray
    tau: float
    k_max: int
    n_max: int
    y_dd: Optional[DoubleDouble] = None

    def __post_init__(self):
        arr = np.asarray(self.y, dtype=float)
        if arr.shape != (self.k_max + 1,):
            raise ValueError("y must have k_max + 1 entries")
        object.__setattr__(self, "y", arr)


def flat_coeffs(state: SpectralState, tau: float, k_max: int,
                extended: bool = False) -> FlatCoefficients:
    """Seed coefficients y_k = sqrt(2) (sum_n c_n e^{-n^2 pi^2 tau} n^{2k}) (-pi^2)^k.

    The factor n^{2k} e^{-n^2 pi^2 tau} is evaluated as one exp of
    2k ln n - n^2 pi^2 tau (n^{2k} alone overflows binary64 around n = 30,
    k = 60); the inner sum runs over descending n with exact compensated
    accumulation; the n = 0 term contributes only at k = 0 (0^0 = 1).
    """
    tau = check_scalar(tau, "tau", gt=0.0)
    check_int(k_max, "k_max", ge=0)
    c = state.coeffs
    n_max = state.n_max

    if extended:
        y_dd = _flat_coeffs_dd(c, tau, k_max)
        y = y_dd.to_float()
        if not np.all(np.isfinite(y)):
            k_bad = int(np.flatnonzero(~np.isfinite(y))[0])
            raise OverflowError(f"flat coefficient overflow at (n<={n_max}, k={k_bad})")
        return FlatCoefficients(y, tau, k_max, n_max, y_dd=y_dd)

    log_n = np.log(np.arange(1, n_max + 1)) if n_max >= 1 else np.zeros(0)
    y = np.empty(k_max + 1)
    pik = 1.0  # pi^{2k}, built multiplicatively
    for k in range(k_max + 1):
        terms = []
        for n in range(n_max, 0, -1):
            terms.append(c[n] * math.exp(2.0 * k * log_n[n - 1] - n * n * PI_SQ * tau))
        if k == 0:
            terms.append(c[0])
        inner = math.fsum(terms)
        if not math.isfinite(inner):
            raise OverflowError(f"flat coefficient overflow at (n<={n_max}, k={k})")
        y[k] = SQRT2 * inner * ((-1.0) ** k) * pik
        if not math.isfinite(y[k]):
            raise OverflowError(f"flat coefficient overflow at (n<={n_max}, k={k})")
        pik *= PI_SQ
    return FlatCoefficients(y, tau, k_max, n_max)


def _flat_coeffs_dd(c, tau, k_max):
    """Double-double version of the seed computation."""
    n_max = c.size - 1
    pi2 = dd_pi_squared()
    tau_dd = DoubleDouble(np.float64(tau))
    his = np.empty(k_max + 1)
    los = np.empty(k_max + 1)
    pik = DoubleDouble(np.float64(1.0))
    sqrt2 = DoubleDouble(np.float64(math.sqrt(2.0)), np.float64(-9.667293313452913e-17))
    log_n = [dd_log(DoubleDouble(np.float64(n))) for n in range(1, n_max + 1)]
    for k in range(k_max + 1):
        inner = DoubleDouble(np.float64(0.0))
        for n in range(n_max, 0, -1):
            arg = log_n[n - 1] * float(2 * k) - pi2 * tau_dd * float(n * n)
            inner = inner + dd_exp(arg) * float(c[n])
        if k == 0:
            inner = inner + float(c[0])
        yk = sqrt2 * inner * pik * ((-1.0) ** k)
        his[k] = yk.hi
        los[k] = yk.lo
        pik = pik * pi2
    return DoubleDouble(his, los)
