"""Truncated Taylor-jet arithmetic and the Gevrey-class step function.

A jet holds the normalized Taylor coefficients f^(j)(t0)/j! of a scalar
function at an expansion point.  Composition recurrences (product, exp,
power, log, reciprocal) propagate derivative stacks to high order in
O(order^2) work; closed forms for the step function's derivatives grow
combinatorially and are useless past order ~5, which is why everything
high-order in this package goes through jets.

Coefficients are either float64 arrays (default; convolutions accumulate
with Kahan compensation) or DoubleDouble arrays (extended precision,
~31 digits, for configurations whose derivative stacks cancel beyond
binary64 resolution).  A trailing batch axis is supported throughout: a
jet with coefficient shape (order+1, n) holds n independent jets sharing
one order, which makes dense time-grid evaluation cheap.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .doubledouble import DoubleDouble, dd_exp, dd_log, dd_pow, dd_where
from .exceptions import JetContractError, JetSingularityError
from .validation import check_int, check_scalar

# exp underflows to exact zero below this argument; the matching overflow
# bound guards jet_exp inputs.  Both are binary64 limits and apply to the
# double-double backend too, whose leading limb is a float64.
UNDERFLOW_EXPONENT = math.log(np.finfo(np.float64).tiny)
OVERFLOW_EXPONENT = math.log(np.finfo(np.float64).max)

DEFAULT_MAX_ORDER = 96
RECIPROCAL_FLOOR = 1e-300


def _is_dd(rows):
    return isinstance(rows[0], DoubleDouble)


def _zeros_like(x):
    if isinstance(x, DoubleDouble):
        return DoubleDouble.zeros(x.shape)
    return np.zeros_like(x)


def _conv(a_rows, b_rows, j, start=0):
    """sum_{m=start..j} a_m b_{j-m}, Kahan-compensated on the float path."""
    if _is_dd(a_rows) or _is_dd(b_rows):
        acc = a_rows[start] * b_rows[j - start]
        for m in range(start + 1, j + 1):
            acc = acc + a_rows[m] * b_rows[j - m]
        return acc
    s = a_rows[start] * b_rows[j - start]
    c = np.zeros_like(s)
    for m in range(start + 1, j + 1):
        y = a_rows[m] * b_rows[j - m] - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


def _weighted_conv(weights, a_rows, b_rows, j, start, stop):
    """sum_{m=start..stop} weights[m] * a_m * b_{j-m} (Kahan on floats)."""
    if stop < start:
        return _zeros_like(a_rows[0])
    if _is_dd(a_rows) or _is_dd(b_rows):
        acc = a_rows[start] * b_rows[j - start] * weights[start]
        for m in range(start + 1, stop + 1):
            acc = acc + a_rows[m] * b_rows[j - m] * weights[m]
        return acc
    s = weights[start] * a_rows[start] * b_rows[j - start]
    c = np.zeros_like(s)
    for m in range(start + 1, stop + 1):
        y = weights[m] * a_rows[m] * b_rows[j - m] - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


def _stack(rows):
    if _is_dd(rows):
        return DoubleDouble(np.stack([r.hi for r in rows]), np.stack([r.lo for r in rows]))
    return np.stack([np.asarray(r, dtype=float) for r in rows])


def _rows(coeffs):
    if isinstance(coeffs, DoubleDouble):
        return [DoubleDouble(coeffs.hi[j], coeffs.lo[j]) for j in range(coeffs.hi.shape[0])]
    return [coeffs[j] for j in range(coeffs.shape[0])]


def _dd_from_int(n):
    """Integer as a DoubleDouble: top ~107 bits, relative error ~1e-32."""
    hi = float(n)
    lo = float(n - int(hi))
    return DoubleDouble(np.float64(hi), np.float64(lo))


class Jet:
    """Truncated Taylor expansion: coeffs[j] = f^(j)(center)/j!.

    ``coeffs`` has shape (order+1,) plus optional batch axes, float64 or
    DoubleDouble.  Construction rejects non-finite coefficients.  ``center``
    is a scalar, or an array matching the batch axes for batched jets.
    """

    __slots__ = ("center", "coeffs")

    def __init__(self, center, coeffs):
        self.center = center if np.ndim(center) else float(center)
        if isinstance(coeffs, DoubleDouble):
            if not bool(coeffs.isfinite().all()):
                raise ValueError("jet coefficients must be finite")
        else:
            coeffs = np.asarray(coeffs, dtype=float)
            if coeffs.ndim == 0:
                raise ValueError("coeffs needs a leading axis of length order+1")
            if not np.all(np.isfinite(coeffs)):
                raise ValueError("jet coefficients must be finite")
        self.coeffs = coeffs

    @property
    def order(self):
        n = self.coeffs.hi.shape[0] if isinstance(self.coeffs, DoubleDouble) \
            else self.coeffs.shape[0]
        return n - 1

    @property
    def value(self):
        """f(center): the constant term, as float64."""
        r = _rows(self.coeffs)[0]
        return r.to_float() if isinstance(r, DoubleDouble) else r

    def derivative(self, i):
        """f^(i)(center) = i! * coeffs[i], in the jet's native precision."""
        check_int(i, "i", ge=0, le=self.order)
        row = _rows(self.coeffs)[i]
        if isinstance(row, DoubleDouble):
            return row * _dd_from_int(math.factorial(i))
        return row * float(math.factorial(i))

    @classmethod
    def variable(cls, center, order, *, dt=1.0):
        """Jet of the identity map at ``center`` with inner derivative dt."""
        check_int(order, "order", ge=0)
        c = np.zeros(order + 1)
        c[0] = center
        if order >= 1:
            c[1] = dt
        return cls(center, c)

    @classmethod
    def constant(cls, value, center, order):
        check_int(order, "order", ge=0)
        c = np.zeros(order + 1)
        c[0] = value
        return cls(center, c)

    def __add__(self, other):
        if isinstance(other, Jet):
            _check_compatible(self, other)
            return Jet(self.center, _stack([a + b for a, b in
                                            zip(_rows(self.coeffs), _rows(other.coeffs))]))
        rows = _rows(self.coeffs)
        rows[0] = rows[0] + other
        return Jet(self.center, _stack(rows))

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.center, _stack([-r for r in _rows(self.coeffs)]))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        return Jet(self.center, _stack([r * other for r in _rows(self.coeffs)]))

    __rmul__ = __mul__

    def __repr__(self):
        return f"Jet(center={self.center!r}, order={self.order})"


def _check_compatible(a, b):
    same_center = (np.shape(a.center) == np.shape(b.center)
                   and np.all(np.asarray(a.center) == np.asarray(b.center)))
    if not same_center:
        raise JetContractError(f"jet centers differ: {a.center!r} != {b.center!r}")
    if a.order != b.order:
        raise JetContractError(f"jet orders differ: {a.order} != {b.order}")


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Cauchy product: the Leibniz rule on normalized Taylor coefficients."""
    _check_compatible(a, b)
    ar, br = _rows(a.coeffs), _rows(b.coeffs)
    return Jet(a.center, _stack([_conv(ar, br, j) for j in range(len(ar))]))


def _exp_rows(a_rows):
    """Series exponential with the underflow-to-zero convention.

    Lanes whose constant term falls below the binary64 underflow threshold
    yield an exact zero jet; their (possibly non-finite) higher coefficients
    are masked out before the recurrence so they cannot poison anything.
    """
    n = len(a_rows)
    dd = _is_dd(a_rows)
    a0 = a_rows[0].hi if dd else np.asarray(a_rows[0], dtype=float)
    if np.any(a0 > OVERFLOW_EXPONENT):
        raise OverflowError("jet_exp: constant term exceeds the binary64 exponent range")
    mask = ~(a0 >= UNDERFLOW_EXPONENT)  # catches -inf and NaN lanes too
    if dd:
        zero = DoubleDouble.zeros(np.shape(a0))
        a_rows = [dd_where(mask, zero, r) for r in a_rows]
        r0 = dd_where(mask, zero, dd_exp(a_rows[0]))
    else:
        a_rows = [np.where(mask, 0.0, r) for r in a_rows]
        with np.errstate(under="ignore"):
            r0 = np.where(mask, 0.0, np.exp(a_rows[0]))
    out = [r0]
    weights = list(range(n))
    for j in range(1, n):
        out.append(_weighted_conv(weights, a_rows, out, j, 1, j) * (1.0 / j))
    return out


def jet_exp(a: Jet) -> Jet:
    """exp of a jet: r0 = exp(a0), r_j = (1/j) sum_{m=1..j} m a_m r_{j-m}."""
    return Jet(a.center, _stack(_exp_rows(_rows(a.coeffs))))


def _pow_rows(a_rows, p):
    n = len(a_rows)
    dd = _is_dd(a_rows)
    a0 = a_rows[0]
    a0_lead = a0.hi if dd else np.asarray(a0, dtype=float)
    if np.any(a0_lead <= 0.0):
        raise ValueError("jet_pow: constant term must be positive (branch point)")
    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        out = [dd_pow(a0, p) if dd else a0 ** p]
        for j in range(1, n):
            weights = [m * (p + 1.0) - j for m in range(n)]
            s = _weighted_conv(weights, a_rows, out, j, 1, j)
            out.append(s / (a0 * j))
    return out


def jet_pow(a: Jet, p: float) -> Jet:
    """a**p via r_j = (1/(j a0)) sum_{m=1..j} (m(p+1) - j) a_m r_{j-m}."""
    return Jet(a.center, _stack(_pow_rows(_rows(a.coeffs), float(p))))


def jet_log(a: Jet) -> Jet:
    """log of a jet with positive constant term (helper for powers/tests).

    f_i = (g_i - (1/i) sum_{m=1..i-1} m f_m g_{i-m}) / g_0.
    """
    rows = _rows(a.coeffs)
    dd = _is_dd(rows)
    a0 = rows[0]
    a0_lead = a0.hi if dd else np.asarray(a0, dtype=float)
    if np.any(a0_lead <= 0.0):
        raise ValueError("jet_log: constant term must be positive")
    out = [dd_log(a0) if dd else np.log(a0)]
    for i in range(1, len(rows)):
        weights = [m / i for m in range(len(rows))]
        s = _weighted_conv(weights, out, rows, i, 1, i - 1)
        out.append((rows[i] - s) / a0)
    return Jet(a.center, _stack(out))


def _reciprocal_rows(a_rows):
    a0 = a_rows[0]
    a0_abs = np.abs(a0.hi) if _is_dd(a_rows) else np.abs(np.asarray(a0, dtype=float))
    if np.any(a0_abs < RECIPROCAL_FLOOR):
        raise JetSingularityError(
            f"jet reciprocal: |constant term| below {RECIPROCAL_FLOOR:g}")
    r0 = DoubleDouble._coerce(1.0) / a0 if _is_dd(a_rows) else 1.0 / a0
    out = [r0]
    for j in range(1, len(a_rows)):
        s = _conv(a_rows, out, j, start=1)
        out.append(-(s * r0))
    return out


def jet_reciprocal(a: Jet) -> Jet:
    """1/a, guarded against a vanishing constant term."""
    return Jet(a.center, _stack(_reciprocal_rows(_rows(a.coeffs))))


@dataclass(frozen=True)
class GevreyParams:
    """Gevrey order s > 1 of the step function; k = 1/(s-1) is its exponent.

    The null-control construction needs s in (1,2), which the planner
    config enforces; the step function itself is well defined for any
    s > 1, and s = 2 (k = 1) is handy in symmetry tests.
    """

    s: float
    k: float = field(init=False)

    def __post_init__(self):
        check_scalar(self.s, "s", gt=1.0)
        object.__setattr__(self, "k", 1.0 / (self.s - 1.0))


def phi(params: GevreyParams, t):
    """Gevrey step: 1 for t <= 0, 0 for t >= 1, smooth and monotone between.

    Evaluates e^{-(1-t)^{-k}} / (e^{-(1-t)^{-k}} + e^{-t^{-k}}) in the
    algebraically identical sigmoid form 1/(1 + e^g),
    g = (1-t)^{-k} - t^{-k}: for k much above ~1.5 both exponentials
    underflow simultaneously mid-interval, while the ratio form never does.
    Accepts scalars or arrays.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t_arr)
    out[t_arr <= 0.0] = 1.0
    out[t_arr >= 1.0] = 0.0
    interior = (t_arr > 0.0) & (t_arr < 1.0)
    u = t_arr[interior]
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        g = (1.0 - u) ** (-params.k) - u ** (-params.k)
        e = np.exp(-np.abs(g))
        out[interior] = np.where(g <= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
    return float(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))


def phi_jet(params: GevreyParams, t, order: int, *, dt=1.0,
            extended: bool = False, max_order: int = DEFAULT_MAX_ORDER) -> Jet:
    """Jet of the step function at t, with inner chain-rule derivative dt.

    For the composite phi((t - t1)/R') pass the already-mapped argument and
    dt = 1/R'; coefficient j then carries its R'^{-j} factor exactly.  ``t``
    may be an array, producing a batched jet over the trailing axis.
    """
    check_int(order, "order", ge=0)
    if order > max_order:
        raise ValueError(f"order {order} exceeds the configured maximum {max_order}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    left = t_arr <= 0.0
    right = t_arr >= 1.0
    boundary = left | right
    # placeholder argument keeps the interior formula well-posed on masked lanes
    u = np.where(boundary, 0.5, t_arr)

    zero = np.zeros_like(u)
    rows_T = [u, np.full_like(u, float(dt))] + [zero] * max(order - 1, 0)
    rows_T = rows_T[: order + 1]
    rows_A = [1.0 - rows_T[0]] + [-r for r in rows_T[1:]]
    if extended:
        rows_T = [DoubleDouble(r) for r in rows_T]
        rows_A = [DoubleDouble(r) for r in rows_A]

    with np.errstate(over="ignore", invalid="ignore", divide="ignore", under="ignore"):
        pa = _pow_rows(rows_A, -params.k)
        pt = _pow_rows(rows_T, -params.k)
        g = [x - y for x, y in zip(pa, pt)]
        g0 = g[0].hi if extended else g[0]
        # sign-flip onto the non-overflowing half: phi = num/(1+E) with
        # E = exp(-|g|); num is 1 on the lower half (t <= 1/2), E above it
        flip = np.where(g0 <= 0.0, 1.0, -1.0)
        e_rows = _exp_rows([r * flip for r in g])
        den = list(e_rows)
        den[0] = den[0] + 1.0
        rec = _reciprocal_rows(den)
        lower = flip > 0.0
        if extended:
            one_r = DoubleDouble(np.ones_like(u))
            zero_r = DoubleDouble.zeros(u.shape)
            num = [dd_where(lower, one_r, e_rows[0])]
            num += [dd_where(lower, zero_r, r) for r in e_rows[1:]]
        else:
            num = [np.where(lower, 1.0, e_rows[0])]
            num += [np.where(lower, 0.0, r) for r in e_rows[1:]]
        rows = [_conv(num, rec, j) for j in range(order + 1)]

    # exact values on the flat regions
    if extended:
        one_r = DoubleDouble(np.ones_like(u))
        zero_r = DoubleDouble.zeros(u.shape)
        rows[0] = dd_where(left, one_r, dd_where(right, zero_r, rows[0]))
        rows[1:] = [dd_where(boundary, zero_r, r) for r in rows[1:]]
    else:
        rows[0] = np.where(left, 1.0, np.where(right, 0.0, rows[0]))
        rows[1:] = [np.where(boundary, 0.0, r) for r in rows[1:]]

    coeffs = _stack(rows)
    if np.ndim(t) == 0:
        if extended:
            coeffs = DoubleDouble(coeffs.hi[:, 0], coeffs.lo[:, 0])
        else:
            coeffs = coeffs[:, 0]
        return Jet(float(t), coeffs)
    return Jet(np.asarray(t, dtype=float), coeffs)
