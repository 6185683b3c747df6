"""Vectorized double-double arithmetic (~31 significant digits).

A value is an unevaluated sum hi + lo of two float64 arrays with
|lo| <= 0.5 ulp(hi).  All operations are elementwise and broadcast like
numpy.  This is the extended-precision backend for jet arithmetic: the
high-order derivative stacks cancel far beyond binary64 resolution.

The exponent range is still binary64's: magnitudes below ~1e-290 lose the
lo limb to subnormals and degrade gracefully toward plain double precision.
"""

import numpy as np

_SPLITTER = 134217729.0  # 2^27 + 1, exact in double

_LN2_HI = 6.931471805599453094e-01
_LN2_LO = 2.319046813846299558e-17
_PI_HI = 3.141592653589793116e+00
_PI_LO = 1.224646799147353207e-16


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    # assumes |a| >= |b| componentwise
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLITTER * a
    big = c - a
    hi = c - big
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ahi, alo = _split(a)
    bhi, blo = _split(b)
    err = ((ahi * bhi - p) + ahi * blo + alo * bhi) + alo * blo
    return p, err


class DoubleDouble:
    """Array of double-double numbers; supports +, -, *, / with DD or float64."""

    __slots__ = ("hi", "lo")

    def __init__(self, hi, lo=None):
        self.hi = np.asarray(hi, dtype=np.float64)
        self.lo = np.zeros_like(self.hi) if lo is None else np.asarray(lo, dtype=np.float64)

    @classmethod
    def zeros(cls, shape):
        return cls(np.zeros(shape), np.zeros(shape))

    @classmethod
    def _coerce(cls, x):
        if isinstance(x, DoubleDouble):
            return x
        return cls(np.asarray(x, dtype=np.float64))

    @property
    def shape(self):
        return self.hi.shape

    def copy(self):
        return DoubleDouble(self.hi.copy(), self.lo.copy())

    def to_float(self):
        return self.hi + self.lo

    def isfinite(self):
        return np.isfinite(self.hi) & np.isfinite(self.lo)

    def abs(self):
        sign = np.where(self.hi < 0, -1.0, 1.0)
        return DoubleDouble(self.hi * sign, self.lo * sign)

    def __repr__(self):
        return f"DoubleDouble({self.hi!r}, {self.lo!r})"

    def __neg__(self):
        return DoubleDouble(-self.hi, -self.lo)

    def __add__(self, other):
        o = DoubleDouble._coerce(other)
        s, e = _two_sum(self.hi, o.hi)
        e = e + self.lo + o.lo
        hi, lo = _quick_two_sum(s, e)
        return DoubleDouble(hi, lo)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-DoubleDouble._coerce(other))

    def __rsub__(self, other):
        return DoubleDouble._coerce(other) + (-self)

    def __mul__(self, other):
        o = DoubleDouble._coerce(other)
        p, e = _two_prod(self.hi, o.hi)
        e = e + (self.hi * o.lo + self.lo * o.hi)
        hi, lo = _quick_two_sum(p, e)
        return DoubleDouble(hi, lo)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = DoubleDouble._coerce(other)
        q1 = self.hi / o.hi
        r = self - o * DoubleDouble(q1)
        q2 = r.hi / o.hi
        r = r - o * DoubleDouble(q2)
        q3 = r.hi / o.hi
        s, e = _quick_two_sum(q1, q2)
        hi, lo = _quick_two_sum(s, e + q3)
        return DoubleDouble(hi, lo)

    def __rtruediv__(self, other):
        return DoubleDouble._coerce(other) / self

    # comparisons on the leading limb are enough for branching/masking
    def __lt__(self, other):
        o = DoubleDouble._coerce(other)
        return (self.hi < o.hi) | ((self.hi == o.hi) & (self.lo < o.lo))

    def __gt__(self, other):
        o = DoubleDouble._coerce(other)
        return (self.hi > o.hi) | ((self.hi == o.hi) & (self.lo > o.lo))

    def __le__(self, other):
        return ~self.__gt__(other)

    def __ge__(self, other):
        return ~self.__lt__(other)


def dd_where(cond, a, b):
    a = DoubleDouble._coerce(a)
    b = DoubleDouble._coerce(b)
    return DoubleDouble(np.where(cond, a.hi, b.hi), np.where(cond, a.lo, b.lo))


def dd_exp(x):
    """Elementwise exp of a DoubleDouble.

    Arguments must satisfy hi <= ~709 (no overflow guard here); very negative
    arguments underflow to 0 exactly, matching float64 semantics.
    """
    x = DoubleDouble._coerce(x)
    m = np.round(x.hi / _LN2_HI)
    r = x - DoubleDouble(_LN2_HI, _LN2_LO) * m
    # Taylor of exp(r) with |r| <= ln2/2; 21 terms reach ~1e-32
    acc = DoubleDouble(np.ones_like(x.hi))
    term = DoubleDouble(np.ones_like(x.hi))
    for n in range(1, 22):
        term = term * r / float(n)
        acc = acc + term
    e = np.clip(m, -1080, 1080).astype(np.int32)
    return DoubleDouble(np.ldexp(acc.hi, e), np.ldexp(acc.lo, e))


def dd_log(x):
    """Elementwise log of a positive DoubleDouble (one Newton refinement)."""
    x = DoubleDouble._coerce(x)
    l = np.log(x.hi)
    return DoubleDouble(l) + x * dd_exp(DoubleDouble(-l)) - 1.0


def dd_pow(x, p):
    """x**p for positive x via exp(p*log x)."""
    return dd_exp(dd_log(x) * p)


def dd_pi_squared():
    pi = DoubleDouble(_PI_HI, _PI_LO)
    return pi * pi
