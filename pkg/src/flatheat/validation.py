"""Small input-validation helpers in the spirit of sklearn's check_* utilities."""

import numbers

import numpy as np


def check_scalar(value, name, *, gt=None, ge=None, lt=None, le=None):
    """Validate a real scalar against open/closed bounds.

    Raises ValueError naming the violated inequality, e.g. ``"tau > 0"``.
    """
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if gt is not None and not value > gt:
        raise ValueError(f"violated: {name} > {gt} (got {name}={value:g})")
    if ge is not None and not value >= ge:
        raise ValueError(f"violated: {name} >= {ge} (got {name}={value:g})")
    if lt is not None and not value < lt:
        raise ValueError(f"violated: {name} < {lt} (got {name}={value:g})")
    if le is not None and not value <= le:
        raise ValueError(f"violated: {name} <= {le} (got {name}={value:g})")
    return value


def check_int(value, name, *, ge=None, le=None):
    """Validate an integer against closed bounds."""
    if not isinstance(value, numbers.Integral) or isinstance(value, bool):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if ge is not None and not value >= ge:
        raise ValueError(f"violated: {name} >= {ge} (got {name}={value})")
    if le is not None and not value <= le:
        raise ValueError(f"violated: {name} <= {le} (got {name}={value})")
    return value


def check_finite_array(values, name, *, min_len=None):
    """Coerce to a 1-D float array and require all entries finite."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if min_len is not None and arr.size < min_len:
        raise ValueError(f"{name} needs at least {min_len} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr
