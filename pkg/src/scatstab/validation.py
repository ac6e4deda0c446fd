"""Input checks shared by the estimator wrapper."""

import numbers

import numpy as np
from sklearn.utils import check_array

__all__ = ["check_signal_batch", "check_power_of_two", "check_scalar_in"]


def check_power_of_two(n, name="length"):
    if not isinstance(n, numbers.Integral) or n < 2 or n & (n - 1):
        raise ValueError(f"{name} must be a power of two >= 2, got {n!r}")
    return int(n)


def check_signal_batch(X, length=None):
    """Real 2-D array of signals, one per row, with a power-of-two row length."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_min_samples=1,
                    ensure_all_finite=True)
    check_power_of_two(X.shape[1], "number of samples per signal")
    if length is not None and X.shape[1] != length:
        raise ValueError(f"X has {X.shape[1]} samples per signal, expected {length}")
    return X


def check_scalar_in(value, name, choices):
    if value not in choices:
        raise ValueError(f"{name} must be one of {sorted(choices)}, got {value!r}")
    return value
