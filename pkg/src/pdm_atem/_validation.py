"""Argument checks shared by the estimators and the command line."""

import math

import numpy as np
from sklearn.utils import check_array

from .exceptions import ConfigError
from .hamiltonian import parse_ordering


def check_positions(X):
    """Return sample positions as a 1-D float array.

    Accepts a 1-D array or a single-column 2-D array, as produced by
    ``x.reshape(-1, 1)``.
    """
    arr = np.asarray(X)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, dtype=np.float64, ensure_2d=True)
    if arr.shape[1] != 1:
        raise ValueError(f"positions must have one column, got {arr.shape[1]}")
    return arr[:, 0]


def check_k_list(k_list):
    try:
        ks = [int(k) for k in k_list]
    except (TypeError, ValueError):
        raise ConfigError(f"iteration counts must be integers, got {k_list!r}") from None
    if len(ks) < 2:
        raise ConfigError("at least two iteration counts are needed")
    if any(k < 3 for k in ks):
        raise ConfigError("iteration counts must be at least 3")
    if any(b <= a for a, b in zip(ks, ks[1:])):
        raise ConfigError("iteration counts must be strictly ascending")
    return ks


def check_range(energy_range):
    try:
        lo, hi = (float(v) for v in energy_range)
    except (TypeError, ValueError):
        raise ConfigError(f"energy range must be two numbers, got {energy_range!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ConfigError(f"energy range [{lo}, {hi}] is empty")
    return lo, hi


def check_ordering(ordering):
    try:
        return parse_ordering(ordering)
    except (ValueError, TypeError) as err:
        raise ConfigError(str(err)) from None


def check_precision(precision):
    if precision not in ("double", "dd"):
        raise ConfigError(f"precision must be 'double' or 'dd', got {precision!r}")
    return precision
