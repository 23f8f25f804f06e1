"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

import numbers

import numpy as np

from .core import MIN_POPULATION, InvalidConfig


def check_bounds(bounds, dim: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Accept ``(lower, upper)`` arrays or a sequence of ``(low, high)`` pairs."""
    arr = np.asarray(bounds, dtype=float)
    # a 2x2 array is read as pairs only if that reading is a valid box
    if arr.ndim == 2 and arr.shape[1] == 2 and (arr.shape[0] != 2 or np.all(arr[:, 0] < arr[:, 1])):
        lower, upper = arr[:, 0], arr[:, 1]
    elif arr.ndim == 2 and arr.shape[0] == 2:
        lower, upper = arr[0], arr[1]
    else:
        raise InvalidConfig("bounds must be (lower, upper) or a list of (low, high) pairs")
    if dim is not None and lower.size != dim:
        raise InvalidConfig(f"bounds describe {lower.size} dimensions, expected {dim}")
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise InvalidConfig("bounds must be finite")
    if not np.all(lower < upper):
        raise InvalidConfig("every lower bound must be strictly below its upper bound")
    return lower.copy(), upper.copy()


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise InvalidConfig(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_population_size(M) -> int:
    return check_positive_int(M, "population size", MIN_POPULATION)


def check_seed(seed) -> int | None:
    if seed is None:
        return None
    return check_positive_int(seed, "random_state", 0)
