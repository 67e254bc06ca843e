"""Small input validation helpers shared by the solvers."""

from numbers import Integral

import numpy as np


def check_count(value, name, minimum=0):
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_probability(value, name, open_interval=True):
    value = float(value)
    if open_interval and not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")
    if not open_interval and not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_assignment(s, size):
    """Return ``s`` as a uint8 array of 0/1 bits with length ``size``."""
    arr = np.asarray(s)
    if arr.ndim != 1 or arr.shape[0] != size:
        raise ValueError(f"assignment must have length {size}, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("assignment entries must be 0 or 1")
    return arr.astype(np.uint8)


def check_rng(seed):
    """Turn ``None``, an int, a SeedSequence or a Generator into a Generator."""
    return np.random.default_rng(seed)
