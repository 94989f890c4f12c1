"""Dense vector primitives and lattice operations.

Points are plain 1-d float64 numpy arrays. The helpers here check dimensions
at the boundary instead of trusting callers, since generators and loaders
mix sizes.
"""

import numpy as np


class DimensionError(ValueError):
    """Raised when two vectors (or a vector and a matrix) disagree in size."""


def as_point(x, n=None):
    """Return `x` as a finite 1-d float64 array, optionally of length `n`."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-d vector, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionError(f"expected length {n}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("point has non-finite entries")
    return arr


def _pair(x, y):
    x = as_point(x)
    y = as_point(y)
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    return x, y


def join(x, y):
    """Entrywise maximum ``x v y``."""
    x, y = _pair(x, y)
    return np.maximum(x, y)


def meet(x, y):
    """Entrywise minimum ``x ^ y``."""
    x, y = _pair(x, y)
    return np.minimum(x, y)


def norms(x):
    """Return ``(euclidean, infinity)`` norms of `x`."""
    x = as_point(x)
    if x.size == 0:
        return 0.0, 0.0
    return float(np.linalg.norm(x)), float(np.max(np.abs(x)))


def harmonic_number(T):
    """H_T = sum_{k=1}^T 1/k, summed from the small terms up."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return float(np.sum(1.0 / np.arange(T, 0, -1, dtype=np.float64)))
