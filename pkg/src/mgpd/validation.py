"""Input validation helpers shared by the library and the estimator API."""

from __future__ import annotations

import numpy as np

from .exceptions import DataError


def as_float_vector(x, name="x", length=None, allow_inf=False) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"{name} must have length {length}, got {arr.shape[0]}")
    if np.any(np.isnan(arr)):
        raise ValueError(f"{name} contains NaN")
    if not allow_inf and np.any(np.isinf(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_float_matrix(X, name="X", ncols=None, allow_inf=False) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if ncols is not None and arr.shape[1] != ncols:
        raise ValueError(f"{name} must have {ncols} columns, got {arr.shape[1]}")
    if np.any(np.isnan(arr)):
        raise DataError(f"{name} contains NaN")
    if not allow_inf and np.any(np.isinf(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def check_positive(x, name="value"):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ValueError(f"{name} must be strictly positive")
    return arr


def as_spd_matrix(cov, name="cov", d=None) -> np.ndarray:
    arr = np.asarray(cov, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if d is not None and arr.shape[0] != d:
        raise ValueError(f"{name} must be {d}x{d}, got {arr.shape}")
    if not np.allclose(arr, arr.T, rtol=1e-10, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    try:
        np.linalg.cholesky(arr)
    except np.linalg.LinAlgError:
        raise ValueError(f"{name} must be positive definite") from None
    return 0.5 * (arr + arr.T)


def check_index(j, d, name="j") -> int:
    j = int(j)
    if not 0 <= j < d:
        raise ValueError(f"{name} must be an index in [0, {d}), got {j}")
    return j


def check_index_set(J, d, name="J") -> tuple:
    idx = tuple(sorted({check_index(j, d, name) for j in J}))
    if not idx:
        raise ValueError(f"{name} must be non-empty")
    return idx


def pairwise_sum(values) -> float:
    """Sum with a fixed pairwise-tree order, bit-stable for a given input order."""
    vals = list(map(float, values))
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = []
        for i in range(0, len(vals) - 1, 2):
            nxt.append(vals[i] + vals[i + 1])
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]
