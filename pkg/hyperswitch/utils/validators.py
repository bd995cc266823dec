from __future__ import annotations

from typing import Any

import numpy as np

from hyperswitch.exceptions import DimensionMismatch


def as_matrix(obj: Any, n: int | None = None, name: str = "matrix") -> np.ndarray:
    """Coerce a row-major nested list (or scalar for n = 1) into a float matrix.

    Args:
        obj: Nested list, numpy array or scalar
        n: Expected square dimension, if known
        name: Label used in error messages

    Returns:
        2-D float array

    Raises:
        DimensionMismatch: If the array is not square or not n x n
    """
    arr = np.array(obj, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1 and n is not None and arr.size == n and n > 1:
        # A vector stands for a diagonal matrix.
        arr = np.diag(arr)
    elif arr.ndim == 1 and arr.size == 1:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"{name} must be {n}x{n}, got {arr.shape[0]}x{arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name} contains non-finite entries")
    return arr


def as_vector(obj: Any, n: int | None = None, name: str = "vector") -> np.ndarray:
    """Coerce a list (or a diagonal matrix) into a float vector of length n."""
    arr = np.array(obj, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    elif arr.ndim == 2 and arr.shape[0] == arr.shape[1]:
        arr = np.diag(arr).copy()
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.size != n:
        raise DimensionMismatch(f"{name} must have {n} entries, got {arr.size}")
    return arr


def is_diagonal(M: np.ndarray, tol: float = 0.0) -> bool:
    """True if every off-diagonal entry is at most tol in magnitude."""
    off = M - np.diag(np.diag(M))
    return bool(np.max(np.abs(off), initial=0.0) <= tol)
