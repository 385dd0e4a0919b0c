"""Small input-validation helpers shared by the public entry points."""

from __future__ import annotations

import numpy as np


def as_point_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce ``X`` to a 2-D float64 matrix of finite values.

    Raises ``ValueError`` on empty input, wrong dimensionality or
    non-finite entries.
    """
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array of shape (n_points, n_dims), got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must contain at least one point and one dimension, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite values")
    return arr


def as_label_vector(labels, n: int | None = None, name: str = "labels") -> np.ndarray:
    """Coerce ``labels`` to a 1-D int64 vector, optionally checking its length."""
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got ndim={arr.ndim}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {n}")
    return arr.astype(np.int64)


def check_same_length(a: np.ndarray, b: np.ndarray, what: str = "inputs") -> None:
    if len(a) != len(b):
        raise ValueError(f"{what} have mismatched lengths: {len(a)} vs {len(b)}")
