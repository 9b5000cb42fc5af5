"""Small input-validation helpers used by the estimators and functions."""

from __future__ import annotations

import numpy as np

DISTANCE_METRICS = ("projected_euclidean", "haversine")


def as_float_array(values, name: str, *, ndim: int | None = None) -> np.ndarray:
    """Coerce to a float64 ndarray, rejecting non-finite entries."""
    arr = np.asarray(values, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_nonnegative(arr: np.ndarray, name: str) -> np.ndarray:
    if np.any(arr < 0):
        raise ValueError(f"{name} contains negative values")
    return arr


def check_length(arr: np.ndarray, n: int, name: str) -> np.ndarray:
    if arr.shape[0] != n:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {n}")
    return arr


def check_metric(metric: str) -> str:
    if metric not in DISTANCE_METRICS:
        raise ValueError(
            f"unknown distance metric {metric!r}; expected one of {DISTANCE_METRICS}"
        )
    return metric


def readonly(arr: np.ndarray) -> np.ndarray:
    """Return ``arr`` flagged immutable (shared, not copied)."""
    arr.flags.writeable = False
    return arr
