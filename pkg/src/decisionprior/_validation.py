"""Input validation helpers used by the estimator-facing API."""

from __future__ import annotations

import numpy as np

from .errors import DataError, NotFittedError


def as_float_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array with finite entries."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DataError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def as_float_vector(x, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).ravel()
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def as_binary_vector(y, n_expected: int | None = None, name: str = "y") -> np.ndarray:
    """Coerce to a 1-D vector of {0, 1} integers."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise DataError(f"{name} must be 1-dimensional, got ndim={arr.ndim}")
    values = np.unique(arr)
    if not np.all(np.isin(values, (0, 1))):
        raise DataError(f"{name} must contain only 0/1 labels, got values {values}")
    if n_expected is not None and arr.shape[0] != n_expected:
        raise DataError(
            f"{name} has length {arr.shape[0]}, expected {n_expected}"
        )
    return arr.astype(np.int8)


def check_is_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first"
        )
