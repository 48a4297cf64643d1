"""Input validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

import numpy as np


def check_measurements(X, n_features: int | None = None) -> np.ndarray:
    """Coerce measurement input to a finite (T, M) complex128 array.

    A single measurement vector becomes a one-row matrix.
    """
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"measurements must be 1-D or 2-D, got ndim={X.ndim}")
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError("measurements must be nonempty")
    if not np.all(np.isfinite(X.view(np.float64))):
        raise ValueError("measurements contain non-finite values")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} measurement samples per row, got {X.shape[1]}")
    return X


def check_image(rho, n_pixels: int | None = None) -> np.ndarray:
    """Coerce a reflectivity image to a finite nonnegative (N,) float array."""
    rho = np.asarray(rho, dtype=float).reshape(-1)
    if not np.all(np.isfinite(rho)):
        raise ValueError("image contains non-finite values")
    if (rho < 0).any():
        raise ValueError("image values must be nonnegative")
    if n_pixels is not None and rho.shape[0] != n_pixels:
        raise ValueError(f"expected {n_pixels} pixels, got {rho.shape[0]}")
    return rho
