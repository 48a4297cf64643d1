"""Discretized forward model: the phase-kernel sensing matrix and its products.

The sensing matrix has entries exp(-1j * (omega_m / c0) * R(s_m, x_n)) built
from the exact bistatic range, so every entry has unit magnitude.  The full
forward map is d = diag(w) @ F @ rho; its adjoint F^H diag(conj(w)) d is the
matched-filter backprojection image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError
from .geometry import SamplingGrid, receiver_position
from .waveform import as_values

# Refuse to materialize matrices above this many complex128 entries (~1 GiB).
DEFAULT_MAX_ENTRIES = 1 << 26


@dataclass(frozen=True)
class SensingMatrix:
    entries: np.ndarray  # (M, N) complex128, unit-magnitude entries
    grid_fingerprint: str = ""
    frequency_count: int = 0  # I; 0 when built from a bare matrix
    slow_time_count: int = 0  # J

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True)
class GramOperator:
    """Layer weight matrix I - alpha * F^H diag(|w|^2) F; Hermitian."""

    entries: np.ndarray  # (N, N) complex128
    step_size: float


def matrix_of(sensing) -> np.ndarray:
    """Entry matrix of a SensingMatrix or a bare 2-D array."""
    if isinstance(sensing, SensingMatrix):
        return sensing.entries
    return np.asarray(sensing, dtype=np.complex128)


def build_sensing_matrix(grid: SamplingGrid, max_entries: int = DEFAULT_MAX_ENTRIES) -> SensingMatrix:
    """Sample the bistatic phase kernel over the grid, row-parallel over slow time.

    Deterministic for a given grid.  Raises ConfigError when M * N exceeds
    ``max_entries`` (a memory guard; the cap is a configuration choice).
    """
    geometry = grid.geometry
    n_freq, n_slow, n_pix = grid.frequency_count, grid.slow_time_count, grid.pixel_count
    total = grid.measurement_count * n_pix
    if total > max_entries:
        raise ConfigError(
            f"sensing matrix {grid.measurement_count}x{n_pix} needs {total} complex "
            f"entries, above the configured cap of {max_entries}"
        )

    pixels = grid.pixel_positions
    tx_range = np.linalg.norm(pixels - geometry.transmitter_position, axis=1)
    wavenumbers = grid.frequency_samples / geometry.speed_of_light  # rad/m

    entries = np.empty((grid.measurement_count, n_pix), dtype=np.complex128)
    for j, s in enumerate(grid.slow_time_samples):
        rx = receiver_position(geometry, s)
        ranges = tx_range + np.linalg.norm(pixels - rx, axis=1)
        entries[j * n_freq:(j + 1) * n_freq] = np.exp(-1j * np.outer(wavenumbers, ranges))
    return SensingMatrix(entries, grid.fingerprint(), n_freq, n_slow)


def apply_forward(sensing, waveform, scene) -> np.ndarray:
    """Forward map diag(w) @ F @ rho."""
    mat = matrix_of(sensing)
    w = as_values(waveform)
    rho = np.asarray(scene).reshape(-1)
    if rho.shape[0] != mat.shape[1]:
        raise ValueError(f"scene length {rho.shape[0]} != pixel count {mat.shape[1]}")
    if w.shape[0] != mat.shape[0]:
        raise ValueError(f"waveform length {w.shape[0]} != measurement count {mat.shape[0]}")
    return w * (mat @ rho)


def apply_adjoint(sensing, waveform, data) -> np.ndarray:
    """Adjoint map F^H @ diag(conj(w)) @ d (matched-filter backprojection)."""
    mat = matrix_of(sensing)
    w = as_values(waveform)
    d = np.asarray(data, dtype=np.complex128).reshape(-1)
    if d.shape[0] != mat.shape[0]:
        raise ValueError(f"data length {d.shape[0]} != measurement count {mat.shape[0]}")
    if w.shape[0] != mat.shape[0]:
        raise ValueError(f"waveform length {w.shape[0]} != measurement count {mat.shape[0]}")
    return mat.conj().T @ (np.conj(w) * d)


def build_gram(sensing, waveform, step_size: float) -> GramOperator:
    """Dense N x N weight matrix I - alpha * F^H diag(|w|^2) F.

    Under the unit-modulus constraint |w_m| = 1 this reduces to
    I - alpha * F^H F and does not depend on the waveform at all, so it is
    computed once per training run and cached.
    """
    mat = matrix_of(sensing)
    w = as_values(waveform)
    if w.shape[0] != mat.shape[0]:
        raise ValueError(f"waveform length {w.shape[0]} != measurement count {mat.shape[0]}")
    if step_size < 0:
        raise ValueError("step_size must be nonnegative")
    n = mat.shape[1]
    weighted = (np.abs(w) ** 2)[:, None] * mat
    q = np.eye(n, dtype=np.complex128) - step_size * (mat.conj().T @ weighted)
    return GramOperator(q, float(step_size))


def max_eigenvalue_estimate(sensing, tolerance: float = 1e-6, max_iterations: int = 50000) -> float:
    """Largest eigenvalue of F^H F by power iteration on the matrix-free product.

    Stops when the eigen-residual ||F^H F v - lam v|| falls below
    tolerance * lam, which bounds the eigenvalue error by the same amount for
    a Hermitian operator.  Raises NumericalError if the iteration cap is hit.
    """
    mat = matrix_of(sensing)
    if mat.size == 0 or not np.any(mat):
        raise ValueError("cannot estimate eigenvalues of an all-zero matrix")
    rng = np.random.default_rng(0)
    n = mat.shape[1]
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(max_iterations):
        u = mat.conj().T @ (mat @ v)
        lam = float(np.real(np.vdot(v, u)))
        if lam > 0 and np.linalg.norm(u - lam * v) <= tolerance * lam:
            return lam
        norm_u = np.linalg.norm(u)
        if norm_u == 0:
            raise NumericalError("power iteration collapsed onto the null space")
        v = u / norm_u
    raise NumericalError(f"power iteration did not converge in {max_iterations} iterations")
