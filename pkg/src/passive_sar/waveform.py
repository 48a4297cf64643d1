"""Transmit-waveform coefficient vectors, generators, and constraint projection.

Waveform samples live on the same flattened (frequency, slow-time) grid as the
measurements.  A slow-time stationary waveform is a length-I frequency profile
tiled J times, so entry j*I + i equals entry i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

QPSK_PHASES = np.pi / 4.0 + np.arange(4) * np.pi / 2.0


@dataclass
class WaveformCoefficients:
    values: np.ndarray  # (M,) complex128
    stationary: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128).reshape(-1)

    def __len__(self) -> int:
        return len(self.values)


@dataclass
class WaveformBasis:
    """Linear expansion w = sum_k coefficients[k] * basis_vectors[k]."""

    basis_vectors: np.ndarray  # (K, M) complex
    coefficients: np.ndarray  # (K,) complex

    def __post_init__(self):
        self.basis_vectors = np.atleast_2d(np.asarray(self.basis_vectors, dtype=np.complex128))
        self.coefficients = np.asarray(self.coefficients, dtype=np.complex128).reshape(-1)
        if len(self.coefficients) != len(self.basis_vectors):
            raise ValueError("one coefficient per basis vector required")


def as_values(w) -> np.ndarray:
    """Complex value vector of a WaveformCoefficients or a bare array."""
    if isinstance(w, WaveformCoefficients):
        return w.values
    return np.asarray(w, dtype=np.complex128).reshape(-1)


def generate_qpsk(frequency_count: int, slow_time_count: int, seed: int) -> WaveformCoefficients:
    """Draw an i.i.d. uniform QPSK frequency profile and tile it over slow time.

    Symbols sit at the four unit-circle phases pi/4 + k*pi/2.  The profile is
    static in slow time: entry j*I + i equals entry i for every j.
    """
    if frequency_count < 1 or slow_time_count < 1:
        raise ValueError("counts must be >= 1")
    rng = np.random.default_rng(seed)
    symbols = np.exp(1j * QPSK_PHASES[rng.integers(0, 4, frequency_count)])
    return WaveformCoefficients(np.tile(symbols, slow_time_count), stationary=True)


def synthesize_from_basis(basis: WaveformBasis) -> WaveformCoefficients:
    """Materialize the coefficient vector of a basis expansion."""
    if len(basis.coefficients) == 0:
        raise ValueError("empty waveform basis")
    return WaveformCoefficients(basis.coefficients @ basis.basis_vectors)


def project_unit_modulus(w):
    """Project every entry onto the unit circle, preserving phase.

    Zero entries have no defined phase; they map to 1+0j so the iterate stays
    inside the constraint set.  Input type (coefficients object or bare array)
    is preserved.
    """
    vals = as_values(w)
    mags = np.abs(vals)
    out = np.where(mags == 0.0, 1.0 + 0.0j, vals / np.where(mags == 0.0, 1.0, mags))
    if isinstance(w, WaveformCoefficients):
        return WaveformCoefficients(out, stationary=w.stationary)
    return out


def init_all_ones(length: int) -> WaveformCoefficients:
    """Flat real spectrum of all ones; the standard training initializer."""
    if length < 1:
        raise ValueError("length must be >= 1")
    return WaveformCoefficients(np.ones(length, dtype=np.complex128), stationary=True)
