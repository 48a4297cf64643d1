"""Bistatic acquisition geometry and the sampling grids built on it.

A stationary transmitter illuminates a flat scene (all scatterers at z = 0)
while a single receiver moves along a circular trajectory at constant height.
Fast-time frequency and slow-time aperture position are sampled uniformly;
measurements are flattened slow-time-major, m = j * I + i, with i indexing
frequency.  Pixels are row-major over a square grid centered at the origin.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s, exact SI value

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ImagingGeometry:
    """Transmitter/receiver layout and the transmitted band.

    All quantities are SI: meters, Hz, radians.  ``slow_time_interval`` is the
    aperture arc [s1, s2); sampling excludes the right endpoint so a full
    [0, 2*pi) interval wraps cleanly around the circle.
    """

    transmitter_position: np.ndarray  # (3,) meters
    receiver_radius: float  # meters
    receiver_height: float  # meters
    slow_time_interval: tuple = (0.0, TWO_PI)  # radians
    center_frequency: float = 760e6  # Hz
    bandwidth: float = 8e6  # Hz
    speed_of_light: float = SPEED_OF_LIGHT  # m/s

    def __post_init__(self):
        pos = np.asarray(self.transmitter_position, dtype=float).reshape(3).copy()
        pos.setflags(write=False)
        object.__setattr__(self, "transmitter_position", pos)
        s1, s2 = self.slow_time_interval
        if self.receiver_radius <= 0:
            raise ValueError("receiver_radius must be positive")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if not s1 < s2:
            raise ValueError("slow_time_interval must satisfy s1 < s2")


def receiver_position(geometry: ImagingGeometry, s):
    """Receiver location at slow time ``s`` (radians along the circular track).

    Accepts a scalar or an array of slow times; returns shape (..., 3).
    """
    s = np.asarray(s, dtype=float)
    r = geometry.receiver_radius
    return np.stack(
        [r * np.cos(s), r * np.sin(s), np.full_like(s, geometry.receiver_height)],
        axis=-1,
    )


def bistatic_range(geometry: ImagingGeometry, s, x):
    """Transmitter-to-scatterer plus scatterer-to-receiver path length.

    ``x`` may be a single 3-vector or an (N, 3) stack of scatterer positions.
    """
    x = np.asarray(x, dtype=float)
    to_tx = np.linalg.norm(geometry.transmitter_position - x, axis=-1)
    to_rx = np.linalg.norm(receiver_position(geometry, s) - x, axis=-1)
    return to_tx + to_rx


@dataclass(frozen=True)
class SamplingGrid:
    """Uniform slow-time/frequency samples and the scene pixel lattice."""

    geometry: ImagingGeometry
    slow_time_samples: np.ndarray  # (J,) radians
    frequency_samples: np.ndarray  # (I,) rad/s
    pixel_positions: np.ndarray  # (N, 3) meters, z = 0, row-major
    scene_extent: float  # meters
    pixels_per_side: int

    def __post_init__(self):
        for name in ("slow_time_samples", "frequency_samples", "pixel_positions"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def slow_time_count(self) -> int:
        return len(self.slow_time_samples)

    @property
    def frequency_count(self) -> int:
        return len(self.frequency_samples)

    @property
    def measurement_count(self) -> int:
        return self.slow_time_count * self.frequency_count

    @property
    def pixel_count(self) -> int:
        return len(self.pixel_positions)

    def measurement_pairs(self):
        """Flattened (omega_m, s_m) arrays in slow-time-major order."""
        omega = np.tile(self.frequency_samples, self.slow_time_count)
        s = np.repeat(self.slow_time_samples, self.frequency_count)
        return omega, s

    def fingerprint(self) -> str:
        """Hex digest identifying this grid (and its geometry) exactly."""
        g = self.geometry
        h = hashlib.sha256()
        for arr in (self.slow_time_samples, self.frequency_samples, self.pixel_positions):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(g.transmitter_position.tobytes())
        scalars = np.array(
            [
                self.scene_extent,
                float(self.pixels_per_side),
                g.receiver_radius,
                g.receiver_height,
                g.center_frequency,
                g.bandwidth,
                g.speed_of_light,
                g.slow_time_interval[0],
                g.slow_time_interval[1],
            ],
            dtype=float,
        )
        h.update(scalars.tobytes())
        return h.hexdigest()


def make_grid(
    geometry: ImagingGeometry,
    pixels_per_side: int = 31,
    slow_time_count: int = 128,
    frequency_count: int = 64,
    scene_extent: float = 620.0,
) -> SamplingGrid:
    """Build uniform sampling grids over the aperture, the band, and the scene.

    Frequencies include both band endpoints; slow times exclude the right
    endpoint of the aperture interval.  Pixel (row r, col c) maps to index
    n = r * side + c and position ((c - (side-1)/2) * dx, (r - (side-1)/2) * dx, 0)
    with dx = scene_extent / side.
    """
    if pixels_per_side < 1 or slow_time_count < 1 or frequency_count < 1:
        raise ValueError("grid sample counts must be >= 1")
    if scene_extent <= 0:
        raise ValueError("scene_extent must be positive")

    s1, s2 = geometry.slow_time_interval
    slow = s1 + (s2 - s1) * np.arange(slow_time_count) / slow_time_count

    f_lo = geometry.center_frequency - geometry.bandwidth / 2.0
    f_hi = geometry.center_frequency + geometry.bandwidth / 2.0
    omega = TWO_PI * np.linspace(f_lo, f_hi, frequency_count)

    side = pixels_per_side
    spacing = scene_extent / side
    offsets = (np.arange(side) - (side - 1) / 2.0) * spacing
    rows, cols = np.meshgrid(offsets, offsets, indexing="ij")
    pixels = np.column_stack([cols.ravel(), rows.ravel(), np.zeros(side * side)])

    return SamplingGrid(geometry, slow, omega, pixels, float(scene_extent), side)
