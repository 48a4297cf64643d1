"""Synthetic scenes, the resolution phantom, and noisy measurement datasets.

Scenes are real reflectivity images in [0, 1] on a square grid, row-major,
with the (range bin, cross-range bin) convention mapping to (row, column).
Training scenes hold a single axis-aligned unit rectangle; placement and size
ranges follow the 31-pixel reference layout and rescale proportionally for
other grid sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import SamplingGrid
from .sensing import SensingMatrix, apply_forward, build_sensing_matrix
from .waveform import WaveformCoefficients, as_values

# Reference layout at side 31: rectangle sides drawn from {1..6}, every
# occupied pixel kept inside rows/cols [3, 28].
REFERENCE_SIDE = 31
REFERENCE_MARGIN = (3, 28)
REFERENCE_MAX_DIM = 6

PHANTOM_STRONG = [(15, 10), (15, 12), (17, 10), (17, 12)]  # (row, col), value 1
PHANTOM_WEAK = (12, 17)  # value 0.5
PHANTOM_WEAK_VALUE = 0.5


@dataclass
class SceneImage:
    values: np.ndarray  # (N,) float reflectivities in [0, 1]
    side: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1)
        if len(self.values) != self.side * self.side:
            raise ValueError("values length must equal side * side")

    def as_matrix(self) -> np.ndarray:
        return self.values.reshape(self.side, self.side)

    def support_mask(self) -> np.ndarray:
        return self.values > 0


def gen_random_scene(side: int, seed: int) -> SceneImage:
    """One unit-reflectivity rectangle on a zero background, seeded.

    Integer side lengths are uniform on {1..max_dim}; the top-left corner is
    uniform over placements that keep the rectangle inside the margin box.
    """
    if side < 2:
        raise ValueError("side must be >= 2")
    scale = side / REFERENCE_SIDE
    lo = int(round(REFERENCE_MARGIN[0] * scale))
    hi = min(int(round(REFERENCE_MARGIN[1] * scale)), side - 1)
    max_dim = max(1, int(round(REFERENCE_MAX_DIM * scale)))
    max_dim = min(max_dim, hi - lo + 1)

    rng = np.random.default_rng(seed)
    height = int(rng.integers(1, max_dim + 1))
    width = int(rng.integers(1, max_dim + 1))
    row = int(rng.integers(lo, hi - height + 2))
    col = int(rng.integers(lo, hi - width + 2))

    img = np.zeros((side, side))
    img[row:row + height, col:col + width] = 1.0
    return SceneImage(img.ravel(), side)


def gen_point_phantom(side: int) -> SceneImage:
    """Four unit point targets on a 2x2 bin lattice plus one weak reflector."""
    if side != REFERENCE_SIDE:
        raise ValueError(f"phantom is defined on a {REFERENCE_SIDE}-pixel grid")
    img = np.zeros((side, side))
    for row, col in PHANTOM_STRONG:
        img[row, col] = 1.0
    img[PHANTOM_WEAK] = PHANTOM_WEAK_VALUE
    return SceneImage(img.ravel(), side)


def add_noise(data, snr_db: float, seed: int) -> np.ndarray:
    """Add circular complex white Gaussian noise at the given total SNR.

    Per-entry variance is ||d||^2 / (M * 10^(snr_db/10)) so the ratio of total
    signal power to expected total noise power equals the target.
    """
    d = np.asarray(data, dtype=np.complex128).reshape(-1)
    power = float(np.vdot(d, d).real)
    if power == 0.0:
        raise ValueError("cannot set an SNR against an all-zero signal")
    sigma2 = power / (len(d) * 10.0 ** (snr_db / 10.0))
    rng = np.random.default_rng(seed)
    noise = np.sqrt(sigma2 / 2.0) * (rng.standard_normal(len(d)) + 1j * rng.standard_normal(len(d)))
    return d + noise


@dataclass
class Dataset:
    samples: np.ndarray  # (T, M) complex measurements
    snr_db: float | None  # None means noiseless
    scene_seeds: np.ndarray  # (T,) generator seeds (unused entries in test mode)
    noise_seeds: np.ndarray  # (T,)
    scenes: list  # T SceneImage (shared object in test mode)
    waveform_truth: WaveformCoefficients
    mode: str  # "train" or "test"

    @property
    def sample_count(self) -> int:
        return len(self.samples)


def make_dataset(
    grid: SamplingGrid,
    waveform_truth,
    count: int,
    snr_db: float | None,
    seed: int,
    sensing: SensingMatrix | None = None,
    mode: str = "train",
    scene: SceneImage | None = None,
) -> Dataset:
    """Simulate measurements d = diag(w_t) F rho + noise for training or test.

    Train mode draws ``count`` independent random scenes; test mode reuses one
    scene (the phantom by default) under ``count`` independent noise
    realizations.  ``snr_db=None`` disables noise.  All randomness derives
    from ``seed``, so a dataset regenerates bit-identically.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if mode not in ("train", "test"):
        raise ValueError("mode must be 'train' or 'test'")
    if sensing is None:
        sensing = build_sensing_matrix(grid)
    if not isinstance(waveform_truth, WaveformCoefficients):
        waveform_truth = WaveformCoefficients(waveform_truth)

    rng = np.random.default_rng(seed)
    scene_seeds = rng.integers(0, 2**63, size=count)
    noise_seeds = rng.integers(0, 2**63, size=count)

    if mode == "train":
        scenes = [gen_random_scene(grid.pixels_per_side, int(s)) for s in scene_seeds]
    else:
        if scene is None:
            scene = gen_point_phantom(grid.pixels_per_side)
        scenes = [scene] * count

    samples = np.empty((count, grid.measurement_count), dtype=np.complex128)
    for t, sc in enumerate(scenes):
        clean = apply_forward(sensing, waveform_truth, sc.values)
        samples[t] = clean if snr_db is None else add_noise(clean, snr_db, int(noise_seeds[t]))

    return Dataset(
        samples=samples,
        snr_db=snr_db,
        scene_seeds=scene_seeds,
        noise_seeds=noise_seeds,
        scenes=scenes,
        waveform_truth=waveform_truth,
        mode=mode,
    )
