import numpy as np
import pytest

from passive_sar import ImagingGeometry, build_sensing_matrix, make_grid


@pytest.fixture(scope="session")
def reference_geometry():
    return ImagingGeometry(
        transmitter_position=[11200.0, 11200.0, 200.0],
        receiver_radius=7000.0,
        receiver_height=6500.0,
    )


@pytest.fixture(scope="session")
def tiny_grid(reference_geometry):
    # M = 3 * 4 = 12 measurements, N = 9 pixels
    return make_grid(reference_geometry, pixels_per_side=3, slow_time_count=3,
                     frequency_count=4, scene_extent=60.0)


@pytest.fixture(scope="session")
def tiny_sensing(tiny_grid):
    return build_sensing_matrix(tiny_grid)


@pytest.fixture(scope="session")
def small_grid(reference_geometry):
    # 5x5 scene, M = 6 * 8 = 48: big enough for matched-filter behaviour
    return make_grid(reference_geometry, pixels_per_side=5, slow_time_count=6,
                     frequency_count=8, scene_extent=100.0)


@pytest.fixture(scope="session")
def small_sensing(small_grid):
    return build_sensing_matrix(small_grid)


def random_unit_waveform(m, seed):
    rng = np.random.default_rng(seed)
    return np.exp(1j * rng.uniform(0, 2 * np.pi, m))


def random_measurement(m, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(m) + 1j * rng.standard_normal(m)
