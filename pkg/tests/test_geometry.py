import numpy as np
import pytest

from passive_sar import ImagingGeometry, bistatic_range, make_grid, receiver_position


def test_receiver_position_reference_points(reference_geometry):
    np.testing.assert_allclose(receiver_position(reference_geometry, 0.0), [7000.0, 0.0, 6500.0])
    np.testing.assert_allclose(
        receiver_position(reference_geometry, np.pi / 2), [0.0, 7000.0, 6500.0], atol=1e-9
    )
    np.testing.assert_allclose(
        receiver_position(reference_geometry, np.pi), [-7000.0, 0.0, 6500.0], atol=1e-9
    )


def test_receiver_position_constant_norm(reference_geometry):
    expected = np.hypot(7000.0, 6500.0)
    s = np.linspace(0, 2 * np.pi, 57)
    norms = np.linalg.norm(receiver_position(reference_geometry, s), axis=-1)
    np.testing.assert_allclose(norms, expected, rtol=1e-14)


def test_bistatic_range_scene_center(reference_geometry):
    # independent evaluation from the two euclidean norms
    expected = np.sqrt(11200.0**2 + 11200.0**2 + 200.0**2) + np.sqrt(7000.0**2 + 6500.0**2)
    got = bistatic_range(reference_geometry, 0.0, [0.0, 0.0, 0.0])
    np.testing.assert_allclose(got, expected, rtol=1e-15)
    assert abs(got - 25392.9) < 0.1


def test_bistatic_range_at_transmitter(reference_geometry):
    tx = reference_geometry.transmitter_position
    got = bistatic_range(reference_geometry, 0.3, tx)
    expected = np.linalg.norm(receiver_position(reference_geometry, 0.3) - tx)
    np.testing.assert_allclose(got, expected, rtol=1e-15)


def test_bistatic_range_mirror_symmetry_on_x_axis(reference_geometry):
    # the circular track is symmetric under s -> -s for scatterers on the x axis
    geometry = ImagingGeometry([11200.0, 0.0, 200.0], 7000.0, 6500.0,
                               slow_time_interval=(-np.pi, np.pi))
    x = [123.0, 0.0, 0.0]
    for s in (0.2, 1.1, 2.9):
        np.testing.assert_allclose(
            bistatic_range(geometry, s, x), bistatic_range(geometry, -s, x), rtol=1e-15
        )


def test_bistatic_range_triangle_inequality(reference_geometry):
    rng = np.random.default_rng(3)
    for _ in range(50):
        s = rng.uniform(0, 2 * np.pi)
        x = np.append(rng.uniform(-300, 300, 2), 0.0)
        baseline = np.linalg.norm(
            reference_geometry.transmitter_position - receiver_position(reference_geometry, s)
        )
        assert bistatic_range(reference_geometry, s, x) >= baseline - 1e-9


def test_geometry_invariants_enforced():
    with pytest.raises(ValueError):
        ImagingGeometry([0, 0, 0], receiver_radius=-1.0, receiver_height=1.0)
    with pytest.raises(ValueError):
        ImagingGeometry([0, 0, 0], 1.0, 1.0, bandwidth=0.0)
    with pytest.raises(ValueError):
        ImagingGeometry([0, 0, 0], 1.0, 1.0, slow_time_interval=(1.0, 1.0))


def test_make_grid_reference_configuration(reference_geometry):
    grid = make_grid(reference_geometry)
    assert grid.pixel_count == 961
    assert grid.measurement_count == 8192
    assert grid.frequency_count == 64
    assert grid.slow_time_count == 128
    # uniform spacing, right-open aperture
    np.testing.assert_allclose(np.diff(grid.slow_time_samples), 2 * np.pi / 128)
    np.testing.assert_allclose(np.diff(grid.frequency_samples),
                               grid.frequency_samples[1] - grid.frequency_samples[0])


def test_make_grid_single_pixel(reference_geometry):
    grid = make_grid(reference_geometry, pixels_per_side=1, slow_time_count=2,
                     frequency_count=2, scene_extent=620.0)
    np.testing.assert_allclose(grid.pixel_positions, [[0.0, 0.0, 0.0]])


def test_make_grid_frequency_endpoints(reference_geometry):
    grid = make_grid(reference_geometry, pixels_per_side=1, slow_time_count=1,
                     frequency_count=2, scene_extent=620.0)
    np.testing.assert_allclose(
        grid.frequency_samples, [2 * np.pi * 756e6, 2 * np.pi * 764e6], rtol=1e-15
    )


def test_make_grid_rejects_zero_counts(reference_geometry):
    with pytest.raises(ValueError):
        make_grid(reference_geometry, pixels_per_side=0)
    with pytest.raises(ValueError):
        make_grid(reference_geometry, slow_time_count=0)
    with pytest.raises(ValueError):
        make_grid(reference_geometry, frequency_count=0)


def test_measurement_ordering_slow_time_major(tiny_grid):
    omega, s = tiny_grid.measurement_pairs()
    n_freq = tiny_grid.frequency_count
    for j in range(tiny_grid.slow_time_count):
        for i in range(n_freq):
            m = j * n_freq + i
            assert omega[m] == tiny_grid.frequency_samples[i]
            assert s[m] == tiny_grid.slow_time_samples[j]


def test_pixel_grid_row_major_and_centered(reference_geometry):
    grid = make_grid(reference_geometry, pixels_per_side=3, slow_time_count=1,
                     frequency_count=1, scene_extent=60.0)
    # n = row * side + col; x follows the column, y the row
    expected_x = [-20.0, 0.0, 20.0] * 3
    expected_y = [-20.0] * 3 + [0.0] * 3 + [20.0] * 3
    np.testing.assert_allclose(grid.pixel_positions[:, 0], expected_x)
    np.testing.assert_allclose(grid.pixel_positions[:, 1], expected_y)
    np.testing.assert_allclose(grid.pixel_positions[:, 2], 0.0)


def test_fingerprint_distinguishes_grids(reference_geometry, tiny_grid):
    other = make_grid(reference_geometry, pixels_per_side=3, slow_time_count=3,
                      frequency_count=4, scene_extent=61.0)
    assert tiny_grid.fingerprint() != other.fingerprint()
    again = make_grid(reference_geometry, pixels_per_side=3, slow_time_count=3,
                      frequency_count=4, scene_extent=60.0)
    assert tiny_grid.fingerprint() == again.fingerprint()
