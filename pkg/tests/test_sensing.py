import numpy as np
import pytest

from passive_sar import (
    ConfigError,
    ImagingGeometry,
    apply_adjoint,
    apply_forward,
    bistatic_range,
    build_gram,
    build_sensing_matrix,
    generate_qpsk,
    make_grid,
    max_eigenvalue_estimate,
)
from passive_sar.sensing import SensingMatrix

from conftest import random_measurement, random_unit_waveform


def naive_forward(mat, w, rho):
    out = np.zeros(mat.shape[0], dtype=complex)
    for m in range(mat.shape[0]):
        acc = 0.0 + 0.0j
        for n in range(mat.shape[1]):
            acc += mat[m, n] * rho[n]
        out[m] = w[m] * acc
    return out


def naive_adjoint(mat, w, d):
    out = np.zeros(mat.shape[1], dtype=complex)
    for n in range(mat.shape[1]):
        acc = 0.0 + 0.0j
        for m in range(mat.shape[0]):
            acc += np.conj(mat[m, n]) * np.conj(w[m]) * d[m]
        out[n] = acc
    return out


def test_single_entry_matches_kernel(reference_geometry):
    grid = make_grid(reference_geometry, pixels_per_side=1, slow_time_count=1,
                     frequency_count=1, scene_extent=620.0)
    sensing = build_sensing_matrix(grid)
    omega = grid.frequency_samples[0]
    s = grid.slow_time_samples[0]
    expected = np.exp(
        -1j * omega / reference_geometry.speed_of_light
        * bistatic_range(reference_geometry, s, [0.0, 0.0, 0.0])
    )
    np.testing.assert_allclose(sensing.entries[0, 0], expected, rtol=1e-15)


def test_entries_have_unit_magnitude(tiny_sensing):
    np.testing.assert_allclose(np.abs(tiny_sensing.entries), 1.0, rtol=1e-14)


def test_doubling_frequency_squares_entries(reference_geometry):
    grid1 = make_grid(reference_geometry, 3, 2, 4, 60.0)
    doubled = ImagingGeometry(
        reference_geometry.transmitter_position, 7000.0, 6500.0,
        center_frequency=2 * reference_geometry.center_frequency,
        bandwidth=2 * reference_geometry.bandwidth,
    )
    grid2 = make_grid(doubled, 3, 2, 4, 60.0)
    np.testing.assert_allclose(grid2.frequency_samples, 2 * grid1.frequency_samples, rtol=1e-15)
    f1 = build_sensing_matrix(grid1).entries
    f2 = build_sensing_matrix(grid2).entries
    np.testing.assert_allclose(f2, f1**2, rtol=1e-10)


def test_build_is_deterministic(tiny_grid, tiny_sensing):
    again = build_sensing_matrix(tiny_grid)
    assert np.array_equal(again.entries, tiny_sensing.entries)
    assert again.grid_fingerprint == tiny_sensing.grid_fingerprint


def test_memory_guard(tiny_grid):
    with pytest.raises(ConfigError):
        build_sensing_matrix(tiny_grid, max_entries=10)


def test_forward_zero_scene(tiny_sensing):
    w = random_unit_waveform(12, 0)
    out = apply_forward(tiny_sensing, w, np.zeros(9))
    np.testing.assert_array_equal(out, np.zeros(12, dtype=complex))


def test_forward_unit_impulse_selects_column(tiny_sensing):
    w = np.ones(12, dtype=complex)
    for n in (0, 4, 8):
        rho = np.zeros(9)
        rho[n] = 1.0
        np.testing.assert_allclose(apply_forward(tiny_sensing, w, rho),
                                   tiny_sensing.entries[:, n], rtol=1e-15)


def test_forward_matches_naive_summation():
    rng = np.random.default_rng(11)
    mat = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
    w = random_unit_waveform(6, 1)
    rho = rng.uniform(0, 1, 4)
    got = apply_forward(mat, w, rho)
    np.testing.assert_allclose(got, naive_forward(mat, w, rho), rtol=1e-13)


def test_forward_dimension_mismatch(tiny_sensing):
    with pytest.raises(ValueError):
        apply_forward(tiny_sensing, np.ones(12, dtype=complex), np.zeros(8))
    with pytest.raises(ValueError):
        apply_forward(tiny_sensing, np.ones(11, dtype=complex), np.zeros(9))


def test_adjoint_zero_data(tiny_sensing):
    out = apply_adjoint(tiny_sensing, random_unit_waveform(12, 2), np.zeros(12, dtype=complex))
    np.testing.assert_array_equal(out, np.zeros(9, dtype=complex))


def test_adjoint_identity_on_random_instances():
    rng = np.random.default_rng(5)
    for m, n in [(6, 4), (9, 3), (5, 5), (3, 8)]:
        mat = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        w = random_unit_waveform(m, m)
        rho = rng.standard_normal(n)
        d = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        lhs = np.vdot(d, naive_forward(mat, w, rho))  # <F rho, d> with vdot conjugating lhs arg
        rhs = np.vdot(naive_adjoint(mat, w, d), rho)
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs))


def test_adjoint_matched_filter_peaks_at_true_pixel(small_grid, small_sensing):
    w = generate_qpsk(small_grid.frequency_count, small_grid.slow_time_count, seed=9)
    for n in (0, 7, 12, 24):
        rho = np.zeros(small_grid.pixel_count)
        rho[n] = 1.0
        d = apply_forward(small_sensing, w, rho)
        image = np.abs(apply_adjoint(small_sensing, w, d))
        assert np.argmax(image) == n


def test_gram_zero_step_is_identity(tiny_sensing):
    q = build_gram(tiny_sensing, random_unit_waveform(12, 3), 0.0).entries
    np.testing.assert_array_equal(q, np.eye(9, dtype=complex))


def test_gram_unit_modulus_waveform_independent(tiny_sensing):
    q_ones = build_gram(tiny_sensing, np.ones(12, dtype=complex), 0.01).entries
    q_rand = build_gram(tiny_sensing, random_unit_waveform(12, 4), 0.01).entries
    np.testing.assert_allclose(q_ones, q_rand, atol=1e-15)


def test_gram_matches_naive_computation():
    rng = np.random.default_rng(8)
    mat = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    w = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    alpha = 0.1
    q = build_gram(mat, w, alpha).entries
    expected = np.eye(2, dtype=complex)
    for i in range(2):
        for j in range(2):
            acc = 0.0 + 0.0j
            for m in range(3):
                acc += np.conj(mat[m, i]) * abs(w[m]) ** 2 * mat[m, j]
            expected[i, j] -= alpha * acc
    np.testing.assert_allclose(q, expected, rtol=1e-13)


def test_gram_hermitian_and_spectrum(tiny_sensing):
    alpha = 0.4 / max_eigenvalue_estimate(tiny_sensing, 1e-10)
    q = build_gram(tiny_sensing, np.ones(12, dtype=complex), alpha).entries
    herm_gap = np.max(np.abs(q - q.conj().T)) / np.max(np.abs(q))
    assert herm_gap <= 1e-12
    eigs = np.linalg.eigvalsh(q)
    lam_max = np.linalg.eigvalsh(tiny_sensing.entries.conj().T @ tiny_sensing.entries).max()
    assert eigs.min() >= 1 - alpha * lam_max - 1e-10
    assert eigs.max() <= 1 + 1e-10


def test_max_eigenvalue_identity_like():
    mat = np.eye(5, dtype=complex) * np.exp(1j * 0.7)
    assert max_eigenvalue_estimate(mat, 1e-10) == pytest.approx(1.0, rel=1e-9)


def test_max_eigenvalue_matches_dense_oracle():
    rng = np.random.default_rng(21)
    mat = rng.standard_normal((8, 5)) + 1j * rng.standard_normal((8, 5))
    exact = np.linalg.eigvalsh(mat.conj().T @ mat).max()
    got = max_eigenvalue_estimate(mat, 1e-8)
    assert got == pytest.approx(exact, rel=1e-7)


def test_max_eigenvalue_rank_one_column():
    mat = np.exp(1j * np.linspace(0, 3, 7)).reshape(7, 1)
    assert max_eigenvalue_estimate(mat, 1e-12) == pytest.approx(7.0, rel=1e-11)


def test_max_eigenvalue_rejects_zero_matrix():
    with pytest.raises(ValueError):
        max_eigenvalue_estimate(np.zeros((3, 3), dtype=complex), 1e-6)


def test_sensing_matrix_records_grid_split(tiny_sensing):
    assert tiny_sensing.frequency_count == 4
    assert tiny_sensing.slow_time_count == 3
    assert tiny_sensing.shape == (12, 9)
    assert isinstance(tiny_sensing, SensingMatrix)
