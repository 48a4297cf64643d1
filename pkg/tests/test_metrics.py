import numpy as np
import pytest

from passive_sar import (
    contrast,
    cross_section,
    data_mismatch,
    decode,
    forward_encode,
    gen_point_phantom,
    generate_qpsk,
    image_error,
    loss,
    make_network_params,
    max_eigenvalue_estimate,
    waveform_error,
)
from passive_sar.scenes import SceneImage

from conftest import random_measurement, random_unit_waveform


@pytest.fixture()
def small_params(small_sensing):
    alpha = 0.5 / max_eigenvalue_estimate(small_sensing, 1e-8)
    return make_network_params(small_sensing, random_unit_waveform(48, 1), alpha, 10.0, 2)


def test_data_mismatch_perfect_synthesis(small_params):
    rho = np.random.default_rng(2).uniform(0, 1, 25)
    d = decode(small_params, rho)
    assert data_mismatch(small_params, rho, d) == pytest.approx(0.0, abs=1e-25)


def test_data_mismatch_zero_image_is_one(small_params):
    d = random_measurement(48, 3)
    assert data_mismatch(small_params, np.zeros(25), d) == pytest.approx(1.0)


def test_data_mismatch_matches_naive(small_params):
    rng = np.random.default_rng(4)
    rho = rng.uniform(0, 1, 25)
    d = random_measurement(48, 5)
    naive = loss(decode(small_params, rho), d) / float(np.vdot(d, d).real)
    assert data_mismatch(small_params, rho, d) == pytest.approx(naive, rel=1e-12)


def test_data_mismatch_rejects_zero_data(small_params):
    with pytest.raises(ValueError):
        data_mismatch(small_params, np.zeros(25), np.zeros(48, dtype=complex))


def test_image_error_cases():
    rho = np.array([1.0, 0.0, 2.0])
    assert image_error(rho, rho) == 0.0
    assert image_error(np.zeros(3), rho) == pytest.approx(1.0)
    assert image_error(2 * rho, rho) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        image_error(rho, np.zeros(3))


def test_contrast_exact_case():
    # fg mean 1.0; bg = [0.0, 0.2]: mean 0.1, population variance 0.01
    img = np.array([1.0, 1.0, 0.0, 0.2])
    mask = np.array([True, True, False, False])
    assert contrast(img, mask) == pytest.approx(81.0, rel=1e-12)


def test_contrast_degenerate_background():
    img = np.array([1.0, 0.5, 0.5])
    mask = np.array([True, False, False])
    with pytest.raises(ValueError):
        contrast(img, mask)
    with pytest.raises(ValueError):
        contrast(img, np.array([True, True, True]))


def test_contrast_permutation_invariant():
    rng = np.random.default_rng(6)
    img = rng.uniform(0, 1, 40)
    mask = np.zeros(40, dtype=bool)
    mask[:8] = True
    base = contrast(img, mask)
    perm_fg = np.concatenate([rng.permutation(img[:8]), img[8:]])
    perm_bg = np.concatenate([img[:8], rng.permutation(img[8:])])
    assert contrast(perm_fg, mask) == pytest.approx(base, rel=1e-12)
    assert contrast(perm_bg, mask) == pytest.approx(base, rel=1e-12)


def test_waveform_error_cases():
    w = random_unit_waveform(32, 7)
    assert waveform_error(w, w) == 0.0
    assert waveform_error(w, -w) == pytest.approx(4.0, rel=1e-12)
    with pytest.raises(ValueError):
        waveform_error(np.zeros(4, dtype=complex), w[:4])


def test_waveform_error_all_ones_baseline():
    w_t = generate_qpsk(4096, 1, seed=8)
    assert waveform_error(w_t, np.ones(4096, dtype=complex)) == pytest.approx(2.0, abs=0.15)


def test_cross_section_phantom_row():
    phantom = gen_point_phantom(31)
    cs = cross_section(phantom, "row", 15)
    assert np.count_nonzero(cs.values) == 2
    assert cs.peak == 1.0
    np.testing.assert_array_equal(np.nonzero(cs.values)[0], [10, 12])


def test_cross_section_zero_row():
    phantom = gen_point_phantom(31)
    cs = cross_section(phantom, "row", 0)
    assert cs.peak == 0.0
    assert cs.background_mean == 0.0


def test_cross_section_log_transform():
    img = SceneImage(np.array([1.0, 0.1, 0.0, 0.0]), 2)
    cs = cross_section(img, "row", 0, log10=True)
    np.testing.assert_allclose(cs.values, [0.0, -1.0], rtol=1e-12)
    # summary stays linear
    assert cs.peak == 1.0


def test_cross_section_mask_excludes_targets():
    phantom = gen_point_phantom(31)
    cs = cross_section(phantom, "row", 15, target_mask=phantom.support_mask())
    assert cs.background_mean == 0.0
    cs_nomask = cross_section(phantom, "row", 15)
    assert cs_nomask.background_mean == pytest.approx(2.0 / 31)


def test_cross_section_column_axis():
    phantom = gen_point_phantom(31)
    cs = cross_section(phantom, "column", 17)
    np.testing.assert_array_equal(np.nonzero(cs.values)[0], [12])
    assert cs.peak == 0.5


def test_cross_section_index_out_of_range():
    phantom = gen_point_phantom(31)
    with pytest.raises(ValueError):
        cross_section(phantom, "row", 31)
    with pytest.raises(ValueError):
        cross_section(phantom, "diagonal", 3)
