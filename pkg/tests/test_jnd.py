import dataclasses

import numpy as np
import pytest

from jndfilter import dct, jnd
from jndfilter.image import ImagePlane, pad_to_blocks, tile_blocks
from jndfilter.testimages import synthetic_natural

FLAT_LA = jnd.LaParams(dark_knee=-1.0, bright_knee=256.0)  # plateau covers 0..255


class TestCsf:
    def test_dc_is_finite_positive(self):
        value = jnd.csf_base(0, 0)
        assert np.isfinite(value) and value > 0

    def test_all_positions_positive(self):
        table = jnd.csf_base_table()
        assert table.shape == (8, 8)
        assert np.all(np.isfinite(table)) and np.all(table > 0)

    def test_high_frequency_threshold_dominates(self):
        assert jnd.csf_base(7, 7) >= jnd.csf_base(1, 1)

    def test_threshold_nondecreasing_along_diagonal(self):
        diag = [jnd.csf_base(i, i) for i in range(1, 8)]
        assert all(b >= a for a, b in zip(diag, diag[1:]))

    def test_doubling_distance_ratio_doubles_frequency(self):
        u, v = np.mgrid[0:8, 0:8]
        near = jnd.CsfParams(distance_ratio=2.0)
        far = jnd.CsfParams(distance_ratio=4.0)
        assert np.array_equal(
            jnd.spatial_frequency(u, v, far), 2.0 * jnd.spatial_frequency(u, v, near)
        )

    def test_oblique_raises_diagonal_threshold_only(self):
        with_oblique = jnd.CsfParams(oblique=0.6)
        without = jnd.CsfParams(oblique=1.0)
        assert jnd.csf_base(4, 4, with_oblique) > jnd.csf_base(4, 4, without)
        assert jnd.csf_base(4, 0, with_oblique) == jnd.csf_base(4, 0, without)
        assert jnd.csf_base(0, 4, with_oblique) == jnd.csf_base(0, 4, without)


class TestLuminanceAdaptation:
    def test_plateau_anchored_at_one(self):
        assert jnd.luminance_adaptation(128.0) == 1.0
        assert jnd.luminance_adaptation(60.0) == 1.0
        assert jnd.luminance_adaptation(170.0) == 1.0

    def test_dark_end_above_one(self):
        assert jnd.luminance_adaptation(0.0) > 1.0

    def test_u_shape(self):
        f = jnd.luminance_adaptation
        assert f(0.0) >= f(128.0)
        assert f(255.0) >= f(128.0)

    def test_everywhere_positive(self):
        m = np.linspace(0, 255, 256)
        factors = jnd.luminance_adaptation(m)
        assert np.all(factors >= 1.0)


class TestClassifier:
    def test_constant_block_is_plane(self):
        coeffs = dct.dct8_forward(np.full((8, 8), 128.0))
        assert jnd.classify_block(coeffs).label == "plane"

    def test_step_edge_is_edge(self):
        block = np.zeros((8, 8))
        block[:, 4:] = 255.0
        got = jnd.classify_block(dct.dct8_forward(block))
        assert got.label == "edge"
        assert got.edge_energy > got.texture_energy

    def test_noise_block_is_texture(self, rng):
        for _ in range(50):
            block = rng.uniform(0, 255, size=(8, 8))
            assert jnd.classify_block(dct.dct8_forward(block)).label == "texture"

    def test_exactly_one_label(self, rng):
        coeffs = dct.dct8_forward(rng.uniform(0, 255, size=(20, 8, 8)))
        labels, _, _ = jnd.classify_blocks(coeffs)
        assert np.all((labels >= 0) & (labels <= 2))

    def test_invalid_label_rejected(self):
        with pytest.raises(ValueError, match="label"):
            jnd.BlockClass(label="fuzzy", edge_energy=0.0, texture_energy=0.0)


class TestContrastMasking:
    def test_zero_block_all_ones(self):
        base = jnd.csf_base_table()
        cls = jnd.BlockClass("texture", 0.0, 0.0)
        factors = jnd.contrast_masking(np.zeros((8, 8)), base, cls)
        assert np.all(factors == 1.0)

    def test_power_law_at_ten_times_threshold(self):
        params = jnd.JndParams()
        base = jnd.csf_base_table()
        coeffs = np.zeros((8, 8))
        coeffs[6, 7] = 10.0 * base[6, 7]  # high-frequency position, unprotected
        cls = jnd.BlockClass("texture", 0.0, 0.0)
        factors = jnd.contrast_masking(coeffs, base, cls, params)
        assert factors[6, 7] == pytest.approx(10.0**params.cm.exponent, rel=1e-12)
        mask = np.ones((8, 8), bool)
        mask[6, 7] = False
        assert np.all(factors[mask] == 1.0)

    def test_disabled_gives_exact_ones(self, rng):
        params = jnd.JndParams(enable_cm=False)
        base = jnd.csf_base_table()
        coeffs = rng.uniform(-500, 500, size=(8, 8))
        factors = jnd.contrast_masking(coeffs, base, jnd.BlockClass("texture", 0, 0), params)
        assert np.all(factors == 1.0)

    def test_subthreshold_contrast_never_masks(self, rng):
        base = jnd.csf_base_table()
        coeffs = rng.uniform(-1.0, 1.0, size=(8, 8)) * base  # |C| <= base
        cls = jnd.BlockClass("texture", 0.0, 0.0)
        factors = jnd.contrast_masking(coeffs, base, cls)
        assert np.all(factors[np.abs(coeffs) <= base] == 1.0)

    def test_monotone_in_magnitude_and_clipped(self):
        base = jnd.csf_base_table()
        cls = jnd.BlockClass("texture", 0.0, 0.0)
        prev = None
        for scale in (1.0, 2.0, 5.0, 50.0, 5000.0):
            coeffs = np.full((8, 8), scale) * base
            factors = jnd.contrast_masking(coeffs, base, cls)
            assert np.all(factors >= 1.0)
            assert np.all(factors <= jnd.CmParams().max_gain)
            if prev is not None:
                assert np.all(factors >= prev)
            prev = factors

    def test_plane_and_edge_blocks_protected_at_low_frequency(self):
        base = jnd.csf_base_table()
        coeffs = 100.0 * base
        for label in ("plane", "edge"):
            factors = jnd.contrast_masking(coeffs, base, jnd.BlockClass(label, 0, 0))
            assert factors[1, 1] == 1.0  # protected position
            assert factors[7, 7] > 1.0  # outside the protected radius


def _forced_identity_params(**kwargs):
    return jnd.JndParams(s=1.0, la=FLAT_LA, enable_cm=False, enable_sa=False, **kwargs)


class TestComputeJndMap:
    def test_all_factors_one_reduces_to_csf(self, natural_64):
        jnd_map = jnd.compute_jnd_map(natural_64, _forced_identity_params())
        base = jnd.csf_base_table()
        assert np.allclose(jnd_map.thresholds, base[None, None], rtol=0, atol=0)

    def test_linear_in_s(self, natural_64):
        one = jnd.compute_jnd_map(natural_64, jnd.JndParams(s=1.0))
        two = jnd.compute_jnd_map(natural_64, jnd.JndParams(s=2.0))
        assert np.allclose(two.thresholds, 2.0 * one.thresholds, rtol=1e-15)

    def test_monotone_in_s(self, natural_64):
        lo = jnd.compute_jnd_map(natural_64, jnd.JndParams(s=0.5))
        hi = jnd.compute_jnd_map(natural_64, jnd.JndParams(s=0.75))
        assert np.all(lo.thresholds < hi.thresholds)

    def test_constant_image_uniform_blocks(self):
        plane = ImagePlane(np.full((32, 32), 128, dtype=np.uint8))
        jnd_map = jnd.compute_jnd_map(plane)
        first = jnd_map.thresholds[0, 0]
        assert np.all(jnd_map.thresholds == first[None, None])

    def test_thresholds_strictly_positive(self, natural_128):
        jnd_map = jnd.compute_jnd_map(natural_128)
        assert np.all(jnd_map.thresholds > 0)
        assert np.all(np.isfinite(jnd_map.thresholds))

    def test_multiplicative_decomposition_cm(self, natural_64):
        params = jnd.JndParams()
        full = jnd.compute_jnd_map(natural_64, params).thresholds
        without = jnd.compute_jnd_map(
            natural_64, dataclasses.replace(params, enable_cm=False)
        ).thresholds

        # recompute the masking factors the pipeline should have applied
        padded = pad_to_blocks(natural_64).array()
        tiles = tile_blocks(padded)
        coeffs = dct.dct8_forward(tiles)
        base = jnd.csf_base_table()[None, None]
        la = jnd.luminance_adaptation(tiles.mean(axis=(-2, -1)))[..., None, None]
        labels, _, _ = jnd.classify_blocks(coeffs)
        cm = jnd.contrast_masking_blocks(coeffs, base * la, labels, params)

        assert np.allclose(full / without, cm, atol=1e-9)

    def test_determinism(self, natural_64):
        a = jnd.compute_jnd_map(natural_64)
        b = jnd.compute_jnd_map(natural_64)
        assert np.array_equal(a.thresholds, b.thresholds)

    def test_block_grid_shape(self):
        plane = ImagePlane(np.zeros((17, 33), dtype=np.uint8))
        jnd_map = jnd.compute_jnd_map(plane)
        assert (jnd_map.block_rows, jnd_map.block_cols) == (3, 5)


class TestSaliency:
    def test_factor_extremes(self):
        params = jnd.JndParams(enable_sa=True)
        salient = ImagePlane(np.full((16, 16), 255, dtype=np.uint8))
        background = ImagePlane(np.zeros((16, 16), dtype=np.uint8))
        assert np.allclose(jnd.saliency_factors(salient, params), params.sa.factor_salient)
        assert np.allclose(
            jnd.saliency_factors(background, params), params.sa.factor_background
        )

    def test_salient_blocks_get_lower_thresholds(self, natural_64):
        params = jnd.JndParams(enable_sa=True)
        sal_map = ImagePlane(np.full((64, 64), 255, dtype=np.uint8))
        factors = jnd.saliency_factors(sal_map, params)
        with_sa = jnd.compute_jnd_map(natural_64, params, saliency=factors)
        without = jnd.compute_jnd_map(natural_64, dataclasses.replace(params, enable_sa=False))
        assert np.allclose(
            with_sa.thresholds, without.thresholds * params.sa.factor_salient, rtol=1e-12
        )

    def test_disabled_sa_ignores_factors(self, natural_64):
        params = jnd.JndParams(enable_sa=False)
        factors = np.full((8, 8), 0.25)
        a = jnd.compute_jnd_map(natural_64, params, saliency=factors)
        b = jnd.compute_jnd_map(natural_64, params)
        assert np.array_equal(a.thresholds, b.thresholds)

    def test_shape_mismatch_rejected(self, natural_64):
        params = jnd.JndParams(enable_sa=True)
        with pytest.raises(ValueError, match="block grid"):
            jnd.compute_jnd_map(natural_64, params, saliency=np.ones((2, 2)))


def test_invalid_s_rejected():
    with pytest.raises(ValueError, match="s must be"):
        jnd.JndParams(s=0.0)


def test_synthetic_images_have_block_variety():
    plane = synthetic_natural(128, 128, seed=3)
    padded = pad_to_blocks(plane).array()
    coeffs = dct.dct8_forward(tile_blocks(padded))
    labels, _, _ = jnd.classify_blocks(coeffs)
    assert len(np.unique(labels)) >= 2


def test_block_mean_luma_equals_dc_over_8(rng):
    block = rng.uniform(0, 255, size=(8, 8))
    coeffs = dct.dct8_forward(block)
    assert block.mean() == pytest.approx(coeffs[0, 0] / 8.0, rel=1e-12)
