"""Image loading, normalization, and chip extraction."""

from __future__ import annotations

import numpy as np
import pytest
from PIL import Image as PILImage

from microfid.images import (
    ChipSpec,
    GrayImage,
    ImageFormatError,
    extract_chips,
    load_image,
    save_image,
)


def write_png8(path, array):
    PILImage.fromarray(np.asarray(array, dtype=np.uint8), mode="L").save(path)


class TestLoadImage:
    def test_constant_255_normalizes_to_one(self, tmp_path):
        p = tmp_path / "white.png"
        write_png8(p, np.full((4, 5), 255))
        img = load_image(p, 8)
        assert img.pixels.shape == (4, 5)
        assert np.all(img.pixels == 1.0)

    def test_constant_0_normalizes_to_zero(self, tmp_path):
        p = tmp_path / "black.png"
        write_png8(p, np.zeros((3, 3)))
        assert np.all(load_image(p, 8).pixels == 0.0)

    def test_known_8bit_values(self, tmp_path):
        # 0, 51, 102, 255 divide by 255 to exactly 0, 0.2, 0.4, 1.0
        p = tmp_path / "quad.png"
        write_png8(p, np.array([[0, 51], [102, 255]]))
        img = load_image(p, 8)
        assert img.pixels[0, 0] == 0.0
        assert img.pixels[0, 1] == 51 / 255
        assert img.pixels[1, 0] == 102 / 255
        assert img.pixels[1, 1] == 1.0

    def test_16bit_png_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        original = GrayImage(rng.integers(0, 65536, size=(6, 7)) / 65535.0)
        p = save_image(original, tmp_path / "img16.png", bit_depth=16)
        loaded = load_image(p, 16)
        assert np.allclose(loaded.pixels, original.pixels, atol=0.5 / 65535)

    def test_pgm_roundtrip_8bit(self, tmp_path):
        rng = np.random.default_rng(1)
        original = GrayImage(rng.integers(0, 256, size=(5, 9)) / 255.0)
        p = save_image(original, tmp_path / "img.pgm", bit_depth=8)
        loaded = load_image(p, 8)
        assert np.array_equal(loaded.pixels, original.pixels)

    def test_pgm_roundtrip_16bit(self, tmp_path):
        rng = np.random.default_rng(2)
        original = GrayImage(rng.integers(0, 65536, size=(4, 4)) / 65535.0)
        p = save_image(original, tmp_path / "img16.pgm", bit_depth=16)
        loaded = load_image(p, 16)
        assert np.array_equal(loaded.pixels, original.pixels)

    def test_multichannel_rejected(self, tmp_path):
        p = tmp_path / "rgb.png"
        PILImage.fromarray(np.zeros((4, 4, 3), dtype=np.uint8), mode="RGB").save(p)
        with pytest.raises(ImageFormatError):
            load_image(p, 8)

    def test_depth_mismatch_rejected(self, tmp_path):
        p = tmp_path / "gray.png"
        write_png8(p, np.zeros((4, 4)))
        with pytest.raises(ImageFormatError):
            load_image(p, 16)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.png", 8)

    def test_garbage_file(self, tmp_path):
        p = tmp_path / "junk.png"
        p.write_bytes(b"not a png at all")
        with pytest.raises(ImageFormatError):
            load_image(p, 8)

    def test_bad_bit_depth(self, tmp_path):
        p = tmp_path / "g.png"
        write_png8(p, np.zeros((2, 2)))
        with pytest.raises(ValueError):
            load_image(p, 12)


class TestGrayImage:
    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            GrayImage(np.array([[0.0, 1.5]]))
        with pytest.raises(ValueError):
            GrayImage(np.array([[-0.1, 0.5]]))

    def test_rejects_empty_and_non_2d(self):
        with pytest.raises(ValueError):
            GrayImage(np.zeros((0, 4)))
        with pytest.raises(ValueError):
            GrayImage(np.zeros(9))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            GrayImage(np.array([[0.1, np.nan]]))

    def test_pixels_are_readonly(self):
        img = GrayImage(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 1.0


class TestExtractChips:
    def test_paper_scale_grid_count(self):
        # 2560x1920 at chip 128 / stride 64 gives 39 x 29 = 1131 chips.
        assert ChipSpec(128, 64).grid_shape(2560, 1920) == (39, 29)
        image = GrayImage(np.zeros((1920, 2560)))
        assert len(extract_chips(image, ChipSpec(128, 64))) == 1131

    def test_identity_case(self, rng):
        image = GrayImage(rng.random((128, 128)))
        chips = extract_chips(image, ChipSpec(128, 64))
        assert len(chips) == 1
        assert np.array_equal(chips[0].pixels, image.pixels)

    def test_exact_tiling(self, rng):
        image = GrayImage(rng.random((128, 256)))
        chips = extract_chips(image, ChipSpec(128, 128))
        assert len(chips) == 2
        assert np.array_equal(np.hstack([c.pixels for c in chips]), image.pixels)

    def test_row_major_anchor_order(self, rng):
        image = GrayImage(rng.random((6, 6)))
        chips = extract_chips(image, ChipSpec(2, 2))
        # Second chip must be the next anchor along x, not y.
        assert np.array_equal(chips[1].pixels, image.pixels[0:2, 2:4])
        assert np.array_equal(chips[3].pixels, image.pixels[2:4, 0:2])

    def test_coverage_reconstruction(self, rng):
        # With stride == chip_size and divisible dimensions, chips tile exactly.
        image = GrayImage(rng.random((12, 20)))
        spec = ChipSpec(4, 4)
        chips = extract_chips(image, spec)
        nx, ny = spec.grid_shape(20, 12)
        rows = [
            np.hstack([chips[iy * nx + ix].pixels for ix in range(nx)])
            for iy in range(ny)
        ]
        assert np.array_equal(np.vstack(rows), image.pixels)

    def test_trailing_margin_discarded(self, rng):
        image = GrayImage(rng.random((10, 13)))
        chips = extract_chips(image, ChipSpec(4, 4))
        assert len(chips) == 3 * 2

    def test_determinism(self, rng):
        image = GrayImage(rng.random((16, 16)))
        spec = ChipSpec(8, 4)
        a = extract_chips(image, spec)
        b = extract_chips(image, spec)
        assert len(a) == len(b)
        for ca, cb in zip(a, b):
            assert ca.pixels.tobytes() == cb.pixels.tobytes()

    def test_chip_larger_than_image(self, rng):
        image = GrayImage(rng.random((16, 16)))
        with pytest.raises(ValueError):
            extract_chips(image, ChipSpec(32, 8))

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            ChipSpec(8, 0)
        with pytest.raises(ValueError):
            ChipSpec(8, 9)
