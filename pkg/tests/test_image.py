import numpy as np
import pytest

from jndfilter.image import (
    ImagePlane,
    load_image,
    pad_to_blocks,
    quantize_to_uint8,
    save_image,
)


class TestImagePlane:
    def test_valid_uint8(self):
        plane = ImagePlane(np.zeros((4, 6), dtype=np.uint8))
        assert plane.width == 6 and plane.height == 4
        assert not plane.is_float

    def test_rejects_bad_dtype(self):
        with pytest.raises(ValueError, match="dtype"):
            ImagePlane(np.zeros((4, 4), dtype=np.int32))

    def test_rejects_non_finite_float(self):
        arr = np.zeros((4, 4))
        arr[0, 0] = np.nan
        with pytest.raises(ValueError, match="finite"):
            ImagePlane(arr)

    def test_rejects_wrong_ndim(self):
        with pytest.raises(ValueError, match="2-D"):
            ImagePlane(np.zeros((4, 4, 3), dtype=np.uint8))

    def test_immutable(self):
        plane = ImagePlane(np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(ValueError):
            plane.data[0, 0] = 1


class TestQuantize:
    def test_round_half_away_and_clamp(self):
        arr = np.array([[254.7, -3.2, 128.5, 127.5], [0.49, 0.5, -0.5, 300.0]])
        got = quantize_to_uint8(arr)
        assert got.tolist() == [[255, 0, 129, 128], [0, 1, 0, 255]]

    def test_plane_roundtrip_to_uint8(self):
        plane = ImagePlane(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert plane.to_uint8().data.tolist() == [[1, 2], [3, 4]]


class TestPgm(object):
    def test_direct_byte_readback(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64]))
        plane = load_image(path)
        assert plane.width == 2 and plane.height == 2
        assert plane.data.ravel().tolist() == [0, 255, 128, 64]

    def test_comment_in_header(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n# a comment\n2 1 255\n" + bytes([7, 9]))
        assert load_image(path).data.ravel().tolist() == [7, 9]

    def test_malformed_magic(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P2\n2 2\n255\n0 0 0 0")
        with pytest.raises(ValueError, match="P5"):
            load_image(path)

    def test_truncated_raster(self, tmp_path):
        path = tmp_path / "t.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(5))
        with pytest.raises(ValueError, match="raster"):
            load_image(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.pgm")


class TestY4m:
    def test_constant_gray_frame(self, tmp_path):
        path = tmp_path / "g.y4m"
        luma = bytes([128]) * 256
        chroma = bytes([100]) * 128
        path.write_bytes(b"YUV4MPEG2 W16 H16 F25:1 C420jpeg\nFRAME\n" + luma + chroma)
        plane = load_image(path)
        assert plane.data.shape == (16, 16)
        assert np.all(plane.data == 128)

    def test_c444_first_frame_only(self, tmp_path):
        path = tmp_path / "g.y4m"
        frame = bytes(range(16)) + bytes(16) + bytes(16)
        path.write_bytes(
            b"YUV4MPEG2 W4 H4 C444\nFRAME\n" + frame + b"FRAME\n" + bytes(48)
        )
        plane = load_image(path)
        assert plane.data.ravel().tolist() == list(range(16))

    def test_rejects_missing_dims(self, tmp_path):
        path = tmp_path / "g.y4m"
        path.write_bytes(b"YUV4MPEG2 F25:1\nFRAME\n")
        with pytest.raises(ValueError, match="W/H"):
            load_image(path)

    def test_rejects_truncated_frame(self, tmp_path):
        path = tmp_path / "g.y4m"
        path.write_bytes(b"YUV4MPEG2 W8 H8 C420\nFRAME\n" + bytes(10))
        with pytest.raises(ValueError, match="truncated"):
            load_image(path)


class TestRawYuv:
    def test_hd_luma_plane_size(self, tmp_path):
        path = tmp_path / "f.yuv"
        path.write_bytes(bytes(1920 * 1080 * 3 // 2))
        plane = load_image(path, width=1920, height=1080)
        assert plane.data.size == 2_073_600

    def test_dimension_mismatch(self, tmp_path):
        path = tmp_path / "f.yuv"
        path.write_bytes(bytes(100))
        with pytest.raises(ValueError, match="does not match"):
            load_image(path, width=16, height=16)

    def test_requires_dims(self, tmp_path):
        path = tmp_path / "f.yuv"
        path.write_bytes(bytes(100))
        with pytest.raises(ValueError, match="width and height"):
            load_image(path)


@pytest.mark.parametrize("fmt,size", [
    ("pgm", (12, 10)),
    ("png", (12, 10)),
    ("y4m", (12, 10)),
    ("y4m", (13, 9)),  # odd dims take the 4:4:4 path
    ("yuv", (12, 10)),
])
def test_save_load_roundtrip(tmp_path, rng, fmt, size):
    w, h = size
    plane = ImagePlane(rng.integers(0, 256, size=(h, w)).astype(np.uint8))
    path = tmp_path / f"img.{fmt}"
    save_image(plane, path)
    back = load_image(path, width=w, height=h)
    assert np.array_equal(back.data, plane.data)


def test_save_float_is_quantized(tmp_path):
    plane = ImagePlane(np.array([[254.7, -3.2]]))
    path = tmp_path / "q.pgm"
    save_image(plane, path)
    assert load_image(path).data.ravel().tolist() == [255, 0]


def test_unknown_format_rejected(tmp_path):
    with pytest.raises(ValueError, match="infer"):
        load_image(tmp_path / "x.jpeg")


class TestPadding:
    def test_multiple_of_8_is_noop(self):
        plane = ImagePlane(np.zeros((8, 16), dtype=np.uint8))
        view = pad_to_blocks(plane)
        assert (view.padded_width, view.padded_height) == (16, 8)

    def test_ceil_to_multiple(self):
        plane = ImagePlane(np.zeros((9, 17), dtype=np.uint8))
        view = pad_to_blocks(plane)
        assert (view.padded_width, view.padded_height) == (24, 16)

    def test_single_sample_replicates(self):
        view = pad_to_blocks(ImagePlane(np.full((1, 1), 7, dtype=np.uint8)))
        arr = view.array()
        assert arr.shape == (8, 8)
        assert np.all(arr == 7)

    def test_interior_unchanged_and_crop_inverse(self, rng):
        data = rng.integers(0, 256, size=(11, 13)).astype(np.uint8)
        view = pad_to_blocks(ImagePlane(data))
        arr = view.array()
        assert np.array_equal(arr[:11, :13], data.astype(np.float64))
        assert np.array_equal(view.crop(arr), data.astype(np.float64))

    def test_margin_is_edge_replicated(self):
        data = np.arange(9, dtype=np.uint8).reshape(3, 3)
        arr = pad_to_blocks(ImagePlane(data)).array()
        assert np.all(arr[3:, :3] == arr[2, :3])
        assert np.all(arr[:3, 3:] == arr[:3, 2][:, None])


def test_save_to_unwritable_path_raises(tmp_path):
    plane = ImagePlane(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(OSError):
        save_image(plane, tmp_path / "no" / "such" / "dir" / "x.pgm")
