"""Single-channel luma images: loading, saving, padding, and 8x8 tiling.

All filtering and metric code in this package operates on :class:`ImagePlane`
objects wrapping a 2-D numpy array. Planes are either 8-bit (``uint8``,
values 0..255) or float (``float64``, nominally on the 0..255 scale but
unclamped). Supported container formats: binary PGM (P5), 8-bit grayscale
PNG, Y4M (first frame, luma only), and raw planar YUV with explicit
dimensions. Chroma is always discarded.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

BLOCK = 8

_Y4M_HEADER_RE = re.compile(rb"^YUV4MPEG2((?: [^ \n]+)*)\n")


@dataclass(frozen=True)
class ImagePlane:
    """A single-channel image. ``data`` is a 2-D array, uint8 or float64."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError(f"image plane must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image plane must be non-empty, got shape {arr.shape}")
        if arr.dtype == np.uint8:
            pass
        elif arr.dtype == np.float64:
            if not np.all(np.isfinite(arr)):
                raise ValueError("float image plane contains non-finite samples")
        else:
            raise ValueError(f"image plane dtype must be uint8 or float64, got {arr.dtype}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def is_float(self) -> bool:
        return self.data.dtype == np.float64

    def to_float(self) -> "ImagePlane":
        if self.is_float:
            return self
        return ImagePlane(self.data.astype(np.float64))

    def to_uint8(self) -> "ImagePlane":
        """Quantize a float plane: round half away from zero, clamp to [0, 255]."""
        if not self.is_float:
            return self
        return ImagePlane(quantize_to_uint8(self.data))


def quantize_to_uint8(arr: np.ndarray) -> np.ndarray:
    rounded = np.trunc(arr + np.copysign(0.5, arr))
    return np.clip(rounded, 0.0, 255.0).astype(np.uint8)


@dataclass(frozen=True)
class PaddedView:
    """An image extended to multiple-of-8 dimensions by edge replication."""

    base: ImagePlane
    padded_width: int
    padded_height: int

    def array(self) -> np.ndarray:
        """Materialize the padded samples (float64)."""
        arr = self.base.to_float().data
        return np.pad(
            arr,
            ((0, self.padded_height - self.base.height), (0, self.padded_width - self.base.width)),
            mode="edge",
        )

    def crop(self, padded: np.ndarray) -> np.ndarray:
        """Crop a padded-size array back to the base dimensions."""
        if padded.shape != (self.padded_height, self.padded_width):
            raise ValueError(
                f"expected shape {(self.padded_height, self.padded_width)}, got {padded.shape}"
            )
        return padded[: self.base.height, : self.base.width]


def pad_to_blocks(plane: ImagePlane) -> PaddedView:
    """Pad dimensions up to the next multiple of 8 (no-op sizes allowed)."""
    pw = -(-plane.width // BLOCK) * BLOCK
    ph = -(-plane.height // BLOCK) * BLOCK
    return PaddedView(base=plane, padded_width=pw, padded_height=ph)


def tile_blocks(arr: np.ndarray) -> np.ndarray:
    """Reshape an (H, W) array with H, W multiples of 8 into (H/8, W/8, 8, 8)."""
    h, w = arr.shape
    if h % BLOCK or w % BLOCK:
        raise ValueError(f"dimensions {h}x{w} are not multiples of {BLOCK}")
    return arr.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).swapaxes(1, 2)

def untile_blocks(blocks: np.ndarray) -> np.ndarray:
    """Inverse of :func:`tile_blocks`."""
    bh, bw = blocks.shape[:2]
    return blocks.swapaxes(1, 2).reshape(bh * BLOCK, bw * BLOCK)


# ---------------------------------------------------------------------------
# File formats

def load_image(path, format=None, *, width=None, height=None, chroma="420") -> ImagePlane:
    """Load the luma plane of an image file.

    ``format`` is one of ``pgm``, ``png``, ``y4m``, ``yuv``; when omitted it
    is inferred from the file suffix. Raw YUV requires explicit ``width`` and
    ``height`` (``chroma`` in {420, 444, 400} fixes the expected file size).
    """
    fmt = format or _infer_format(str(path))
    if fmt == "pgm":
        return _load_pgm(path)
    if fmt == "png":
        return _load_png(path)
    if fmt == "y4m":
        return _load_y4m(path)
    if fmt == "yuv":
        if width is None or height is None:
            raise ValueError("raw YUV input needs explicit width and height")
        return _load_raw_yuv(path, width, height, chroma)
    raise ValueError(f"unsupported image format {fmt!r}")


def save_image(plane: ImagePlane, path, format=None, *, chroma="420") -> None:
    """Write an 8-bit image file (float planes are quantized first)."""
    fmt = format or _infer_format(str(path))
    plane = plane.to_uint8()
    if fmt == "pgm":
        _save_pgm(plane, path)
    elif fmt == "png":
        from PIL import Image as pil_image

        pil_image.fromarray(plane.data, mode="L").save(str(path), format="PNG")
    elif fmt == "y4m":
        _save_y4m(plane, path)
    elif fmt == "yuv":
        _save_raw_yuv(plane, path, chroma)
    else:
        raise ValueError(f"unsupported image format {fmt!r}")


def _infer_format(path: str) -> str:
    suffix = path.rsplit(".", 1)[-1].lower() if "." in path else ""
    if suffix in ("pgm", "png", "y4m", "yuv"):
        return suffix
    raise ValueError(f"cannot infer image format from path {path!r}")


def _load_pgm(path) -> ImagePlane:
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # Header: magic, width, height, maxval; '#' comments allowed between tokens.
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            eol = data.find(b"\n", pos)
            if eol < 0:
                raise ValueError(f"{path}: truncated PGM header")
            pos = eol + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise ValueError(f"{path}: malformed PGM header") from None
    if maxval <= 0 or maxval > 255:
        raise ValueError(f"{path}: only 8-bit PGM supported (maxval {maxval})")
    expected = width * height
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise ValueError(
            f"{path}: PGM raster has {len(raster)} bytes, expected {expected}"
        )
    arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return ImagePlane(arr.copy())


def _save_pgm(plane: ImagePlane, path) -> None:
    header = f"P5\n{plane.width} {plane.height}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(plane.data.tobytes())


def _load_png(path) -> ImagePlane:
    from PIL import Image as pil_image

    with pil_image.open(str(path)) as img:
        if img.mode != "L":
            img = img.convert("L")
        arr = np.asarray(img, dtype=np.uint8)
    return ImagePlane(arr)


def _load_y4m(path) -> ImagePlane:
    with open(path, "rb") as fh:
        data = fh.read()
    m = _Y4M_HEADER_RE.match(data)
    if m is None:
        raise ValueError(f"{path}: not a Y4M file")
    width = height = None
    colorspace = "420"
    for param in m.group(1).split():
        tag, value = param[:1], param[1:].decode("ascii", "replace")
        if tag == b"W":
            width = int(value)
        elif tag == b"H":
            height = int(value)
        elif tag == b"C":
            colorspace = value
    if width is None or height is None:
        raise ValueError(f"{path}: Y4M header missing W/H")
    if colorspace.startswith("420"):
        frame_size = width * height * 3 // 2
    elif colorspace.startswith("444"):
        frame_size = width * height * 3
    elif colorspace.startswith("mono"):
        frame_size = width * height
    else:
        raise ValueError(f"{path}: unsupported Y4M colorspace C{colorspace}")
    pos = m.end()
    eol = data.find(b"\n", pos)
    if eol < 0 or not data[pos:eol].startswith(b"FRAME"):
        raise ValueError(f"{path}: Y4M stream has no FRAME marker")
    pos = eol + 1
    luma = data[pos : pos + width * height]
    if len(luma) < width * height or len(data) - pos < frame_size:
        raise ValueError(f"{path}: truncated Y4M frame")
    arr = np.frombuffer(luma, dtype=np.uint8).reshape(height, width)
    return ImagePlane(arr.copy())


def _save_y4m(plane: ImagePlane, path) -> None:
    # 4:2:0 with neutral chroma when dimensions allow it, 4:4:4 otherwise.
    if plane.width % 2 == 0 and plane.height % 2 == 0:
        csp = b"C420jpeg"
        chroma = bytes([128]) * (plane.width * plane.height // 2)
    else:
        csp = b"C444"
        chroma = bytes([128]) * (plane.width * plane.height * 2)
    header = b"YUV4MPEG2 W%d H%d F25:1 Ip A1:1 %s\nFRAME\n" % (
        plane.width,
        plane.height,
        csp,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(plane.data.tobytes())
        fh.write(chroma)


def _chroma_bytes(width: int, height: int, chroma: str) -> int:
    if chroma == "420":
        return width * height // 2
    if chroma == "444":
        return width * height * 2
    if chroma == "400":
        return 0
    raise ValueError(f"unsupported chroma layout {chroma!r}")


def _load_raw_yuv(path, width, height, chroma) -> ImagePlane:
    expected = width * height + _chroma_bytes(width, height, chroma)
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) != expected:
        raise ValueError(
            f"{path}: raw YUV size {len(data)} does not match "
            f"{width}x{height} {chroma} ({expected} bytes)"
        )
    arr = np.frombuffer(data[: width * height], dtype=np.uint8).reshape(height, width)
    return ImagePlane(arr.copy())


def _save_raw_yuv(plane: ImagePlane, path, chroma) -> None:
    with open(path, "wb") as fh:
        fh.write(plane.data.tobytes())
        fh.write(bytes([128]) * _chroma_bytes(plane.width, plane.height, chroma))
