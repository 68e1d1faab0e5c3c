"""Grayscale image container, PNG/PGM I/O, and sliding-window chip extraction.

Images are stored as float64 arrays of shape (height, width) with every
intensity normalized into [0, 1]. Source rasters are single-channel 8- or
16-bit PNG or binary (P5) PGM files; normalization divides raw samples by
the full-scale value of the declared bit depth.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

__all__ = [
    "GrayImage",
    "ChipSpec",
    "ImageFormatError",
    "load_image",
    "save_image",
    "extract_chips",
]

_FULL_SCALE = {8: 255, 16: 65535}


class ImageFormatError(ValueError):
    """Raised when a raster file cannot be decoded as single-channel gray."""


@dataclass(frozen=True)
class GrayImage:
    """A normalized grayscale image; the universal sample unit.

    ``pixels`` is a (height, width) float64 array, row-major, every value
    in [0, 1]. The array is copied and made read-only on construction.
    """

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"pixels must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be at least 1x1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("pixel intensities must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError(
                f"intensities outside [0, 1]: min={arr.min()}, max={arr.max()}"
            )
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class ChipSpec:
    """Sliding-window parameters for cropping large micrographs into chips."""

    chip_size: int = 128
    stride: int = 64

    def __post_init__(self):
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.chip_size < self.stride:
            raise ValueError(
                f"stride ({self.stride}) must not exceed chip_size ({self.chip_size})"
            )

    def grid_shape(self, width: int, height: int) -> tuple[int, int]:
        """Number of chip anchors along (x, y) for an image of the given size."""
        if self.chip_size > width or self.chip_size > height:
            raise ValueError(
                f"chip_size {self.chip_size} exceeds image dimensions {width}x{height}"
            )
        nx = (width - self.chip_size) // self.stride + 1
        ny = (height - self.chip_size) // self.stride + 1
        return nx, ny


def load_image(path: str | Path, bit_depth: int = 8) -> GrayImage:
    """Load a single-channel PNG or binary PGM and normalize to [0, 1].

    Raw samples are divided by ``2**bit_depth - 1``. The file's own sample
    depth must match ``bit_depth``; a mismatch is an error rather than a
    silent rescale.
    """
    if bit_depth not in _FULL_SCALE:
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    if path.suffix.lower() in (".pgm", ".pnm"):
        raw, maxval = _read_pgm(path)
        file_depth = 8 if maxval <= 255 else 16
    else:
        raw, file_depth = _read_png(path)
    if file_depth != bit_depth:
        raise ImageFormatError(
            f"{path}: file is {file_depth}-bit but bit_depth={bit_depth} was requested"
        )
    if raw.shape[0] == 0 or raw.shape[1] == 0:
        raise ImageFormatError(f"{path}: zero-dimension image")
    return GrayImage(raw.astype(np.float64) / _FULL_SCALE[bit_depth])


def save_image(image: GrayImage, path: str | Path, bit_depth: int = 8) -> Path:
    """Quantize to the requested depth and write a PNG or binary PGM."""
    if bit_depth not in _FULL_SCALE:
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")
    path = Path(path)
    full = _FULL_SCALE[bit_depth]
    raw = np.rint(image.pixels * full).astype(np.uint16 if bit_depth == 16 else np.uint8)
    if path.suffix.lower() in (".pgm", ".pnm"):
        _write_pgm(path, raw, full)
    else:
        # fromarray infers L for uint8 and I;16 for uint16.
        PILImage.fromarray(raw).save(path, format="PNG")
    return path


def extract_chips(image: GrayImage, spec: ChipSpec) -> list[GrayImage]:
    """Crop overlapping chips in row-major anchor order.

    Anchors run over {0, stride, 2*stride, ...} along each axis subject to
    anchor + chip_size <= dimension; a trailing margin narrower than the
    chip is discarded (padding would fabricate microstructure).
    """
    nx, ny = spec.grid_shape(image.width, image.height)
    c, s = spec.chip_size, spec.stride
    px = image.pixels
    chips = []
    for iy in range(ny):
        y0 = iy * s
        for ix in range(nx):
            x0 = ix * s
            chips.append(GrayImage(px[y0 : y0 + c, x0 : x0 + c]))
    return chips


# ----------------------------------------------------------------------
# Raster codecs
# ----------------------------------------------------------------------

def _read_png(path: Path) -> tuple[np.ndarray, int]:
    try:
        with PILImage.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                return np.asarray(im, dtype=np.uint16), 8
            if mode in ("I;16", "I;16B", "I"):
                arr = np.asarray(im, dtype=np.int64)
                if arr.min() < 0 or arr.max() > 65535:
                    raise ImageFormatError(f"{path}: samples outside 16-bit range")
                return arr.astype(np.uint16), 16
            raise ImageFormatError(
                f"{path}: expected single-channel grayscale, got mode {mode!r}"
            )
    except ImageFormatError:
        raise
    except Exception as exc:
        raise ImageFormatError(f"{path}: cannot decode image ({exc})") from exc


def _read_pgm(path: Path) -> tuple[np.ndarray, int]:
    """Binary (P5) PGM reader; maxval up to 65535, big-endian 2-byte samples."""
    data = path.read_bytes()
    if not data.startswith(b"P5"):
        raise ImageFormatError(f"{path}: not a binary P5 PGM")
    # Header: magic, width, height, maxval as whitespace/comment separated tokens.
    pos, tokens = 2, []
    while len(tokens) < 3:
        m = re.match(rb"(?:\s+|#[^\n]*\n)*(\d+)", data[pos:])
        if m is None:
            raise ImageFormatError(f"{path}: truncated PGM header")
        tokens.append(int(m.group(1)))
        pos += m.end()
    width, height, maxval = tokens
    if width == 0 or height == 0:
        raise ImageFormatError(f"{path}: zero-dimension image")
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"{path}: invalid maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height
    body = data[pos : pos + count * dtype.itemsize]
    if len(body) != count * dtype.itemsize:
        raise ImageFormatError(f"{path}: truncated PGM pixel data")
    arr = np.frombuffer(body, dtype=dtype).reshape(height, width)
    return arr.astype(np.uint16), maxval


def _write_pgm(path: Path, raw: np.ndarray, maxval: int) -> None:
    header = f"P5\n{raw.shape[1]} {raw.shape[0]}\n{maxval}\n".encode("ascii")
    body = raw.astype(">u2" if maxval > 255 else "u1").tobytes()
    path.write_bytes(header + body)
