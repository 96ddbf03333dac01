"""Image containers, file I/O and elementary pixel arithmetic.

Images are plain numpy arrays: a gray image is a 2-D float64 array with
samples in ``[0, max_level]`` and a color image is an ``(H, W, 3)`` float64
array. Samples stay real-valued through the whole pipeline; quantization to
8 bits happens only in :func:`save_image`.
"""

from __future__ import annotations

import os
import re
import zlib
from pathlib import Path

import numpy as np
from PIL import Image

MAX_LEVEL = 255.0

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class ImageError(Exception):
    """Base class for image decoding and shape errors."""


class UnsupportedFormat(ImageError):
    pass


class CorruptData(ImageError):
    pass


class DimensionMismatch(ImageError, ValueError):
    pass


class InvalidDimensions(ImageError, ValueError):
    pass


def check_same_shape(*images: np.ndarray) -> None:
    shapes = {np.shape(im)[:2] for im in images}
    if len(shapes) != 1:
        raise DimensionMismatch(f"image dimensions differ: {sorted(shapes)}")


# --- Netpbm -----------------------------------------------------------------

_NETPBM_TOKEN = re.compile(rb"#[^\n\r]*|\S+")


def _read_netpbm(data: bytes) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise UnsupportedFormat(f"unsupported netpbm magic {magic!r}")
    # header: magic, width, height, maxval, then one whitespace byte
    tokens = []
    pos = 2
    while len(tokens) < 3:
        m = _NETPBM_TOKEN.search(data, pos)
        if m is None:
            raise CorruptData("truncated netpbm header")
        pos = m.end()
        if not m.group().startswith(b"#"):
            tokens.append(m.group())
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise CorruptData(f"bad netpbm header: {exc}") from None
    if width < 1 or height < 1 or not 0 < maxval < 256:
        raise UnsupportedFormat(f"unsupported netpbm header {width}x{height} maxval={maxval}")
    pos += 1
    channels = 1 if magic == b"P5" else 3
    n = width * height * channels
    raw = data[pos:pos + n]
    if len(raw) != n:
        raise CorruptData(f"netpbm payload has {len(raw)} bytes, expected {n}")
    arr = np.frombuffer(raw, dtype=np.uint8).astype(np.float64)
    if maxval != 255:
        arr = arr * (MAX_LEVEL / maxval)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return arr.reshape(shape)


def _write_netpbm(path: Path, arr8: np.ndarray) -> None:
    magic = b"P5" if arr8.ndim == 2 else b"P6"
    h, w = arr8.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + f"\n{w} {h}\n255\n".encode())
        fh.write(np.ascontiguousarray(arr8).tobytes())


# --- public I/O -------------------------------------------------------------

def load_image(path: str | os.PathLike) -> np.ndarray:
    """Decode a PNG, PGM (P5) or PPM (P6) file.

    Returns a 2-D array for gray files and an ``(H, W, 3)`` array for color
    files, with 8-bit samples mapped to floats in ``[0, 255]``.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    data = path.read_bytes()
    if data[:2] in (b"P5", b"P6"):
        return _read_netpbm(data)
    if not data.startswith(b"\x89PNG\r\n\x1a\n"):
        raise UnsupportedFormat(f"{path}: not a PNG/PGM/PPM file")
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode == "P":
                im = im.convert("RGB")
            if im.mode not in ("L", "RGB"):
                raise UnsupportedFormat(f"{path}: unsupported PNG mode {im.mode}")
            arr = np.asarray(im, dtype=np.float64)
    except UnsupportedFormat:
        raise
    except (OSError, SyntaxError, zlib.error, ValueError) as exc:
        raise CorruptData(f"{path}: {exc}") from None
    return arr.copy()


def to_uint8(img: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(np.asarray(img, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)


def save_image(path: str | os.PathLike, img: np.ndarray) -> None:
    """Write ``img`` rounded to 8 bits; format follows the file suffix."""
    path = Path(path)
    arr8 = to_uint8(img)
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".ppm"):
        if (arr8.ndim == 2) != (suffix == ".pgm"):
            raise UnsupportedFormat(f"{suffix} cannot hold an array of shape {arr8.shape}")
        _write_netpbm(path, arr8)
    elif suffix == ".png":
        Image.fromarray(arr8).save(path, optimize=False)
    else:
        raise UnsupportedFormat(f"cannot write {suffix!r} files")


# --- pixel operations -------------------------------------------------------

def luma(img: np.ndarray, max_level: float = MAX_LEVEL) -> np.ndarray:
    """Rec.601 luma of a color image; gray images pass through unchanged."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    r, g, b = img[..., 0], img[..., 1], img[..., 2]
    y = LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b
    return np.clip(y, 0.0, max_level)


def _bilinear_axis(n_in: int, n_out: int):
    # pixel-center alignment: out index x samples input coordinate (x + .5) * n_in / n_out - .5
    x = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    x = np.clip(x, 0, n_in - 1)
    lo = np.floor(x).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = x - lo
    return lo, hi, frac


def resize_to(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resample to ``width x height`` (pixel-center aligned)."""
    if width < 1 or height < 1:
        raise InvalidDimensions(f"target size must be positive, got {width}x{height}")
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[:2]
    if (h, w) == (height, width):
        return img.copy()
    y0, y1, fy = _bilinear_axis(h, height)
    x0, x1, fx = _bilinear_axis(w, width)
    if img.ndim == 3:
        fy = fy[:, None, None]
        fx = fx[None, :, None]
    else:
        fy = fy[:, None]
        fx = fx[None, :]
    top = img[y0][:, x0] * (1 - fx) + img[y0][:, x1] * fx
    bottom = img[y1][:, x0] * (1 - fx) + img[y1][:, x1] * fx
    return top * (1 - fy) + bottom * fy


def subtract_abs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    check_same_shape(a, b)
    return np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))


def minmax_normalize(img: np.ndarray, max_level: float = MAX_LEVEL) -> np.ndarray:
    """Stretch to ``[0, max_level]``; a flat image maps to all zeros."""
    img = np.asarray(img, dtype=np.float64)
    lo, hi = img.min(), img.max()
    if hi <= lo:
        return np.zeros_like(img)
    return (img - lo) * (max_level / (hi - lo))
