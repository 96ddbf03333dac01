"""Halftoning / inverse-halftoning gradient transform.

The equalized image is halftoned by error diffusion, blurred back to
continuous tone with a Gaussian HVS kernel, and the blurred image is
subtracted from the equalized one. What is left is the high-frequency
detail the focus measure runs on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import ndimage

from .image import MAX_LEVEL


class InvalidSigma(ValueError):
    pass


@dataclass(frozen=True)
class DiffusionKernel:
    """Error-diffusion weights keyed by ``(dx, dy)`` neighbor offsets.

    ``dx`` runs along a row, ``dy`` down the image; every offset must point
    at a pixel the raster scan has not reached yet.
    """

    name: str
    offsets: tuple[tuple[int, int], ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.offsets) != len(self.weights):
            raise ValueError("offsets and weights differ in length")
        for dx, dy in self.offsets:
            if dy < 0 or (dy == 0 and dx <= 0):
                raise ValueError(f"offset {(dx, dy)} points at an already processed pixel")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("diffusion weights must sum to 1")


def _kernel(name, table, divisor):
    offsets = tuple((dx, dy) for dx, dy, _ in table)
    weights = tuple(float(Fraction(w, divisor)) for _, _, w in table)
    return DiffusionKernel(name, offsets, weights)


FLOYD_STEINBERG = _kernel("floyd", [(1, 0, 7), (-1, 1, 3), (0, 1, 5), (1, 1, 1)], 16)

JARVIS = _kernel("jarvis", [
    (1, 0, 7), (2, 0, 5),
    (-2, 1, 3), (-1, 1, 5), (0, 1, 7), (1, 1, 5), (2, 1, 3),
    (-2, 2, 1), (-1, 2, 3), (0, 2, 5), (1, 2, 3), (2, 2, 1),
], 48)

STUCKI = _kernel("stucki", [
    (1, 0, 8), (2, 0, 4),
    (-2, 1, 2), (-1, 1, 4), (0, 1, 8), (1, 1, 4), (2, 1, 2),
    (-2, 2, 1), (-1, 2, 2), (0, 2, 4), (1, 2, 2), (2, 2, 1),
], 42)

DIFFUSION_KERNELS = {k.name: k for k in (FLOYD_STEINBERG, JARVIS, STUCKI)}


def error_diffuse(img: np.ndarray, kernel: DiffusionKernel = FLOYD_STEINBERG,
                  max_level: float = MAX_LEVEL) -> np.ndarray:
    """Binary halftone of ``img`` by raster-order error diffusion.

    The quantization error is measured in intensity units
    (``p - p' * max_level``) so that ``BW * max_level`` reconstructs the
    image. Error pushed past the image border is dropped.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    work = img.ravel().tolist()
    out = bytearray(h * w)
    threshold = max_level / 2.0
    taps = list(zip(kernel.offsets, kernel.weights))
    # sequential by construction: each pixel depends on every earlier one
    for y in range(h):
        base = y * w
        for x in range(w):
            i = base + x
            p = work[i]
            if p >= threshold:
                out[i] = 1
                err = p - max_level
            else:
                err = p
            if err == 0.0:
                continue
            for (dx, dy), a in taps:
                nx, ny = x + dx, y + dy
                if 0 <= nx < w and ny < h:
                    work[ny * w + nx] += err * a
    return np.frombuffer(bytes(out), dtype=np.uint8).reshape(h, w).copy()


def hvs_kernel(sigma: float = 1.5, radius: int = 3, normalize: bool = True) -> np.ndarray:
    """Gaussian HVS taps ``exp(-(x^2 + y^2) / (2 sigma^2))`` on ``[-radius, radius]^2``."""
    if not sigma > 0:
        raise InvalidSigma(f"sigma must be positive, got {sigma}")
    if radius < 1:
        raise ValueError(f"radius must be >= 1, got {radius}")
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma * sigma))
    if normalize:
        taps /= taps.sum()
    return taps


def inverse_halftone(bw: np.ndarray, kernel: np.ndarray, max_level: float = MAX_LEVEL) -> np.ndarray:
    """Convolve the scaled halftone with the HVS kernel (replicate borders)."""
    scaled = np.asarray(bw, dtype=np.float64) * max_level
    blurred = ndimage.convolve(scaled, kernel, mode="nearest")
    return np.clip(blurred, 0.0, max_level)


def gradient_transform(i_eq: np.ndarray, sigma: float = 1.5, radius: int = 3,
                       kernel: DiffusionKernel = FLOYD_STEINBERG,
                       max_level: float = MAX_LEVEL):
    """Return ``(grad, bw, blur)`` with ``grad = i_eq - blur``."""
    i_eq = np.asarray(i_eq, dtype=np.float64)
    bw = error_diffuse(i_eq, kernel, max_level)
    blur = inverse_halftone(bw, hvs_kernel(sigma, radius), max_level)
    return i_eq - blur, bw, blur
