"""Synthetic multi-focus pairs with known ground truth."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .focus import SOURCE_A, SOURCE_B
from .halftone import hvs_kernel


def gaussian_blur(img: np.ndarray, sigma: float = 3.0, radius: int = 6) -> np.ndarray:
    """Gaussian blur with a ``(2 radius + 1)^2`` kernel, replicate borders, per channel."""
    kernel = hvs_kernel(sigma, radius)
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return ndimage.convolve(img, kernel, mode="nearest")
    return np.stack([ndimage.convolve(img[..., c], kernel, mode="nearest")
                     for c in range(img.shape[2])], axis=-1)


def compose_pair(pristine: np.ndarray, sharp_in_a: np.ndarray, sigma: float = 3.0, radius: int = 6):
    """Blur ``pristine`` outside ``sharp_in_a`` for A and inside it for B.

    Returns ``(a, b, truth)`` where ``truth`` labels each pixel with the
    source that is in focus there.
    """
    pristine = np.asarray(pristine, dtype=np.float64)
    blurred = gaussian_blur(pristine, sigma, radius)
    mask = np.asarray(sharp_in_a, dtype=bool)
    m = mask[..., None] if pristine.ndim == 3 else mask
    a = np.where(m, pristine, blurred)
    b = np.where(m, blurred, pristine)
    truth = np.where(mask, SOURCE_A, SOURCE_B).astype(np.uint8)
    return a, b, truth


def half_blur_pair(pristine: np.ndarray, sigma: float = 3.0, radius: int = 6):
    """A is blurred on its left half, B on its right half."""
    h, w = np.shape(pristine)[:2]
    sharp_in_a = np.zeros((h, w), dtype=bool)
    sharp_in_a[:, w // 2:] = True
    return compose_pair(pristine, sharp_in_a, sigma, radius)


def blob_mask(shape, seed: int = 0, smoothness: float = 24.0, coverage: float = 0.45) -> np.ndarray:
    """Random smooth foreground region covering about ``coverage`` of the frame."""
    rng = np.random.default_rng(seed)
    field_ = ndimage.gaussian_filter(rng.standard_normal(shape), smoothness, mode="wrap")
    return field_ > np.quantile(field_, 1.0 - coverage)


def region_pair(pristine: np.ndarray, seed: int = 0, sigma: float = 3.0, radius: int = 6):
    """Depth-like pair: a random foreground region in focus in A, the rest in B."""
    return compose_pair(pristine, blob_mask(np.shape(pristine)[:2], seed), sigma, radius)


def procedural_image(size: int = 256, seed: int = 0) -> np.ndarray:
    """Gray test scene: textured discs and bars over band-limited noise.

    Every region carries fine texture so that focus is decidable everywhere.
    """
    rng = np.random.default_rng(seed)
    texture = ndimage.gaussian_filter(rng.standard_normal((size, size)), 0.8)
    texture *= 40.0 / texture.std()
    base = ndimage.gaussian_filter(rng.uniform(0, 255, (size, size)), 6.0)
    img = (base - base.mean()) * 4.0 + 128.0
    yy, xx = np.mgrid[:size, :size]
    for _ in range(24):
        cy, cx = rng.uniform(0, size, 2)
        rad = rng.uniform(size / 32, size / 8)
        img[(yy - cy) ** 2 + (xx - cx) ** 2 < rad * rad] = rng.uniform(40, 215)
    for _ in range(12):
        y0, x0 = rng.integers(0, size, 2)
        img[y0:y0 + rng.integers(2, 8), x0:x0 + rng.integers(size // 8, size // 2)] = rng.uniform(40, 215)
    return np.clip(img + texture, 0, 255)


def label_accuracy(decision: np.ndarray, truth: np.ndarray, exclude_band: int = 0) -> float:
    """Fraction of pixels labelled like ``truth``.

    Pixels within ``exclude_band`` of a ground-truth boundary are ignored,
    i.e. a band ``2 * exclude_band`` wide straddling each seam.
    """
    decision = np.asarray(decision)
    truth = np.asarray(truth)
    keep = np.ones(truth.shape, dtype=bool)
    if exclude_band > 0:
        edges = truth != ndimage.grey_erosion(truth, size=3, mode="nearest")
        edges |= truth != ndimage.grey_dilation(truth, size=3, mode="nearest")
        dist = ndimage.distance_transform_cdt(~edges, metric="chessboard")
        keep = dist >= exclude_band
    return float(np.mean(decision[keep] == truth[keep]))
