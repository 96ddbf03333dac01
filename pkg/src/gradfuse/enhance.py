"""Local (tile-based) histogram equalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import MAX_LEVEL

LEVELS = 256


class InvalidDensity(ValueError):
    pass


@dataclass(frozen=True)
class LheConfig:
    tile_size: int = 32

    def __post_init__(self):
        if self.tile_size < 2:
            raise ValueError(f"tile_size must be >= 2, got {self.tile_size}")


def quantize(img: np.ndarray, levels: int = LEVELS, max_level: float = MAX_LEVEL) -> np.ndarray:
    """Round-half-up to integer levels ``0 .. levels-1``."""
    scaled = np.asarray(img, dtype=np.float64) * ((levels - 1) / max_level)
    return np.clip(np.floor(scaled + 0.5), 0, levels - 1).astype(np.intp)


def histogram(img: np.ndarray, levels: int = LEVELS, max_level: float = MAX_LEVEL) -> np.ndarray:
    """Normalized gray-level histogram ``p_0 .. p_{L-1}``."""
    if levels < 2:
        raise ValueError("need at least two levels")
    q = quantize(img, levels, max_level).ravel()
    counts = np.bincount(q, minlength=levels).astype(np.float64)
    return counts / q.size


def equalize_mapping(density: np.ndarray, levels: int = LEVELS) -> np.ndarray:
    """Histogram-equalization lookup table ``g_k = floor((L-1) * cdf_k)``.

    Returned as a float array so it can be blended directly.
    """
    density = np.asarray(density, dtype=np.float64)
    if density.shape != (levels,):
        raise InvalidDensity(f"density must have {levels} entries, got shape {density.shape}")
    if np.any(density < 0) or abs(density.sum() - 1.0) > 1e-9:
        raise InvalidDensity("density must be non-negative and sum to 1")
    cdf = np.cumsum(density)
    # cumsum round-off can leave the top of the cdf a hair under 1
    cdf[density.nonzero()[0][-1]:] = 1.0
    return np.floor((levels - 1) * cdf)


def _tile_bounds(n: int, tile: int) -> np.ndarray:
    starts = np.arange(0, n, tile)
    ends = np.minimum(starts + tile, n)
    return np.stack([starts, ends], axis=1)


def _blend_weights(n: int, centers: np.ndarray):
    """For each coordinate, the two bracketing tile indices and the weight of the upper one."""
    pos = np.arange(n, dtype=np.float64)
    upper = np.searchsorted(centers, pos, side="right")
    hi = np.clip(upper, 0, len(centers) - 1)
    lo = np.clip(upper - 1, 0, len(centers) - 1)
    span = centers[hi] - centers[lo]
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(span > 0, (pos - centers[lo]) / np.where(span > 0, span, 1), 0.0)
    return lo, hi, w


def tile_mappings(img: np.ndarray, cfg: LheConfig, levels: int = LEVELS,
                  max_level: float = MAX_LEVEL) -> np.ndarray:
    """Per-tile equalization tables, shape ``(tiles_y, tiles_x, levels)``."""
    q = quantize(img, levels, max_level)
    rows = _tile_bounds(q.shape[0], cfg.tile_size)
    cols = _tile_bounds(q.shape[1], cfg.tile_size)
    maps = np.empty((len(rows), len(cols), levels))
    for i, (r0, r1) in enumerate(rows):
        for j, (c0, c1) in enumerate(cols):
            block = q[r0:r1, c0:c1].ravel()
            density = np.bincount(block, minlength=levels) / block.size
            maps[i, j] = equalize_mapping(density, levels)
    return maps


def local_histogram_equalize(img: np.ndarray, cfg: LheConfig = LheConfig(),
                             levels: int = LEVELS, max_level: float = MAX_LEVEL) -> np.ndarray:
    """Tile-wise histogram equalization with bilinear blending between tiles.

    Every pixel is mapped through the tables of the (up to) four nearest tile
    centers and the results are blended bilinearly, as in CLAHE but with no
    clip limit. With one tile covering the image this is exactly global
    equalization.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError("expected a non-empty 2-D image")
    q = quantize(img, levels, max_level)
    maps = tile_mappings(img, cfg, levels, max_level)

    rows = _tile_bounds(img.shape[0], cfg.tile_size)
    cols = _tile_bounds(img.shape[1], cfg.tile_size)
    ry0, ry1, wy = _blend_weights(img.shape[0], (rows[:, 0] + rows[:, 1] - 1) / 2.0)
    cx0, cx1, wx = _blend_weights(img.shape[1], (cols[:, 0] + cols[:, 1] - 1) / 2.0)

    wy = wy[:, None]
    wx = wx[None, :]
    Y0, Y1 = ry0[:, None], ry1[:, None]
    X0, X1 = cx0[None, :], cx1[None, :]
    top = (1 - wx) * maps[Y0, X0, q] + wx * maps[Y0, X1, q]
    bottom = (1 - wx) * maps[Y1, X0, q] + wx * maps[Y1, X1, q]
    out = (1 - wy) * top + wy * bottom
    return np.clip(out * (max_level / (levels - 1)), 0.0, max_level)
