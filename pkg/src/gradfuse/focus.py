"""Block focus measures and the initial per-pixel decision map."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image import check_same_shape


class Source(IntEnum):
    A = 0
    B = 1


SOURCE_A = Source.A
SOURCE_B = Source.B


class WindowTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class FocusConfig:
    block_size: int = 9
    tie_epsilon: float = 0.0

    def __post_init__(self):
        if self.block_size < 3 or self.block_size % 2 == 0:
            raise ValueError(f"block_size must be odd and >= 3, got {self.block_size}")
        if self.tie_epsilon < 0:
            raise ValueError("tie_epsilon must be >= 0")


def eog(block: np.ndarray) -> float:
    """Energy of gradient: sum of squared forward differences along rows and columns."""
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 2 or min(block.shape) < 2:
        raise WindowTooSmall(f"eog needs at least a 2x2 window, got {block.shape}")
    d_row = block[1:, :] - block[:-1, :]
    d_col = block[:, 1:] - block[:, :-1]
    return float(np.sum(d_row * d_row) + np.sum(d_col * d_col))


def stddev(block: np.ndarray) -> float:
    """Population standard deviation of the window samples."""
    block = np.asarray(block, dtype=np.float64)
    if block.size == 0:
        raise ValueError("empty window")
    return float(np.std(block))


def eog_map(img: np.ndarray, block_size: int) -> np.ndarray:
    """EOG of the centered ``block_size`` window at every pixel (replicate padding)."""
    r = block_size // 2
    padded = np.pad(np.asarray(img, dtype=np.float64), r, mode="edge")
    d_row = padded[1:, :] - padded[:-1, :]
    d_col = padded[:, 1:] - padded[:, :-1]
    # row differences inside a b x b window form a (b-1) x b patch; column differences b x (b-1)
    e_row = sliding_window_view(d_row * d_row, (block_size - 1, block_size)).sum(axis=(-2, -1))
    e_col = sliding_window_view(d_col * d_col, (block_size, block_size - 1)).sum(axis=(-2, -1))
    return e_row + e_col


def std_map(img: np.ndarray, block_size: int) -> np.ndarray:
    r = block_size // 2
    padded = np.pad(np.asarray(img, dtype=np.float64), r, mode="edge")
    return sliding_window_view(padded, (block_size, block_size)).std(axis=(-2, -1))


def build_decision_map(grad_a: np.ndarray, grad_b: np.ndarray,
                       eq_a: np.ndarray, eq_b: np.ndarray,
                       cfg: FocusConfig = FocusConfig()) -> np.ndarray:
    """Label each pixel with the source whose window carries more gradient energy.

    Where the two EOG values are within ``cfg.tie_epsilon`` the larger window
    standard deviation of the equalized sources decides; a remaining tie goes
    to source A. Returns a ``uint8`` map of :class:`Source` values.
    """
    check_same_shape(grad_a, grad_b, eq_a, eq_b)
    ea = eog_map(grad_a, cfg.block_size)
    eb = eog_map(grad_b, cfg.block_size)
    labels = np.where(eb > ea, SOURCE_B, SOURCE_A).astype(np.uint8)
    tie = np.abs(ea - eb) <= cfg.tie_epsilon
    if tie.any():
        sa = std_map(eq_a, cfg.block_size)
        sb = std_map(eq_b, cfg.block_size)
        labels[tie] = np.where(sb[tie] > sa[tie], SOURCE_B, SOURCE_A)
    return labels


def compose_fused(src_a: np.ndarray, src_b: np.ndarray, decision: np.ndarray) -> np.ndarray:
    """Copy every pixel from the source its label names; color images per channel."""
    check_same_shape(src_a, src_b, decision)
    pick_b = np.asarray(decision) == SOURCE_B
    if np.ndim(src_a) == 3:
        pick_b = pick_b[..., None]
    return np.where(pick_b, src_b, src_a)
