"""Decision-level fusion: multi-scale majority pooling and voting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .focus import SOURCE_A, SOURCE_B
from .image import check_same_shape


class EmptyList(ValueError):
    pass


@dataclass(frozen=True)
class VoteConfig:
    window_sizes: tuple[int, ...] = (2, 4, 8)

    def __post_init__(self):
        if not self.window_sizes:
            raise ValueError("window_sizes must not be empty")
        if any(w < 1 for w in self.window_sizes):
            raise ValueError(f"window sizes must be >= 1, got {self.window_sizes}")


def majority_pool(decision: np.ndarray, w: int) -> np.ndarray:
    """Replace every ``w x w`` tile (top-left aligned) by its majority label.

    Edge tiles are pooled over their actual extent; a tile split exactly
    in half keeps the original labels.
    """
    if w < 1:
        raise ValueError(f"window size must be >= 1, got {w}")
    decision = np.asarray(decision, dtype=np.uint8)
    h, wd = decision.shape
    ph, pw = -h % w, -wd % w
    is_b = np.pad(decision == SOURCE_B, ((0, ph), (0, pw)))
    valid = np.pad(np.ones(decision.shape, dtype=bool), ((0, ph), (0, pw)))
    ty, tx = (h + ph) // w, (wd + pw) // w
    n_b = is_b.reshape(ty, w, tx, w).sum(axis=(1, 3))
    n = valid.reshape(ty, w, tx, w).sum(axis=(1, 3))
    n_a = n - n_b
    tile_label = np.where(n_b > n_a, SOURCE_B, SOURCE_A)
    tile_tie = n_b == n_a
    label = np.repeat(np.repeat(tile_label, w, axis=0), w, axis=1)[:h, :wd]
    tie = np.repeat(np.repeat(tile_tie, w, axis=0), w, axis=1)[:h, :wd]
    return np.where(tie, decision, label).astype(np.uint8)


def majority_vote(maps) -> np.ndarray:
    """Per-pixel majority over ``maps``; an even split takes the first map's label."""
    maps = [np.asarray(m, dtype=np.uint8) for m in maps]
    if not maps:
        raise EmptyList("majority_vote needs at least one map")
    check_same_shape(*maps)
    n_b = np.sum([m == SOURCE_B for m in maps], axis=0)
    n_a = len(maps) - n_b
    out = np.where(n_b > n_a, SOURCE_B, SOURCE_A).astype(np.uint8)
    tie = n_a == n_b
    out[tie] = maps[0][tie]
    return out


def refine(initial: np.ndarray, cfg: VoteConfig = VoteConfig()) -> np.ndarray:
    return majority_vote([majority_pool(initial, w) for w in cfg.window_sizes])
