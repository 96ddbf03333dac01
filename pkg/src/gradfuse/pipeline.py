"""End-to-end fusion of one image pair."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import image
from .decide import VoteConfig, refine
from .enhance import LheConfig, local_histogram_equalize
from .focus import SOURCE_B, FocusConfig, build_decision_map, compose_fused
from .halftone import DIFFUSION_KERNELS, gradient_transform


@dataclass(frozen=True)
class PipelineConfig:
    lhe_tile: int = 32
    hvs_sigma: float = 1.5
    hvs_radius: int = 3
    diffusion: str = "floyd"
    focus_block: int = 9
    tie_eps: float = 0.0
    vote_windows: tuple[int, ...] = (2, 4, 8)
    decision_fusion: bool = True
    size: tuple[int, int] | None = (256, 256)
    dump_stages: bool = False
    dump_map: bool = False

    def __post_init__(self):
        # build the component configs once so their invariants are checked here
        LheConfig(self.lhe_tile)
        FocusConfig(self.focus_block, self.tie_eps)
        VoteConfig(tuple(self.vote_windows))
        if self.diffusion not in DIFFUSION_KERNELS:
            raise ValueError(f"unknown diffusion kernel {self.diffusion!r}; "
                             f"choose from {sorted(DIFFUSION_KERNELS)}")
        if self.hvs_sigma <= 0 or self.hvs_radius < 1:
            raise ValueError("hvs_sigma must be > 0 and hvs_radius >= 1")
        if self.size is not None:
            w, h = self.size
            if min(w, h) < self.focus_block:
                raise ValueError(f"resize target {w}x{h} is smaller than the focus block")


@dataclass
class FusionResult:
    fused: np.ndarray
    decision: np.ndarray
    initial_decision: np.ndarray
    src_a: np.ndarray
    src_b: np.ndarray
    seconds: float
    stages: dict = field(default_factory=dict)


def _stages(gray: np.ndarray, cfg: PipelineConfig) -> dict:
    eq = local_histogram_equalize(gray, LheConfig(cfg.lhe_tile))
    grad, bw, blur = gradient_transform(eq, cfg.hvs_sigma, cfg.hvs_radius,
                                        DIFFUSION_KERNELS[cfg.diffusion])
    return {"eq": eq, "bw": bw, "blur": blur, "grad": grad}


def fuse_images(src_a: np.ndarray, src_b: np.ndarray,
                cfg: PipelineConfig = PipelineConfig()) -> FusionResult:
    """Fuse two already-decoded images (gray or color).

    Inputs are resized to ``cfg.size`` first; analysis runs on luma and the
    fused image copies whole pixels from the resized originals.
    """
    if cfg.size is not None:
        src_a = image.resize_to(src_a, *cfg.size)
        src_b = image.resize_to(src_b, *cfg.size)
    image.check_same_shape(src_a, src_b)
    if np.ndim(src_a) != np.ndim(src_b):
        raise image.DimensionMismatch("cannot fuse a gray image with a color image")

    t0 = time.perf_counter()
    st_a = _stages(image.luma(src_a), cfg)
    st_b = _stages(image.luma(src_b), cfg)
    initial = build_decision_map(st_a["grad"], st_b["grad"], st_a["eq"], st_b["eq"],
                                 FocusConfig(cfg.focus_block, cfg.tie_eps))
    decision = refine(initial, VoteConfig(tuple(cfg.vote_windows))) if cfg.decision_fusion else initial
    fused = compose_fused(src_a, src_b, decision)
    seconds = time.perf_counter() - t0
    return FusionResult(fused, decision, initial, src_a, src_b, seconds, {"a": st_a, "b": st_b})


def map_image(decision: np.ndarray) -> np.ndarray:
    """Two-tone rendering: source A black, source B white."""
    return np.where(decision == SOURCE_B, 255.0, 0.0)


def error_image(fused: np.ndarray, src: np.ndarray) -> np.ndarray:
    return image.minmax_normalize(image.subtract_abs(image.luma(fused), image.luma(src)))


def write_outputs(result: FusionResult, out_dir: str | Path, dump_stages: bool = False,
                  dump_map: bool = False) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    image.save_image(out_dir / "fused.png", result.fused)
    image.save_image(out_dir / "map.png", map_image(result.decision))
    image.save_image(out_dir / "errorA.png", error_image(result.fused, result.src_a))
    image.save_image(out_dir / "errorB.png", error_image(result.fused, result.src_b))
    if dump_stages:
        for src, st in result.stages.items():
            image.save_image(out_dir / f"eq{src.upper()}.png", st["eq"])
            image.save_image(out_dir / f"bw{src.upper()}.png", st["bw"] * 255.0)
            image.save_image(out_dir / f"blur{src.upper()}.png", st["blur"])
            # signed gradient shown around mid-gray
            image.save_image(out_dir / f"grad{src.upper()}.png", st["grad"] + 127.5)
    if dump_map or dump_stages:
        image.save_image(out_dir / "map_initial.png", map_image(result.initial_decision))


def fuse_pair(path_a, path_b, cfg: PipelineConfig = PipelineConfig(), out_dir=None) -> FusionResult:
    """Load, fuse and (optionally) write ``fused.png``, ``map.png`` and error images."""
    result = fuse_images(image.load_image(path_a), image.load_image(path_b), cfg)
    if out_dir is not None:
        write_outputs(result, out_dir, cfg.dump_stages, cfg.dump_map)
    return result
