"""Multi-focus image fusion with a halftoning / inverse-halftoning gradient transform."""

from .decide import VoteConfig, majority_pool, majority_vote, refine
from .enhance import LheConfig, local_histogram_equalize
from .focus import SOURCE_A, SOURCE_B, FocusConfig, build_decision_map, compose_fused, eog
from .halftone import FLOYD_STEINBERG, error_diffuse, gradient_transform, hvs_kernel, inverse_halftone
from .image import load_image, luma, resize_to, save_image, subtract_abs
from .metrics import MetricReport, evaluate_all
from .pipeline import FusionResult, PipelineConfig, fuse_images, fuse_pair

__version__ = "0.1.0"
