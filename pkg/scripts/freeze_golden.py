"""Recompute the golden values under tests/golden/.

Run once after an intentional numerical change and review the diff.
"""

import json
import sys
import tempfile
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from conftest import GOLDEN, SURROGATE_SCENES, _write_pairs, scene  # noqa: E402
from gradfuse import image, synth  # noqa: E402
from gradfuse.batch import read_manifest, run_batch  # noqa: E402
from gradfuse.halftone import gradient_transform  # noqa: E402
from gradfuse.metrics import evaluate_all  # noqa: E402
from gradfuse.pipeline import PipelineConfig  # noqa: E402


def dump(name, payload):
    (GOLDEN / name).write_text(json.dumps(payload, indent=2) + "\n")
    print("wrote", GOLDEN / name)


def main():
    GOLDEN.mkdir(exist_ok=True)
    grad, _, _ = gradient_transform(np.full((64, 64), 128.0))
    dump("halftone.json", {"const128_mean_abs_grad": float(np.mean(np.abs(grad)))})

    cam = image.luma(scene("camera"))
    dump("identity_camera.json", evaluate_all(cam, cam, cam).as_dict())

    with tempfile.TemporaryDirectory() as tmp:
        pairs = [(n, synth.region_pair(scene(n), seed=k)) for k, n in enumerate(SURROGATE_SCENES)]
        manifest = _write_pairs(Path(tmp), pairs)
        results = run_batch(read_manifest(manifest), PipelineConfig())
        per_pair = {r.name: r.report.as_dict() for r in results}
        dump("lytro_surrogate.json", {
            "pairs": per_pair,
            "mean": {m: float(np.mean([p[m] for p in per_pair.values()])) for m in next(iter(per_pair.values()))},
        })


if __name__ == "__main__":
    main()
