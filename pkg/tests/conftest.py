import os
from pathlib import Path

import numpy as np
import pytest
import skimage.data

from gradfuse import image, synth
from gradfuse.batch import PairEntry, read_manifest, write_manifest

GOLDEN = Path(__file__).parent / "golden"

# natural photographs bundled with scikit-image, used as stand-ins for Lytro scenes
SURROGATE_SCENES = ("astronaut", "coffee", "chelsea", "rocket", "immunohistochemistry")
PRISTINE_SCENES = ("camera", "astronaut", "coffee", "brick", "chelsea")


def scene(name: str, size: int = 256) -> np.ndarray:
    return image.resize_to(getattr(skimage.data, name)().astype(np.float64), size, size)


@pytest.fixture(scope="session")
def natural():
    """256x256 gray natural image."""
    return image.luma(scene("camera"))


@pytest.fixture(scope="session")
def natural_color():
    return scene("astronaut")


def _write_pairs(root: Path, pairs) -> Path:
    entries = []
    for name, (a, b, truth) in pairs:
        d = root / name
        d.mkdir(parents=True)
        image.save_image(d / "a.png", a)
        image.save_image(d / "b.png", b)
        image.save_image(d / "truth.png", np.where(truth == 1, 255.0, 0.0))
        entries.append(PairEntry(name, d / "a.png", d / "b.png", d / "truth.png"))
    write_manifest(root / "manifest.csv", entries)
    return root / "manifest.csv"


@pytest.fixture(scope="session")
def lytro_manifest(tmp_path_factory):
    """Manifest of >= 5 Lytro-style pairs.

    Uses real pairs when GRADFUSE_LYTRO_MANIFEST is set, otherwise depth-style
    surrogate pairs built from natural photographs.
    """
    real = os.environ.get("GRADFUSE_LYTRO_MANIFEST")
    if real:
        return Path(real)
    root = tmp_path_factory.mktemp("lytro_surrogate")
    pairs = [(name, synth.region_pair(scene(name), seed=k)) for k, name in enumerate(SURROGATE_SCENES)]
    return _write_pairs(root, pairs)


@pytest.fixture(scope="session")
def is_surrogate():
    return not os.environ.get("GRADFUSE_LYTRO_MANIFEST")


@pytest.fixture(scope="session")
def halves_manifest(tmp_path_factory):
    root = tmp_path_factory.mktemp("halves")
    pairs = [(name, synth.half_blur_pair(scene(name))) for name in PRISTINE_SCENES]
    return _write_pairs(root, pairs)


@pytest.fixture(scope="session")
def lytro_entries(lytro_manifest):
    return read_manifest(lytro_manifest)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
