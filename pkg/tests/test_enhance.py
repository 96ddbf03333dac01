import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gradfuse.enhance import (
    InvalidDensity, LheConfig, equalize_mapping, histogram, local_histogram_equalize, quantize, tile_mappings,
)
from gradfuse.image import load_image, luma, resize_to


def test_histogram_examples():
    p = histogram(np.full((5, 5), 7.0))
    assert p[7] == 1.0 and p.sum() == 1.0
    half = np.zeros((4, 4))
    half[:, 2:] = 255
    p = histogram(half)
    assert p[0] == p[255] == 0.5
    p = histogram(np.array([[0.0, 0.0], [1.0, 3.0]]))
    assert (p[0], p[1], p[3]) == (0.5, 0.25, 0.25)


def test_histogram_rounds_half_up():
    p = histogram(np.array([[0.5, 1.49, 254.5]]))
    assert p[1] == pytest.approx(2 / 3) and p[255] == pytest.approx(1 / 3)


def test_mapping_single_bin():
    d = np.zeros(256)
    d[100] = 1.0
    assert equalize_mapping(d)[100] == 255


def test_mapping_half_and_half():
    d = np.zeros(256)
    d[0] = d[255] = 0.5
    g = equalize_mapping(d)
    assert g[0] == math.floor(255 * 0.5) == 127
    assert g[255] == 255


def test_mapping_uniform_density():
    g = equalize_mapping(np.full(256, 1 / 256))
    expected = [math.floor(255 * (k + 1) / 256) for k in range(256)]
    np.testing.assert_array_equal(g, expected)
    assert np.all(np.abs(g - np.arange(256)) <= 1)


def test_mapping_rejects_bad_density():
    with pytest.raises(InvalidDensity):
        equalize_mapping(np.full(256, 1 / 200))
    d = np.zeros(256)
    d[0], d[1] = 1.5, -0.5
    with pytest.raises(InvalidDensity):
        equalize_mapping(d)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, 256, elements=st.floats(0, 1)).filter(lambda a: a.sum() > 0))
def test_mapping_monotone_and_bounded(raw):
    d = raw / raw.sum()
    d = d / d.sum()
    if abs(d.sum() - 1) > 1e-9:
        return
    g = equalize_mapping(d)
    assert np.all(np.diff(g) >= 0)
    assert g.min() >= 0 and g.max() <= 255
    assert g[np.nonzero(d)[0][-1]] == 255


def test_constant_image_goes_to_white():
    out = local_histogram_equalize(np.full((64, 48), 100.0), LheConfig(16))
    np.testing.assert_array_equal(out, 255.0)


def test_uniform_tiles_are_near_identity():
    rng = np.random.default_rng(3)
    img = np.zeros((64, 64))
    for i in range(0, 64, 16):
        for j in range(0, 64, 16):
            img[i:i + 16, j:j + 16] = rng.permutation(256).reshape(16, 16)
    out = local_histogram_equalize(img, LheConfig(16))
    assert np.max(np.abs(out - img)) <= 1.0


def _global_he(img):
    q = np.clip(np.floor(img + 0.5), 0, 255).astype(int)
    counts = np.zeros(256)
    for v in q.ravel():
        counts[v] += 1
    cdf = 0.0
    table = []
    for k in range(256):
        cdf += counts[k]
        table.append(math.floor(255 * cdf / q.size))
    return np.array(table, dtype=float)[q]


@pytest.mark.parametrize("tile", [64, 100])
def test_single_tile_equals_global_equalization(natural, tile):
    crop = natural[:64, 10:60]
    out = local_histogram_equalize(crop, LheConfig(tile))
    np.testing.assert_array_equal(out, _global_he(crop))


def test_output_bounded_and_monotone_per_tile(natural):
    maps = tile_mappings(natural, LheConfig(32))
    assert np.all(np.diff(maps, axis=-1) >= 0)
    out = local_histogram_equalize(natural, LheConfig(32))
    assert out.min() >= 0 and out.max() <= 255
    # at a fixed position the blended lookup is monotone in the input level
    probe = natural.copy()
    outs = []
    for v in (0.0, 64.0, 128.0, 192.0, 255.0):
        probe[100, 100] = v
        outs.append(local_histogram_equalize(probe, LheConfig(32))[100, 100])
    assert outs == sorted(outs)


def _entropy(block):
    h = np.bincount(quantize(block).ravel(), minlength=256) / block.size
    h = h[h > 0]
    return -(h * np.log2(h)).sum()


def _tile_entropy_deltas(gray, tile=32):
    out = local_histogram_equalize(gray, LheConfig(tile))
    h, w = gray.shape
    return [_entropy(out[i:i + tile, j:j + tile]) - _entropy(gray[i:i + tile, j:j + tile])
            for i in range(0, h, tile) for j in range(0, w, tile)]


def test_tile_entropy_does_not_decrease(lytro_entries):
    worst = {}
    for e in lytro_entries:
        for path in (e.path_a, e.path_b):
            gray = luma(resize_to(load_image(path), 256, 256))
            worst[f"{e.name}/{path.stem}"] = min(_tile_entropy_deltas(gray))
    assert all(d >= 0 for d in worst.values()), worst


def test_pure_tile_mapping_never_adds_entropy(natural):
    # a per-level lookup can only merge occupied levels
    for i in range(0, 256, 32):
        for j in range(0, 256, 32):
            t = natural[i:i + 32, j:j + 32]
            g = equalize_mapping(histogram(t))[quantize(t)]
            assert _entropy(g) <= _entropy(t) + 1e-12


def test_config_validation():
    with pytest.raises(ValueError):
        LheConfig(1)
