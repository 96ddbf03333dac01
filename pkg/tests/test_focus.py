import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gradfuse.decide import refine
from gradfuse.enhance import local_histogram_equalize
from gradfuse.focus import (
    SOURCE_A, SOURCE_B, FocusConfig, WindowTooSmall, build_decision_map, compose_fused, eog, eog_map, stddev,
)
from gradfuse.halftone import gradient_transform
from gradfuse.image import DimensionMismatch, luma
from gradfuse.synth import half_blur_pair, label_accuracy

blocks = arrays(np.float64, st.tuples(st.integers(2, 7), st.integers(2, 7)), elements=st.floats(-300, 300))


def test_eog_examples():
    assert eog(np.full((4, 5), 3.0)) == 0.0
    assert eog(np.array([[0.0, 1.0], [0.0, 1.0]])) == 2.0
    ramp = np.tile(np.arange(3.0), (3, 1))
    assert eog(ramp) == 6.0


def test_eog_window_too_small():
    with pytest.raises(WindowTooSmall):
        eog(np.ones((1, 5)))


@settings(max_examples=60, deadline=None)
@given(blocks, st.floats(-100, 100))
def test_eog_translation_invariant(block, c):
    assert eog(block + c) == pytest.approx(eog(block), rel=1e-9, abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(blocks, st.floats(-4, 4))
def test_eog_quadratic_scaling(block, k):
    assert eog(k * block) == pytest.approx(k * k * eog(block), rel=1e-9, abs=1e-6)


def two_pass_std(values):
    values = [float(v) for v in np.ravel(values)]
    mean = sum(values) / len(values)
    return (sum((v - mean) ** 2 for v in values) / len(values)) ** 0.5


def test_stddev_examples(natural):
    assert stddev(np.full((3, 3), 7.0)) == 0.0
    assert stddev(np.array([0.0, 2.0])) == 1.0
    crop = natural[120:123, 80:83]
    assert stddev(crop) == pytest.approx(two_pass_std(crop), abs=1e-9)


def brute_force_map(ga, gb, ea, eb, b, eps=0.0):
    r = b // 2
    pads = [np.pad(x, r, mode="edge") for x in (ga, gb, ea, eb)]
    out = np.zeros(ga.shape, dtype=np.uint8)
    for y in range(ga.shape[0]):
        for x in range(ga.shape[1]):
            wa, wb, sa, sb = (p[y:y + b, x:x + b] for p in pads)
            fa, fb = eog(wa), eog(wb)
            if abs(fa - fb) > eps:
                out[y, x] = SOURCE_B if fb > fa else SOURCE_A
            else:
                out[y, x] = SOURCE_B if two_pass_std(sb) > two_pass_std(sa) else SOURCE_A
    return out


def test_decision_map_matches_brute_force(natural):
    a = natural[64:96, 64:96]
    b = np.roll(natural, 7, axis=1)[64:96, 64:96]
    ea, eb = local_histogram_equalize(a), local_histogram_equalize(b)
    ga, gb = gradient_transform(ea)[0], gradient_transform(eb)[0]
    for block in (3, 9):
        got = build_decision_map(ga, gb, ea, eb, FocusConfig(block))
        np.testing.assert_array_equal(got, brute_force_map(ga, gb, ea, eb, block))


def test_decision_map_tie_break_brute_force():
    # equal gradients everywhere: stddev of the equalized images must decide
    rng = np.random.default_rng(5)
    g = rng.normal(size=(32, 32))
    ea = rng.uniform(0, 255, (32, 32))
    eb = ea.copy()
    eb[:, 16:] *= 0.2
    got = build_decision_map(g, g, ea, eb, FocusConfig(5))
    np.testing.assert_array_equal(got, brute_force_map(g, g, ea, eb, 5))
    assert np.all(got[:, 22:] == SOURCE_A)


def test_full_tie_goes_to_a(natural):
    g = natural - 128
    assert np.all(build_decision_map(g, g, natural, natural) == SOURCE_A)


def test_strict_dominance():
    cb = np.indices((32, 32)).sum(axis=0) % 2 * 200.0 - 100.0
    zeros = np.zeros((32, 32))
    assert np.all(build_decision_map(cb, zeros, zeros, zeros) == SOURCE_A)
    assert np.all(build_decision_map(zeros, cb, zeros, zeros) == SOURCE_B)


def test_swap_antisymmetry(natural):
    rng = np.random.default_rng(1)
    ga = rng.normal(size=(48, 48))
    gb = rng.normal(size=(48, 48))
    eq = natural[:48, :48]
    ab = build_decision_map(ga, gb, eq, eq)
    ba = build_decision_map(gb, ga, eq, eq)
    strict = eog_map(ga, 9) != eog_map(gb, 9)
    np.testing.assert_array_equal(ab[strict], 1 - ba[strict])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        build_decision_map(np.zeros((8, 8)), np.zeros((8, 9)), np.zeros((8, 8)), np.zeros((8, 8)))


def test_config_validation():
    for bad in (2, 8, 1):
        with pytest.raises(ValueError):
            FocusConfig(bad)
    with pytest.raises(ValueError):
        FocusConfig(9, -1.0)


def _initial_and_refined(pristine):
    a, b, truth = half_blur_pair(pristine)
    stages = []
    for src in (a, b):
        eq = local_histogram_equalize(luma(src))
        stages.append((gradient_transform(eq)[0], eq))
    initial = build_decision_map(stages[0][0], stages[1][0], stages[0][1], stages[1][1])
    return initial, refine(initial), truth


def test_synthetic_half_blur_accuracy(natural):
    initial, _, truth = _initial_and_refined(natural)
    assert label_accuracy(initial, truth, exclude_band=9) >= 0.90


def test_refine_does_not_hurt_accuracy(natural):
    initial, refined, truth = _initial_and_refined(natural)
    assert label_accuracy(refined, truth, 9) >= label_accuracy(initial, truth, 9)


def test_compose_identities(natural_color):
    rng = np.random.default_rng(2)
    d = rng.integers(0, 2, natural_color.shape[:2]).astype(np.uint8)
    np.testing.assert_array_equal(compose_fused(natural_color, natural_color, d), natural_color)
    other = natural_color[::-1]
    np.testing.assert_array_equal(compose_fused(natural_color, other, np.ones_like(d)), other)
    np.testing.assert_array_equal(compose_fused(np.full((4, 4), 10.0), np.full((4, 4), 200.0), d[:4, :4]),
                                  np.where(d[:4, :4] == 1, 200.0, 10.0))


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, (6, 7), elements=st.integers(0, 1)), st.integers(0, 2 ** 31))
def test_compose_never_invents_values(d, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(0, 255, (2, 6, 7))
    f = compose_fused(a, b, d)
    assert np.all((f == a) | (f == b))
