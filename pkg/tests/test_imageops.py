"""Grayscale conversion, sharpness, entropy, and edge density."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from countconf.errors import ValidationError
from countconf.imageops import (
    GRADIENT_NORMALIZER,
    GrayImage,
    average_gradient_magnitude,
    edge_density,
    histogram_entropy,
    sobel_magnitude,
    to_gray,
)

import oracles


def test_gray_image_validation():
    GrayImage(np.zeros((3, 3)))
    with pytest.raises(ValidationError):
        GrayImage(np.zeros((3,)))
    with pytest.raises(ValidationError):
        GrayImage(np.zeros((0, 3)))
    with pytest.raises(ValidationError):
        GrayImage(np.full((3, 3), 300.0))
    with pytest.raises(ValidationError):
        GrayImage(np.full((3, 3), np.nan))


def test_to_gray_weights():
    rgb = np.zeros((2, 2, 3), dtype=np.uint8)
    rgb[0, 0] = (255, 0, 0)
    rgb[0, 1] = (0, 255, 0)
    rgb[1, 0] = (0, 0, 255)
    rgb[1, 1] = (10, 20, 30)
    g = to_gray(rgb)
    assert g.pixels[0, 0] == pytest.approx(0.299 * 255)
    assert g.pixels[0, 1] == pytest.approx(0.587 * 255)
    assert g.pixels[1, 0] == pytest.approx(0.114 * 255)
    assert g.pixels[1, 1] == pytest.approx(0.299 * 10 + 0.587 * 20 + 0.114 * 30)


def test_sobel_matches_double_loop(rng):
    px = rng.uniform(0.0, 255.0, (12, 17))
    got = sobel_magnitude(GrayImage(px))
    want = oracles.sobel_magnitude_loops(px)
    assert got.shape == (10, 15)
    assert np.allclose(got, want, atol=1e-12)


def test_sobel_requires_3x3():
    with pytest.raises(ValidationError):
        sobel_magnitude(GrayImage(np.zeros((2, 5))))


def test_agm_constant_zero_and_bounds(rng):
    assert average_gradient_magnitude(GrayImage(np.full((8, 8), 123.0))) == 0.0
    for _ in range(5):
        px = rng.uniform(0.0, 255.0, (16, 16))
        v = average_gradient_magnitude(GrayImage(px))
        assert 0.0 <= v <= 1.0


def test_step_edge_hand_value():
    # A full-contrast vertical step centered in the window gives the maximal
    # horizontal response 255*4 and no vertical response, so the normalized
    # magnitude is exactly 1/sqrt(2).
    px = np.zeros((5, 5))
    px[:, 2:] = 255.0
    mags = sobel_magnitude(GrayImage(px))
    assert mags[1, 0] == pytest.approx(1.0 / np.sqrt(2.0))
    assert GRADIENT_NORMALIZER == pytest.approx(255.0 * 4.0 * np.sqrt(2.0))


def test_agm_decreases_under_blur(rng):
    px = rng.uniform(0.0, 255.0, (64, 64))
    values = []
    for sigma in (0.0, 2.0, 4.0):
        blurred = ndimage.gaussian_filter(px, sigma) if sigma else px
        values.append(average_gradient_magnitude(GrayImage(np.clip(blurred, 0, 255))))
    assert values[0] > values[1] > values[2]


def test_entropy_matches_direct_histogram(rng):
    px = rng.uniform(0.0, 255.0, (40, 40))
    got = histogram_entropy(GrayImage(px))
    assert got == pytest.approx(oracles.histogram_entropy_bits(px) / 8.0, abs=1e-12)


def test_entropy_extremes():
    assert histogram_entropy(GrayImage(np.full((10, 10), 42.0))) == 0.0
    # One pixel per gray level in every row: a perfectly flat histogram.
    flat = np.tile(np.arange(256, dtype=np.float64), (256, 1))
    assert histogram_entropy(GrayImage(flat)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_entropy_is_permutation_invariant(seed):
    r = np.random.default_rng(seed)
    px = r.uniform(0.0, 255.0, (12, 12))
    shuffled = r.permutation(px.ravel()).reshape(px.shape)
    assert histogram_entropy(GrayImage(px)) == histogram_entropy(GrayImage(shuffled))


def test_edge_density_threshold_and_bounds(rng):
    px = rng.uniform(0.0, 255.0, (32, 32))
    img = GrayImage(px)
    d_low = edge_density(img, threshold=0.01)
    d_high = edge_density(img, threshold=0.9)
    assert 0.0 <= d_high <= d_low <= 1.0
    assert edge_density(GrayImage(np.full((8, 8), 7.0)), threshold=0.1) == 0.0
    with pytest.raises(ValidationError):
        edge_density(img, threshold=0.0)
    with pytest.raises(ValidationError):
        edge_density(img, threshold=1.5)
