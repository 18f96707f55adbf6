"""Natural-scene statistics quality scoring."""

import numpy as np
import pytest
from scipy import ndimage

from countconf.errors import ValidationError
from countconf.imageops import GrayImage, to_gray
from countconf.niqe import (
    N_FEATURES,
    NiqeModel,
    fit_aggd,
    fit_pristine_model,
    load_default_model,
    mscn,
    niqe_score,
    quality_score,
)

import oracles


def _textured(seed, size=192):
    r = np.random.default_rng(seed)
    base = 120.0 + ndimage.gaussian_filter(r.normal(0.0, 40.0, (size, size)), 1.5)
    base += r.normal(0.0, 6.0, (size, size))
    return np.clip(base, 0.0, 255.0)


def test_mscn_matches_double_loop(rng):
    px = rng.uniform(0.0, 255.0, (16, 19))
    got = mscn(GrayImage(px))
    want = oracles.mscn_loops(px)
    assert got.shape == px.shape
    assert np.allclose(got, want, atol=1e-10)


def test_mscn_minimum_size():
    with pytest.raises(ValidationError):
        mscn(GrayImage(np.zeros((13, 40))))
    mscn(GrayImage(np.zeros((14, 14))))


def test_mscn_recentres_flat_regions():
    field = mscn(GrayImage(np.full((20, 20), 200.0)))
    assert np.allclose(field, 0.0)


def test_aggd_recovers_gaussian(rng):
    samples = rng.normal(0.0, 3.0, 200_000)
    params = fit_aggd(samples)
    assert 1.8 <= params.alpha <= 2.2
    # The side scales are generalized-Gaussian betas: at the fitted shape,
    # a standard deviation of 3 corresponds to 3 * sqrt(G(1/a) / G(3/a)).
    from math import gamma

    beta = 3.0 * np.sqrt(gamma(1.0 / params.alpha) / gamma(3.0 / params.alpha))
    assert params.sigma_left == pytest.approx(beta, rel=0.05)
    assert params.sigma_right == pytest.approx(beta, rel=0.05)
    assert params.sigma_left == pytest.approx(params.sigma_right, rel=0.05)


def test_aggd_recovers_laplacian(rng):
    samples = rng.laplace(0.0, 2.0, 200_000)
    params = fit_aggd(samples)
    assert 0.85 <= params.alpha <= 1.15


def test_aggd_detects_asymmetry(rng):
    # Negative side drawn three times wider than the positive side.
    neg = -np.abs(rng.normal(0.0, 3.0, 100_000))
    pos = np.abs(rng.normal(0.0, 1.0, 100_000))
    params = fit_aggd(np.concatenate([neg, pos]))
    assert params.sigma_left > 2.0 * params.sigma_right


def test_aggd_input_validation():
    with pytest.raises(ValidationError):
        fit_aggd(np.zeros(100))
    with pytest.raises(ValidationError):
        fit_aggd(np.ones(5))


def test_fit_requires_enough_material():
    imgs = [GrayImage(_textured(i)) for i in range(4)]
    with pytest.raises(ValidationError):
        fit_pristine_model(imgs, patch_size=96)
    # Ten images but only one usable patch each: still too few patches.
    small = [GrayImage(_textured(i, size=100)) for i in range(10)]
    with pytest.raises(ValidationError):
        fit_pristine_model(small, patch_size=96)


def test_fit_score_and_degradation_ordering():
    imgs = [GrayImage(_textured(i, size=384)) for i in range(10)]
    model = fit_pristine_model(imgs, patch_size=96, sharpness_fraction=1.0)
    assert model.mean.shape == (N_FEATURES,)
    assert model.covariance.shape == (N_FEATURES, N_FEATURES)
    clean = _textured(99, size=384)
    score_clean = niqe_score(GrayImage(clean), model)
    blurred = ndimage.gaussian_filter(clean, 3.0)
    score_blur = niqe_score(GrayImage(np.clip(blurred, 0, 255)), model)
    assert score_clean >= 0.0
    assert score_blur > score_clean
    assert quality_score(GrayImage(clean), model) == -score_clean


def test_score_is_deterministic(niqe_model):
    px = _textured(7, size=192)
    a = niqe_score(GrayImage(px), niqe_model)
    b = niqe_score(GrayImage(px.copy()), niqe_model)
    assert a == b


def test_bundled_model_flags_noise(niqe_model):
    r = np.random.default_rng(42)
    worse = 0
    total = 12
    for i in range(total):
        px = _textured(500 + i, size=192)
        noisy = np.clip(px + r.normal(0.0, 25.0, px.shape), 0.0, 255.0)
        if niqe_score(GrayImage(noisy), niqe_model) > niqe_score(GrayImage(px), niqe_model):
            worse += 1
    assert worse >= total - 1


def test_model_round_trip(tmp_path, niqe_model):
    path = tmp_path / "model.json"
    niqe_model.save(path)
    back = NiqeModel.load(path)
    assert np.array_equal(back.mean, niqe_model.mean)
    assert np.array_equal(back.covariance, niqe_model.covariance)
    assert back.patch_size == niqe_model.patch_size
    px = _textured(3, size=192)
    assert niqe_score(GrayImage(px), back) == niqe_score(GrayImage(px), niqe_model)


def test_model_load_rejects_malformed(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{\"patch_size\": 96}")
    with pytest.raises(ValidationError):
        NiqeModel.load(path)
    path.write_text("not json at all")
    with pytest.raises(ValidationError):
        NiqeModel.load(path)


def test_model_validation():
    mean = np.zeros(N_FEATURES)
    cov = np.eye(N_FEATURES)
    NiqeModel(mean=mean, covariance=cov, patch_size=96)
    bad = cov.copy()
    bad[0, 1] = 0.5
    with pytest.raises(ValidationError):
        NiqeModel(mean=mean, covariance=bad, patch_size=96)
    with pytest.raises(ValidationError):
        NiqeModel(mean=mean, covariance=-cov, patch_size=96)
    with pytest.raises(ValidationError):
        NiqeModel(mean=np.zeros(5), covariance=cov, patch_size=96)
    with pytest.raises(ValidationError):
        NiqeModel(mean=mean, covariance=cov, patch_size=4)


def test_default_model_loads(niqe_model):
    assert niqe_model.mean.shape == (N_FEATURES,)
    assert niqe_model.patch_size == 96
    again = load_default_model()
    assert np.array_equal(again.mean, niqe_model.mean)
