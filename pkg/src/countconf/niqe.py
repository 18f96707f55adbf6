"""From-scratch no-reference quality metric in the NIQE family.

Follows the completely-blind recipe of Mittal, Soundararajan and Bovik
(IEEE SPL 2013): mean-subtracted contrast-normalized (MSCN) coefficients,
generalized-Gaussian feature fits per patch at two scales, a multivariate
Gaussian model of a pristine corpus, and a Mahalanobis-type distance as the
quality score. Lower raw score means higher quality; ``quality_score``
negates it so higher is better for the downstream factor model.

A default pristine model ships with the package as JSON, fit from the
synthetic clean, sharp trap scenes of the synth module; users can refit
from their own corpus and point the config at the result.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage
from scipy.special import gamma as gamma_fn

from .errors import ValidationError
from .imageops import GrayImage, average_gradient_magnitude

N_FEATURES = 36  # 18 per scale, 2 scales

# Lookup table for the moment-matching shape estimate.
_SHAPE_GRID = np.arange(0.2, 10.001, 0.001)
_SHAPE_RATIO = (gamma_fn(2.0 / _SHAPE_GRID) ** 2) / (
    gamma_fn(1.0 / _SHAPE_GRID) * gamma_fn(3.0 / _SHAPE_GRID)
)

_MSCN_HALF_WINDOW = 3  # 7-tap Gaussian window
_MSCN_SIGMA = 7.0 / 6.0


@dataclass(frozen=True)
class AggdParams:
    """Asymmetric generalized Gaussian parameters (shape plus two scales)."""

    alpha: float
    sigma_left: float
    sigma_right: float

    def __post_init__(self) -> None:
        for name in ("alpha", "sigma_left", "sigma_right"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"AGGD parameter {name!r} must be positive and finite")


@dataclass(frozen=True)
class NiqeModel:
    """Pristine-corpus Gaussian: feature mean plus covariance."""

    mean: np.ndarray
    covariance: np.ndarray
    patch_size: int = 96
    sharpness_fraction: float = 0.75

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        if mean.shape != (N_FEATURES,):
            raise ValidationError(f"model mean must have shape ({N_FEATURES},)")
        if cov.shape != (N_FEATURES, N_FEATURES):
            raise ValidationError(f"model covariance must be {N_FEATURES}x{N_FEATURES}")
        if not np.allclose(cov, cov.T, atol=1e-9):
            raise ValidationError("model covariance must be symmetric within 1e-9")
        eigvals = np.linalg.eigvalsh((cov + cov.T) / 2.0)
        if eigvals.min() < -1e-9:
            raise ValidationError("model covariance must be positive semidefinite")
        if not (0.0 < self.sharpness_fraction <= 1.0):
            raise ValidationError("sharpness_fraction must lie in (0, 1]")
        if self.patch_size < 8:
            raise ValidationError("patch_size is too small")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    def save(self, path: str | Path) -> None:
        payload = {
            "patch_size": self.patch_size,
            "scales": 2,
            "sharpness_fraction": self.sharpness_fraction,
            "mean": self.mean.tolist(),
            "cov": self.covariance.tolist(),
        }
        with open(path, "w") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path: str | Path) -> "NiqeModel":
        with open(path) as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as err:
                raise ValidationError(f"NIQE model file {path} is not valid JSON: {err}") from err
        if not isinstance(payload, dict):
            raise ValidationError(f"NIQE model file {path} must hold a JSON object")
        for key in ("patch_size", "mean", "cov"):
            if key not in payload:
                raise ValidationError(f"NIQE model file {path} is missing key {key!r}")
        return cls(
            mean=np.array(payload["mean"], dtype=np.float64),
            covariance=np.array(payload["cov"], dtype=np.float64),
            patch_size=int(payload["patch_size"]),
            sharpness_fraction=float(payload.get("sharpness_fraction", 0.75)),
        )


def load_default_model() -> NiqeModel:
    """The bundled pristine model fit on the synthetic clean-scene corpus."""
    from importlib import resources

    ref = resources.files("countconf").joinpath("models/pristine_niqe.json")
    with resources.as_file(ref) as path:
        return NiqeModel.load(path)


def _gauss_window(half: int, sigma: float) -> np.ndarray:
    t = np.arange(-half, half + 1, dtype=np.float64)
    w = np.exp(-0.5 * (t / sigma) ** 2)
    return w / w.sum()


def mscn(img: GrayImage) -> np.ndarray:
    """Mean-subtracted contrast-normalized field, (I - mu) / (sigma + 1).

    mu and sigma are Gaussian-weighted local moments over a 7x7 window
    (sigma 7/6), borders replicated. Output has the input's shape.
    """
    size = 2 * _MSCN_HALF_WINDOW + 1
    if img.height < 2 * size or img.width < 2 * size:
        raise ValidationError(
            f"image must be at least {2 * size}x{2 * size} for MSCN, got {img.height}x{img.width}"
        )
    return _mscn_field(img.pixels)


def _mscn_field(px: np.ndarray) -> np.ndarray:
    window = _gauss_window(_MSCN_HALF_WINDOW, _MSCN_SIGMA)
    mu = ndimage.correlate1d(px, window, axis=0, mode="nearest")
    mu = ndimage.correlate1d(mu, window, axis=1, mode="nearest")
    second = ndimage.correlate1d(px * px, window, axis=0, mode="nearest")
    second = ndimage.correlate1d(second, window, axis=1, mode="nearest")
    sigma = np.sqrt(np.abs(second - mu * mu))
    return (px - mu) / (sigma + 1.0)


def fit_aggd(samples: np.ndarray) -> AggdParams:
    """Moment-matching AGGD estimate over a flat sample vector.

    For zero-mean Gaussian input the shape tends to 2 with near-equal scales;
    for Laplace input it tends to 1. All-zero input is degenerate.
    """
    vec = np.asarray(samples, dtype=np.float64).ravel()
    if vec.size < 16:
        raise ValidationError(f"AGGD fit needs at least 16 samples, got {vec.size}")
    sq = vec * vec
    mean_sq = sq.mean()
    if mean_sq == 0.0:
        raise ValidationError("AGGD fit is degenerate: all samples are zero")
    # One-sided data would zero a std; floor keeps the parameters positive.
    left_std = max(math.sqrt(sq[vec < 0].mean()) if np.any(vec < 0) else 0.0, 1e-12)
    right_std = max(math.sqrt(sq[vec >= 0].mean()) if np.any(vec >= 0) else 0.0, 1e-12)
    gamma_hat = left_std / right_std
    r_hat = (np.abs(vec).mean() ** 2) / mean_sq
    r_norm = r_hat * (gamma_hat**3 + 1.0) * (gamma_hat + 1.0) / (gamma_hat**2 + 1.0) ** 2
    alpha = float(_SHAPE_GRID[np.argmin((_SHAPE_RATIO - r_norm) ** 2)])
    ratio = math.sqrt(gamma_fn(1.0 / alpha) / gamma_fn(3.0 / alpha))
    return AggdParams(
        alpha=alpha,
        sigma_left=max(left_std * ratio, 1e-12),
        sigma_right=max(right_std * ratio, 1e-12),
    )


def _patch_features(field: np.ndarray) -> np.ndarray:
    """18 natural-scene-statistics features of one MSCN patch.

    Layout: symmetric fit of the MSCN coefficients (shape, mean scale), then
    for each pairwise-product orientation H, V, D1, D2 the AGGD quadruple
    (shape, mean parameter, left scale, right scale).
    """
    head = fit_aggd(field)
    feats = [head.alpha, 0.5 * (head.sigma_left + head.sigma_right)]
    products = (
        field[:, :-1] * field[:, 1:],          # horizontal neighbors
        field[:-1, :] * field[1:, :],          # vertical
        field[:-1, :-1] * field[1:, 1:],       # main diagonal
        field[:-1, 1:] * field[1:, :-1],       # anti-diagonal
    )
    for prod in products:
        p = fit_aggd(prod)
        eta = (p.sigma_right - p.sigma_left) * gamma_fn(2.0 / p.alpha) / gamma_fn(1.0 / p.alpha)
        feats.extend([p.alpha, eta, p.sigma_left, p.sigma_right])
    return np.array(feats)


def _half_scale(px: np.ndarray) -> np.ndarray:
    h, w = px.shape
    return px[: h - h % 2, : w - w % 2].reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def _patch_grid(shape: tuple[int, int], patch: int) -> tuple[int, int]:
    return shape[0] // patch, shape[1] // patch


def _image_patch_features(
    img: GrayImage, patch_size: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-patch 36-dim features and per-patch sharpness for one image.

    Patches tile the image on a whole-patch grid (remainders cropped); the
    second 18 features come from the co-located patch of the half-scale
    MSCN field. Sharpness is the full-resolution patch AGM.
    """
    rows, cols = _patch_grid((img.height, img.width), patch_size)
    if rows < 1 or cols < 1:
        raise ValidationError(
            f"image {img.height}x{img.width} yields no {patch_size}px patches"
        )
    px = img.pixels[: rows * patch_size, : cols * patch_size]
    field_full = _mscn_field(px)
    field_half = _mscn_field(_half_scale(px))
    half = patch_size // 2
    features = np.empty((rows * cols, N_FEATURES))
    sharpness = np.empty(rows * cols)
    k = 0
    for r in range(rows):
        for c in range(cols):
            f1 = field_full[r * patch_size : (r + 1) * patch_size, c * patch_size : (c + 1) * patch_size]
            f2 = field_half[r * half : (r + 1) * half, c * half : (c + 1) * half]
            features[k, :18] = _patch_features(f1)
            features[k, 18:] = _patch_features(f2)
            sharpness[k] = average_gradient_magnitude(
                GrayImage(px[r * patch_size : (r + 1) * patch_size, c * patch_size : (c + 1) * patch_size])
            )
            k += 1
    return features, sharpness


def fit_pristine_model(
    images: list[GrayImage],
    patch_size: int = 96,
    sharpness_fraction: float = 0.75,
) -> NiqeModel:
    """Fit the pristine multivariate Gaussian from clean, sharp images.

    Per image only the sharpest ``sharpness_fraction`` of patches (ranked by
    patch AGM) contribute. Needs at least 10 images, each contributing at
    least 10 sharp patches.
    """
    if len(images) < 10:
        raise ValidationError(f"pristine fit needs at least 10 images, got {len(images)}")
    selected = []
    for img in images:
        features, sharpness = _image_patch_features(img, patch_size)
        keep = max(1, int(math.floor(sharpness_fraction * len(features) + 1e-9)))
        if keep < 10:
            raise ValidationError(
                f"image yields only {keep} sharp patches (need >= 10); use larger images"
            )
        order = np.argsort(-sharpness, kind="stable")[:keep]
        selected.append(features[np.sort(order)])
    stacked = np.vstack(selected)
    mean = stacked.mean(axis=0)
    cov = np.cov(stacked, rowvar=False)
    cov = (cov + cov.T) / 2.0
    return NiqeModel(
        mean=mean,
        covariance=cov,
        patch_size=patch_size,
        sharpness_fraction=sharpness_fraction,
    )


def niqe_score(img: GrayImage, model: NiqeModel) -> float:
    """Distance between the image's patch-feature Gaussian and the model.

    sqrt of the quadratic form under the pooled covariance; the pooled matrix
    is inverted by pseudo-inverse so rank-deficient covariances (few patches,
    small corpora) stay usable. Nonnegative; lower means better quality.
    """
    features, _ = _image_patch_features(img, model.patch_size)
    sample_mean = features.mean(axis=0)
    if len(features) > 1:
        sample_cov = np.cov(features, rowvar=False)
    else:
        sample_cov = np.zeros((N_FEATURES, N_FEATURES))
    pooled = (model.covariance + sample_cov) / 2.0
    diff = model.mean - sample_mean
    quad = float(diff @ np.linalg.pinv(pooled) @ diff)
    return math.sqrt(max(quad, 0.0))


def quality_score(img: GrayImage, model: NiqeModel) -> float:
    """Negated raw score, so higher means better quality."""
    return -niqe_score(img, model)
