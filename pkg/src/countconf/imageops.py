"""Grayscale conversion and the raw image metrics.

Average gradient magnitude (AGM) is the sharpness proxy for stirring blur,
histogram entropy the selected image-complexity measure, and edge density
the alternative complexity measure used by the sensitivity harness.

Gradients use 3x3 Sobel kernels evaluated on interior pixels only (no
padding), and magnitudes are divided by 255*4*sqrt(2), the largest response
an 8-bit image can produce, so every metric lands in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ValidationError

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T

# Largest possible 3x3 Sobel magnitude on values in [0, 255].
GRADIENT_NORMALIZER = 255.0 * 4.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class GrayImage:
    """Row-major luminance field with values in [0, 255]."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise ValidationError("gray image must be a nonempty 2-d array")
        if not np.all(np.isfinite(px)):
            raise ValidationError("gray image contains non-finite values")
        if px.min() < 0.0 or px.max() > 255.0:
            raise ValidationError("gray image values must lie in [0, 255]")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def to_gray(rgb: np.ndarray) -> GrayImage:
    """Convert an 8-bit RGB image to luminance 0.299 R + 0.587 G + 0.114 B."""
    arr = np.asarray(rgb)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValidationError(f"expected a nonempty (h, w, 3) image, got shape {arr.shape}")
    arr = arr.astype(np.float64)
    lum = 0.299 * arr[:, :, 0] + 0.587 * arr[:, :, 1] + 0.114 * arr[:, :, 2]
    return GrayImage(np.clip(lum, 0.0, 255.0))


def sobel_magnitude(img: GrayImage) -> np.ndarray:
    """Normalized Sobel gradient magnitude on interior pixels, shape (h-2, w-2)."""
    if img.height < 3 or img.width < 3:
        raise ValidationError(
            f"image must be at least 3x3 for Sobel gradients, got {img.height}x{img.width}"
        )
    gx = ndimage.correlate(img.pixels, SOBEL_X, mode="constant")[1:-1, 1:-1]
    gy = ndimage.correlate(img.pixels, SOBEL_Y, mode="constant")[1:-1, 1:-1]
    return np.hypot(gx, gy) / GRADIENT_NORMALIZER


def average_gradient_magnitude(img: GrayImage) -> float:
    """Mean normalized Sobel magnitude over interior pixels, in [0, 1]."""
    return float(sobel_magnitude(img).mean())


def histogram_entropy(img: GrayImage) -> float:
    """Shannon entropy (bits) of the 256-bin luminance histogram, divided by 8."""
    counts, _ = np.histogram(img.pixels, bins=256, range=(0.0, 256.0))
    p = counts[counts > 0] / img.pixels.size
    return float(-(p * np.log2(p)).sum() / 8.0)


def edge_density(img: GrayImage, threshold: float = 0.1) -> float:
    """Fraction of interior pixels whose normalized Sobel magnitude exceeds threshold."""
    if not (0.0 < threshold <= 1.0):
        raise ValidationError(f"edge threshold must lie in (0, 1], got {threshold}")
    mag = sobel_magnitude(img)
    return float((mag > threshold).mean())
