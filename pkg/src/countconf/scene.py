"""Classical image-processing chain from trap image to object centroids.

Steps: optional stirring-tool recolor from an externally supplied mask,
HSV color segmentation against the yellow trap background, morphological
open-then-close, connected components, area filtering, background-corner
filtering, and per-component centroids.

A pixel counts as trap background when its hue falls inside the configured
yellow band and its saturation is at least ``trap_sat_min``; everything
else is foreground. Corner filtering drops components whose centroid lies
inside a square of side ``corner_margin_fraction * min(width, height)`` at
any image corner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ValidationError


@dataclass(frozen=True)
class Centroid:
    """Area-weighted component center in pixel coordinates."""

    x: float
    y: float
    area: float

    def __post_init__(self) -> None:
        if self.area <= 0:
            raise ValidationError(f"centroid area must be > 0, got {self.area}")


@dataclass(frozen=True)
class SegmentationConfig:
    trap_hue_lo: float = 40.0
    trap_hue_hi: float = 70.0
    trap_sat_min: float = 0.25
    min_blob_area: float = 15.0
    max_blob_area: float = 2500.0
    morph_radius: int = 2
    corner_margin_fraction: float = 0.08

    def __post_init__(self) -> None:
        if not (0.0 <= self.trap_hue_lo < self.trap_hue_hi <= 360.0):
            raise ValidationError("trap hue range must satisfy 0 <= lo < hi <= 360")
        if not (0.0 <= self.trap_sat_min <= 1.0):
            raise ValidationError("trap_sat_min must lie in [0, 1]")
        if not (0.0 < self.min_blob_area < self.max_blob_area):
            raise ValidationError("blob areas must satisfy 0 < min < max")
        if self.morph_radius < 0:
            raise ValidationError("morph_radius must be >= 0")
        if not (0.0 <= self.corner_margin_fraction < 0.5):
            raise ValidationError("corner_margin_fraction must lie in [0, 0.5)")


def _check_rgb(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValidationError(f"expected a nonempty (h, w, 3) image, got shape {arr.shape}")
    return arr


def rgb_to_hue_sat(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized hue (degrees in [0, 360)) and saturation in [0, 1]."""
    arr = _check_rgb(img).astype(np.float64) / 255.0
    r, g, b = arr[:, :, 0], arr[:, :, 1], arr[:, :, 2]
    cmax = arr.max(axis=2)
    cmin = arr.min(axis=2)
    delta = cmax - cmin
    hue = np.zeros_like(cmax)
    nz = delta > 0
    rmax = nz & (cmax == r)
    gmax = nz & ~rmax & (cmax == g)
    bmax = nz & ~rmax & ~gmax
    hue[rmax] = np.mod((g[rmax] - b[rmax]) / delta[rmax], 6.0)
    hue[gmax] = (b[gmax] - r[gmax]) / delta[gmax] + 2.0
    hue[bmax] = (r[bmax] - g[bmax]) / delta[bmax] + 4.0
    hue *= 60.0
    sat = np.where(cmax > 0, delta / np.maximum(cmax, 1e-12), 0.0)
    return hue, sat


def recolor_tool(img: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Replace masked (tool) pixels with the median color of the background.

    The mask is boolean or any nonzero-means-tool array of the image's
    height and width. Pixels outside the mask are returned unchanged.
    """
    arr = _check_rgb(img)
    m = np.asarray(mask)
    if m.shape != arr.shape[:2]:
        raise ValidationError(
            f"mask shape {m.shape} does not match image shape {arr.shape[:2]}"
        )
    m = m != 0
    if not m.any():
        return arr.copy()
    if m.all():
        raise ValidationError("tool mask covers the entire image; no background to sample")
    fill = np.median(arr[~m].reshape(-1, 3), axis=0)
    out = arr.copy()
    out[m] = np.round(fill).astype(arr.dtype)
    return out


def _disk(radius: int) -> np.ndarray:
    if radius <= 0:
        return np.ones((1, 1), dtype=bool)
    r = np.arange(-radius, radius + 1)
    return (r[:, None] ** 2 + r[None, :] ** 2) <= radius**2


def foreground_mask(img: np.ndarray, cfg: SegmentationConfig) -> np.ndarray:
    """Binary mask of non-background pixels after morphological cleanup."""
    hue, sat = rgb_to_hue_sat(img)
    background = (hue >= cfg.trap_hue_lo) & (hue <= cfg.trap_hue_hi) & (sat >= cfg.trap_sat_min)
    mask = ~background
    if cfg.morph_radius > 0 and mask.any():
        disk = _disk(cfg.morph_radius)
        mask = ndimage.binary_opening(mask, structure=disk)
        mask = ndimage.binary_closing(mask, structure=disk)
    return mask


@dataclass(frozen=True)
class Component:
    """A labeled foreground component, kept for the stub detector."""

    centroid: Centroid
    x: int
    y: int
    w: int
    h: int


def extract_components(img: np.ndarray, cfg: SegmentationConfig) -> list[Component]:
    mask = foreground_mask(img, cfg)
    labeled, n = ndimage.label(mask)
    if n == 0:
        return []
    height, width = mask.shape
    margin = cfg.corner_margin_fraction * min(width, height)
    components: list[Component] = []
    slices = ndimage.find_objects(labeled)
    for idx, sl in enumerate(slices, start=1):
        region = labeled[sl] == idx
        area = float(region.sum())
        if area < cfg.min_blob_area or area > cfg.max_blob_area:
            continue
        ys, xs = np.nonzero(region)
        cy = float(ys.mean()) + sl[0].start
        cx = float(xs.mean()) + sl[1].start
        near_x = cx < margin or cx > width - 1 - margin
        near_y = cy < margin or cy > height - 1 - margin
        if near_x and near_y:
            continue
        components.append(
            Component(
                centroid=Centroid(x=cx, y=cy, area=area),
                x=int(sl[1].start + xs.min()),
                y=int(sl[0].start + ys.min()),
                w=int(xs.max() - xs.min() + 1),
                h=int(ys.max() - ys.min() + 1),
            )
        )
    return components


def extract_centroids(img: np.ndarray, cfg: SegmentationConfig) -> list[Centroid]:
    """Centroids of all plausible objects on the trap; empty list is valid."""
    return [c.centroid for c in extract_components(img, cfg)]
