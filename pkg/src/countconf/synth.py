"""Deterministic synthetic trap-scene generator and stub detector.

Scenes are yellow sticky-trap images: a textured background inside the
trap hue band, dark elliptical pests placed by a tightness-controlled
cluster process, optional brown soil speckles and gray distractors, then
Gaussian blur and additive luminance noise modeling the stirring phase.
Ground-truth boxes are the exact rendered pest extents before blur and
noise. Everything is driven by one seeded generator per scene, so a spec
reproduces its image bit for bit.

The stub detector reuses the segmentation chain, scores each blob with a
compactness-times-contrast heuristic, and applies a seeded controllable
degradation (drops, corner jitter, spurious boxes) so detection quality
can be dialed against scene difficulty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .data import (
    BoundingBox,
    ConditionMetadata,
    DensityClass,
    Detection,
    GroundTruthBox,
    ImageRecord,
    Phase,
    StirSpeed,
    TIndex,
    save_detections,
    save_ground_truth,
    save_manifest,
)
from .errors import ValidationError
from .scene import SegmentationConfig, extract_components, recolor_tool

# Base palette. Pest/soil/stick pixels get a shared per-object value jitter
# (same offset on all three channels) so their hue never drifts into the
# trap band and segmentation stays decidable by construction.
TRAP_RGB = (214.0, 196.0, 55.0)
PEST_RGB = (46.0, 32.0, 22.0)
SOIL_RGB = (150.0, 112.0, 58.0)
DISTRACTOR_GRAY = 125.0
STICK_RGB = (121.0, 85.0, 48.0)

PLACEMENT_RETRY_FACTOR = 200


def _split_gap(r_mean: float) -> float:
    """Edge gap below which two painted pests fuse into one blob.

    Calibrated against the segmentation chain (open+close, disk radius 2):
    small rounded bodies split at ~1.5 px of clearance, larger flat-sided
    ones need ~4.5 px before the closing step stops bridging them.
    """
    return min(4.5, max(1.5, 1.8 * (r_mean - 2.1)))


def _split_distance(r1: float, r2: float) -> float:
    """Center distance at which two pests reliably segment separately."""
    return r1 + r2 + _split_gap(0.5 * (r1 + r2))


@dataclass(frozen=True)
class SceneSpec:
    """Full recipe for one synthetic trap image."""

    seed: int
    condition: ConditionMetadata
    width: int = 288
    height: int = 288
    pest_count: int = 0
    pest_radius_range: tuple[float, float] = (3.0, 6.0)
    cluster_tightness: float = 0.0
    blur_sigma: float = 0.0
    noise_sigma: float = 0.0
    soil_speckle_density: float = 0.0
    distractor_count: int = 0

    def __post_init__(self) -> None:
        lo, hi = self.pest_radius_range
        if self.width < 32 or self.height < 32:
            raise ValidationError("scene must be at least 32x32 pixels")
        if self.pest_count < 0 or self.distractor_count < 0:
            raise ValidationError("pest_count and distractor_count must be >= 0")
        if not (0 < lo <= hi) or not math.isfinite(hi):
            raise ValidationError(f"invalid pest_radius_range {self.pest_radius_range}")
        for name in ("cluster_tightness", "soil_speckle_density"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1], got {v}")
        for name in ("blur_sigma", "noise_sigma"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValidationError(f"{name} must be finite and >= 0, got {v}")
        if self.pest_count != self.condition.pest_count:
            raise ValidationError(
                f"spec pest_count {self.pest_count} disagrees with"
                f" condition pest_count {self.condition.pest_count}"
            )
        margin = self._margin()
        if self.width - 2 * margin < 4 * hi or self.height - 2 * margin < 4 * hi:
            raise ValidationError("pests do not fit: image too small for radius range")

    def _margin(self) -> float:
        # Keep objects clear of the corner-filter boxes and the image border.
        return math.ceil(0.08 * min(self.width, self.height)) + math.ceil(self.pest_radius_range[1]) + 2.0


def _background(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """Textured trap background; every pixel stays inside the trap hue band."""
    base = np.empty((height, width, 3), dtype=np.float64)
    base[:] = TRAP_RGB
    yy, xx = np.mgrid[0:height, 0:width]
    # Fixed-magnitude illumination tilt with a random direction keeps the
    # luminance spread comparable across scenes.
    phi = rng.uniform(0.0, 2.0 * math.pi)
    ax, ay = 0.06 * math.cos(phi), 0.06 * math.sin(phi)
    gain = 1.0 + ax * (xx / width - 0.5) + ay * (yy / height - 0.5)
    base *= gain[:, :, None]
    # Correlated texture in two bands plus fine grain, all pure value
    # offsets normalized to fixed standard deviations. The broad band
    # carries structure wide enough to survive moderate smoothing, so
    # defocus keeps eroding measurable texture.
    broad = ndimage.gaussian_filter(rng.normal(0.0, 1.0, (height, width)), 6.0)
    broad *= 4.0 / broad.std()
    coarse = ndimage.gaussian_filter(rng.normal(0.0, 1.0, (height, width)), 3.0)
    coarse *= 3.0 / coarse.std()
    fine = rng.normal(0.0, 2.5, (height, width))
    base += (broad + coarse + fine)[:, :, None]
    return base


def _paint_ellipse(
    img: np.ndarray,
    cx: float,
    cy: float,
    a: float,
    b: float,
    theta: float,
    color: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Paint a rotated filled ellipse; returns the painted pixel coordinates."""
    height, width = img.shape[:2]
    r = max(a, b)
    x0, x1 = max(0, int(math.floor(cx - r - 1))), min(width - 1, int(math.ceil(cx + r + 1)))
    y0, y1 = max(0, int(math.floor(cy - r - 1))), min(height - 1, int(math.ceil(cy + r + 1)))
    yy, xx = np.mgrid[y0 : y1 + 1, x0 : x1 + 1]
    dx = xx - cx
    dy = yy - cy
    u = (dx * math.cos(theta) + dy * math.sin(theta)) / a
    v = (-dx * math.sin(theta) + dy * math.cos(theta)) / b
    inside = u * u + v * v <= 1.0
    ys, xs = np.nonzero(inside)
    img[ys + y0, xs + x0] = color
    return xs + x0, ys + y0


def _place_points(
    rng: np.random.Generator,
    n: int,
    radii: np.ndarray,
    lo_x: float,
    hi_x: float,
    lo_y: float,
    hi_y: float,
    center: tuple[float, float] | None,
    sigma: float,
    existing: list[tuple[float, float, float]],
) -> list[tuple[float, float]]:
    """Rejection-sample n fully separated points.

    A Gaussian cloud around `center` when given, uniform otherwise. Every
    accepted point clears the blob-split distance against everything already
    placed, so each object segments as its own component. Raises after a
    bounded number of failed attempts.
    """
    placed: list[tuple[float, float]] = []
    occupied = list(existing)
    attempts = 0
    budget = PLACEMENT_RETRY_FACTOR * max(n, 1) + 200
    while len(placed) < n:
        attempts += 1
        if attempts > budget:
            raise ValidationError(
                f"placement infeasible after {budget} attempts"
                f" ({len(placed)}/{n} objects placed)"
            )
        if center is None:
            px = rng.uniform(lo_x, hi_x)
            py = rng.uniform(lo_y, hi_y)
        else:
            px = center[0] + rng.normal(0.0, sigma)
            py = center[1] + rng.normal(0.0, sigma)
            if not (lo_x <= px <= hi_x and lo_y <= py <= hi_y):
                continue
        r = radii[len(placed)]
        ok = True
        for qx, qy, qr in occupied:
            if math.hypot(px - qx, py - qy) < _split_distance(r, qr) + 1.2:
                ok = False
                break
        if ok:
            placed.append((px, py))
            occupied.append((px, py, r))
    return placed


def _place_pests(
    rng: np.random.Generator,
    n: int,
    r_lo: float,
    r_hi: float,
    lo_x: float,
    hi_x: float,
    lo_y: float,
    hi_y: float,
    center: tuple[float, float] | None,
    sigma: float,
    tightness: float,
) -> tuple[list[tuple[float, float]], list[float]]:
    """Clumping placement model; returns matched (centers, radii) lists.

    Three per-pest behaviors, with attachment probability growing in
    cluster_tightness:

    * overlap: lands on a previously placed pest at deep overlap, fusing
      into a larger blob (drives undercounting and enlarges detection
      boxes, which raises the adaptive clustering radius);
    * satellite: a small pest that settles just beyond the blob-split
      distance of a small neighbor, so the pair segments separately at
      near-touch spacing (the measurable signature of a clump);
    * free: scattered over the cloud with fully disjoint spacing.

    Satellites and their anchors are protected from later overlap landings
    so the near-touch geometry survives to the rendered image.
    """
    centers: list[tuple[float, float]] = []
    radii: list[float] = []
    protected: set[int] = set()
    chained: set[int] = set()
    attempts = 0
    budget = PLACEMENT_RETRY_FACTOR * max(n, 1) + 200

    def _bounded(px: float, py: float) -> bool:
        return lo_x <= px <= hi_x and lo_y <= py <= hi_y

    while len(centers) < n:
        mode = "free"
        if centers and tightness > 0.0:
            draw = rng.uniform()
            if draw < 0.68 * tightness:
                mode = "overlap"
            elif draw < 0.86 * tightness:
                mode = "satellite"

        # Satellites stay in the small band so their near-touch pairs sit
        # inside the adaptive clustering radius; everything else draws from
        # the upper band, which keeps the mean detection box above that
        # pair distance.
        span = r_hi - r_lo
        if mode == "satellite":
            r = rng.uniform(r_lo, r_lo + 0.2 * span)
        else:
            r = rng.uniform(r_lo + 0.25 * span, r_hi)

        placed_new: tuple[float, float] | None = None
        if mode == "free":
            while placed_new is None:
                attempts += 1
                if attempts > budget:
                    raise ValidationError(
                        f"placement infeasible after {budget} attempts"
                        f" ({len(centers)}/{n} pests placed)"
                    )
                if center is None:
                    px = rng.uniform(lo_x, hi_x)
                    py = rng.uniform(lo_y, hi_y)
                else:
                    px = center[0] + rng.normal(0.0, sigma)
                    py = center[1] + rng.normal(0.0, sigma)
                    if not _bounded(px, py):
                        continue
                if all(
                    math.hypot(px - qx, py - qy) >= _split_distance(r, qr) + 1.2
                    for (qx, qy), qr in zip(centers, radii)
                ):
                    placed_new = (px, py)
        elif mode == "satellite":
            # Anchor on a pest that still segments alone, preferring small
            # ones: the near-touch pair only reads as a clump if both ends
            # stay distinct blobs.
            pool = [i for i in range(len(centers)) if i not in chained] or list(
                range(len(centers))
            )
            for _ in range(60):
                attempts += 1
                cand = rng.integers(0, len(pool), size=min(5, len(pool)))
                anchor = pool[int(min(cand, key=lambda i: radii[pool[i]]))]
                ax, ay = centers[anchor]
                ar = radii[anchor]
                d = _split_distance(r, ar) + rng.uniform(0.15, 0.9)
                phi = rng.uniform(0.0, 2.0 * math.pi)
                px, py = ax + d * math.cos(phi), ay + d * math.sin(phi)
                if not _bounded(px, py):
                    continue
                clear = all(
                    math.hypot(px - qx, py - qy) >= _split_distance(r, radii[i]) + 0.2
                    for i, (qx, qy) in enumerate(centers)
                )
                if clear:
                    placed_new = (px, py)
                    protected.add(anchor)
                    protected.add(len(centers))
                    break
            if placed_new is None:
                mode = "overlap"
        if mode == "overlap" and placed_new is None:
            open_idx = [i for i in range(len(centers)) if i not in protected] or list(
                range(len(centers))
            )
            tries = 0
            while placed_new is None:
                attempts += 1
                tries += 1
                if attempts > budget:
                    raise ValidationError(
                        f"placement infeasible after {budget} attempts"
                        f" ({len(centers)}/{n} pests placed)"
                    )
                anchor = open_idx[int(rng.integers(0, len(open_idx)))]
                ax, ay = centers[anchor]
                ar = radii[anchor]
                d = rng.uniform(0.85, 1.12) * (r + ar)
                phi = rng.uniform(0.0, 2.0 * math.pi)
                px, py = ax + d * math.cos(phi), ay + d * math.sin(phi)
                if not _bounded(px, py):
                    continue
                if tries <= 40 and any(
                    math.hypot(px - centers[j][0], py - centers[j][1])
                    < _split_distance(r, radii[j])
                    for j in protected
                    if j != anchor
                ):
                    continue
                placed_new = (px, py)
                chained.add(anchor)
                chained.add(len(centers))

        centers.append(placed_new)
        radii.append(r)
    return centers, radii


def generate(spec: SceneSpec) -> tuple[np.ndarray, list[GroundTruthBox], ConditionMetadata]:
    """Render one scene; returns (uint8 RGB image, GT boxes, condition)."""
    rng = np.random.default_rng(spec.seed)
    width, height = spec.width, spec.height
    img = _background(rng, width, height)

    margin = spec._margin()
    lo_x, hi_x = margin, width - 1 - margin
    lo_y, hi_y = margin, height - 1 - margin
    r_lo, r_hi = spec.pest_radius_range

    center = (rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y))
    tightness = spec.cluster_tightness
    n_free = max(1, round(spec.pest_count * (1.0 - 0.86 * tightness))) + spec.distractor_count
    sigma_floor = (_split_distance(r_hi, r_hi) + 1.2) * math.sqrt(n_free / 4.0)
    sigma = max(
        min(width, height) * (0.5 * (1.0 - tightness) + 0.03 * tightness),
        sigma_floor,
    )
    # Tightness 0 degenerates to a uniform scatter over the safe box.
    pest_centers, pest_radii = _place_pests(
        rng,
        spec.pest_count,
        r_lo,
        r_hi,
        lo_x,
        hi_x,
        lo_y,
        hi_y,
        None if tightness == 0.0 else center,
        sigma,
        tightness,
    )

    gts: list[GroundTruthBox] = []
    pest_color = np.asarray(PEST_RGB)
    for (px, py), r in zip(pest_centers, pest_radii):
        aspect = rng.uniform(0.55, 0.9)
        theta = rng.uniform(0.0, math.pi)
        jitter = rng.uniform(-16.0, 16.0)
        # Semi-minor floor of 2.2 px keeps every body wide enough to survive
        # the segmentation chain's morphological opening (disk radius 2).
        xs, ys = _paint_ellipse(
            img, px, py, r, max(2.2, r * aspect), theta, np.clip(pest_color + jitter, 0, 255)
        )
        gts.append(
            GroundTruthBox(
                box=BoundingBox(
                    x=float(xs.min()),
                    y=float(ys.min()),
                    w=float(xs.max() - xs.min() + 1),
                    h=float(ys.max() - ys.min() + 1),
                )
            )
        )

    taken = [(px, py, r) for (px, py), r in zip(pest_centers, pest_radii)]
    if spec.distractor_count:
        d_radii = rng.uniform(2.5, 4.5, size=spec.distractor_count)
        d_centers = _place_points(
            rng,
            spec.distractor_count,
            d_radii,
            lo_x,
            hi_x,
            lo_y,
            hi_y,
            None,
            sigma,
            taken,
        )
        for (px, py), r in zip(d_centers, d_radii):
            jitter = rng.uniform(-15.0, 15.0)
            _paint_ellipse(
                img, px, py, r, r, 0.0, np.full(3, np.clip(DISTRACTOR_GRAY + jitter, 0, 255))
            )
            taken.append((px, py, r))

    # Speckle radii stay at or below 2.2 px so the opening step of the
    # segmentation chain erases them; soil changes texture, not components.
    n_speckles = int(round(spec.soil_speckle_density * width * height / 220.0))
    soil_color = np.asarray(SOIL_RGB)
    for _ in range(n_speckles):
        sx = rng.uniform(1.0, width - 2.0)
        sy = rng.uniform(1.0, height - 2.0)
        sr = rng.uniform(1.0, 2.2)
        jitter = rng.uniform(-14.0, 14.0)
        if any(math.hypot(sx - qx, sy - qy) < qr + sr + 1.0 for qx, qy, qr in taken):
            continue
        _paint_ellipse(img, sx, sy, sr, sr, 0.0, np.clip(soil_color + jitter, 0, 255))

    if spec.blur_sigma > 0:
        for c in range(3):
            img[:, :, c] = ndimage.gaussian_filter(img[:, :, c], spec.blur_sigma, mode="nearest")
    if spec.noise_sigma > 0:
        img += (spec.noise_sigma * rng.standard_normal((height, width)))[:, :, None]

    out = np.rint(np.clip(img, 0.0, 255.0)).astype(np.uint8)
    return out, gts, spec.condition


def add_stick(
    img: np.ndarray, seed: int, half_width: float = 3.5
) -> tuple[np.ndarray, np.ndarray]:
    """Paint a static stirring-stick bar; returns (image copy, boolean mask)."""
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValidationError("add_stick expects an RGB image")
    rng = np.random.default_rng(seed)
    height, width = img.shape[:2]
    theta = rng.uniform(math.radians(20), math.radians(70))
    cx = width * rng.uniform(0.35, 0.65)
    cy = height * rng.uniform(0.35, 0.65)
    length = 0.75 * math.hypot(width, height)
    yy, xx = np.mgrid[0:height, 0:width]
    dx = xx - cx
    dy = yy - cy
    along = dx * math.cos(theta) + dy * math.sin(theta)
    across = -dx * math.sin(theta) + dy * math.cos(theta)
    mask = (np.abs(across) <= half_width) & (np.abs(along) <= length / 2)
    out = img.astype(np.float64, copy=True)
    jitter = rng.uniform(-8.0, 8.0)
    out[mask] = np.clip(np.asarray(STICK_RGB) + jitter, 0, 255)
    return np.rint(out).astype(np.uint8), mask


@dataclass(frozen=True)
class DegradeSpec:
    """Seeded detection degradation: drops, corner jitter, spurious boxes.

    spurious_rate is the expected number of injected boxes per image
    (Poisson distributed).
    """

    drop_rate: float = 0.0
    jitter_px: float = 0.0
    spurious_rate: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 <= self.drop_rate <= 1.0):
            raise ValidationError(f"drop_rate must lie in [0, 1], got {self.drop_rate}")
        if self.jitter_px < 0 or self.spurious_rate < 0:
            raise ValidationError("jitter_px and spurious_rate must be >= 0")


def _luminance(img: np.ndarray) -> np.ndarray:
    f = img.astype(np.float64)
    return 0.299 * f[:, :, 0] + 0.587 * f[:, :, 1] + 0.114 * f[:, :, 2]


def stub_detect(
    img: np.ndarray,
    cfg: SegmentationConfig = SegmentationConfig(),
    degrade: DegradeSpec | None = None,
) -> list[Detection]:
    """Color-blob detector over the segmentation chain.

    Confidence is compactness (component area over box area) times
    luminance contrast against the image median, scaled by 1.8 and clamped
    to [0.05, 0.99].
    """
    lum = _luminance(img)
    bg_level = float(np.median(lum))
    detections: list[Detection] = []
    for comp in extract_components(img, cfg):
        patch = lum[comp.y : comp.y + comp.h, comp.x : comp.x + comp.w]
        contrast = abs(float(patch.mean()) - bg_level) / 255.0
        fill = comp.centroid.area / float(comp.w * comp.h)
        conf = min(0.99, max(0.05, fill * contrast * 1.8))
        detections.append(
            Detection(
                box=BoundingBox(x=float(comp.x), y=float(comp.y), w=float(comp.w), h=float(comp.h)),
                confidence=conf,
            )
        )
    if degrade is None:
        return detections

    rng = np.random.default_rng(degrade.seed)
    kept = [d for d in detections if rng.random() >= degrade.drop_rate]
    if degrade.jitter_px > 0:
        jittered = []
        for d in kept:
            j = rng.uniform(-degrade.jitter_px, degrade.jitter_px, size=4)
            x1 = d.box.x + j[0]
            y1 = d.box.y + j[1]
            x2 = d.box.x + d.box.w + j[2]
            y2 = d.box.y + d.box.h + j[3]
            jittered.append(
                replace(
                    d,
                    box=BoundingBox(
                        x=x1, y=y1, w=max(1.0, x2 - x1), h=max(1.0, y2 - y1)
                    ),
                )
            )
        kept = jittered
    height, width = img.shape[:2]
    for _ in range(int(rng.poisson(degrade.spurious_rate))):
        w = rng.uniform(6.0, 16.0)
        h = rng.uniform(6.0, 16.0)
        x = rng.uniform(0.0, max(1.0, width - w))
        y = rng.uniform(0.0, max(1.0, height - h))
        conf = rng.uniform(0.05, 0.6)
        kept.append(Detection(box=BoundingBox(x=x, y=y, w=w, h=h), confidence=float(conf)))
    return kept


def degrade_for(spec: SceneSpec) -> DegradeSpec:
    """Condition-dependent degradation: harder scenes detect worse."""
    stirring = spec.condition.phase is Phase.STIRRING
    drop = 0.03 + 0.045 * spec.blur_sigma + 0.004 * spec.noise_sigma
    drop += 0.04 * spec.soil_speckle_density + (0.04 if stirring else 0.0)
    jitter = 0.3 + 0.35 * spec.blur_sigma + 0.02 * spec.noise_sigma
    spurious = 0.3 + 0.05 * spec.noise_sigma + 1.2 * spec.soil_speckle_density
    return DegradeSpec(
        drop_rate=min(0.6, drop),
        jitter_px=jitter,
        spurious_rate=spurious,
        seed=spec.seed + 104729,
    )


@dataclass(frozen=True)
class CorpusResult:
    records: tuple[ImageRecord, ...]
    manifest_path: Path
    detections_path: Path
    ground_truth_path: Path


def generate_corpus(
    plan: list[SceneSpec],
    out_dir: str | Path,
    seg_cfg: SegmentationConfig = SegmentationConfig(),
    stick_on_stirring: bool = True,
    degrade: bool = True,
) -> CorpusResult:
    """Render a plan to disk: PNGs, manifest CSV, GT and detection JSON.

    Stirring-phase frames optionally get a painted stick plus its mask
    file; stub detections are computed on the recolored image so the stick
    itself is never a detection.
    """
    if not plan:
        raise ValidationError("corpus plan is empty")
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)

    records: list[ImageRecord] = []
    det_map: dict[str, tuple[Detection, ...]] = {}
    gt_map: dict[str, tuple[GroundTruthBox, ...]] = {}
    for i, spec in enumerate(plan):
        name = f"{i:04d}_{spec.condition.group_id}"
        rel_img = Path("images") / f"{name}.png"
        img, gts, condition = generate(spec)
        mask_path = None
        detect_img = img
        if stick_on_stirring and condition.phase is Phase.STIRRING:
            img, mask = add_stick(img, seed=spec.seed + 7919)
            rel_mask = Path("masks") / f"{name}.png"
            Image.fromarray((mask * np.uint8(255))).save(out / rel_mask)
            mask_path = rel_mask
            detect_img = recolor_tool(img, mask)
        Image.fromarray(img).save(out / rel_img)
        dets = stub_detect(detect_img, seg_cfg, degrade_for(spec) if degrade else None)
        key = rel_img.as_posix()
        det_map[key] = tuple(dets)
        gt_map[key] = tuple(gts)
        records.append(
            ImageRecord(
                image_path=rel_img,
                metadata=condition,
                detections=tuple(dets),
                ground_truth=tuple(gts),
                tool_mask_path=mask_path,
            )
        )

    manifest_path = out / "manifest.csv"
    detections_path = out / "detections.json"
    ground_truth_path = out / "ground_truth.json"
    save_manifest(records, manifest_path)
    save_detections(det_map, detections_path)
    save_ground_truth(gt_map, ground_truth_path)
    return CorpusResult(
        records=tuple(records),
        manifest_path=manifest_path,
        detections_path=detections_path,
        ground_truth_path=ground_truth_path,
    )


_SPEED_BLUR = {StirSpeed.LOW: 1.2, StirSpeed.MEDIUM: 2.2, StirSpeed.HIGH: 3.4}
_SPEED_NOISE = {StirSpeed.LOW: 8.0, StirSpeed.MEDIUM: 12.0, StirSpeed.HIGH: 16.0}

# (frame offset seconds, phase, timeline marker, blur factor, noise factor)
_FRAME_SCHEDULE = (
    (0, Phase.STATIC, TIndex.T0, 0.0, 0.0),
    (2, Phase.STATIC, TIndex.T0, 0.0, 0.0),
    (4, Phase.STIRRING, TIndex.T1, 1.0, 1.0),
    (6, Phase.STIRRING, TIndex.T1, 1.0, 1.0),
    (8, Phase.STIRRING, TIndex.T2, 1.0, 1.0),
    (10, Phase.POST_STIR, TIndex.T3, 0.5, 1.0 / 3.0),
    (12, Phase.POST_STIR, TIndex.T4, 0.25, 1.0 / 6.0),
    (14, Phase.POST_STIR, TIndex.T4, 0.25, 1.0 / 6.0),
)


def _group_frames(
    group_id: str,
    base_seed: int,
    pest_count: int,
    speed: StirSpeed,
    soil: float,
    tightness: float,
    distractors: int,
) -> list[SceneSpec]:
    density = DensityClass.LOW if pest_count <= 40 else DensityClass.HIGH
    specs = []
    for frame, (offset, phase, t_index, blur_f, noise_f) in enumerate(_FRAME_SCHEDULE):
        condition = ConditionMetadata(
            group_id=group_id,
            phase=phase,
            stir_speed=StirSpeed.NONE if phase is Phase.STATIC else speed,
            soil=soil > 0,
            density_class=density,
            pest_count=pest_count,
            t_index=t_index,
            frame_offset_s=float(offset),
        )
        specs.append(
            SceneSpec(
                seed=base_seed + frame,
                condition=condition,
                pest_count=pest_count,
                cluster_tightness=tightness,
                blur_sigma=blur_f * _SPEED_BLUR[speed],
                noise_sigma=noise_f * _SPEED_NOISE[speed],
                soil_speckle_density=soil,
                distractor_count=distractors,
            )
        )
    return specs


def single_variable_plan(base_seed: int = 7) -> list[SceneSpec]:
    """Canned single-variable-control design: 12 groups of 8 frames.

    Six density levels (10..80 pests) at low speed without soil, three
    stirring speeds at 52 pests on soiled trays, and three soil densities
    at 52 pests and low speed. Each group runs the full static/stirring/
    post-stir frame schedule. The clean density sweep provides the
    controls; the harder-stirred and soiled groups all sit in the high
    density class, so every stressor moves the complexity measures in the
    same direction.
    """
    plan: list[SceneSpec] = []
    g = 0
    for count in (10, 22, 34, 52, 66, 80):
        plan.extend(
            _group_frames(
                f"density{count:02d}", base_seed + 1000 * g, count,
                StirSpeed.LOW, soil=0.0, tightness=0.3, distractors=2,
            )
        )
        g += 1
    for speed in (StirSpeed.LOW, StirSpeed.MEDIUM, StirSpeed.HIGH):
        plan.extend(
            _group_frames(
                f"speed_{speed.value}", base_seed + 1000 * g, 52,
                speed, soil=0.65, tightness=0.3, distractors=2,
            )
        )
        g += 1
    for soil in (0.5, 0.65, 0.8):
        plan.extend(
            _group_frames(
                f"soil{int(soil * 100):02d}", base_seed + 1000 * g, 52,
                StirSpeed.LOW, soil=soil, tightness=0.3, distractors=2,
            )
        )
        g += 1
    return plan


def confidence_plan(n_groups: int = 60, base_seed: int = 40000) -> list[SceneSpec]:
    """Randomized-condition corpus for fitting the confidence model.

    Conditions vary jointly (density, tightness, speed, soil, distractors)
    so factor scores and detection quality both spread; with the default 60
    groups of 7 frames the corpus has 420 images.
    """
    if n_groups < 1:
        raise ValidationError("need at least one group")
    rng = np.random.default_rng(base_seed)
    schedule = _FRAME_SCHEDULE[:7]
    plan: list[SceneSpec] = []
    for g in range(n_groups):
        pest_count = int(rng.integers(8, 61))
        tightness = float(rng.uniform(0.0, 0.9))
        speed = (StirSpeed.LOW, StirSpeed.MEDIUM, StirSpeed.HIGH)[int(rng.integers(0, 3))]
        soil = float(rng.uniform(0.2, 0.8)) if rng.random() < 0.5 else 0.0
        distractors = int(rng.integers(0, 5))
        density = DensityClass.LOW if pest_count <= 40 else DensityClass.HIGH
        for frame, (offset, phase, t_index, blur_f, noise_f) in enumerate(schedule):
            condition = ConditionMetadata(
                group_id=f"mix{g:03d}",
                phase=phase,
                stir_speed=StirSpeed.NONE if phase is Phase.STATIC else speed,
                soil=soil > 0,
                density_class=density,
                pest_count=pest_count,
                t_index=t_index,
                frame_offset_s=float(offset),
            )
            plan.append(
                SceneSpec(
                    seed=base_seed + 1000 * g + frame,
                    condition=condition,
                    pest_count=pest_count,
                    cluster_tightness=tightness,
                    blur_sigma=blur_f * _SPEED_BLUR[speed],
                    noise_sigma=noise_f * _SPEED_NOISE[speed],
                    soil_speckle_density=soil,
                    distractor_count=distractors,
                )
            )
    return plan


def pristine_plan(n_images: int = 30, base_seed: int = 90000) -> list[SceneSpec]:
    """Sharp, clean, unclustered scenes for fitting the pristine IQA model.

    480x480 so every image yields a 5x5 patch grid (18 sharp patches at
    the default selection fraction).
    """
    if n_images < 10:
        raise ValidationError("pristine corpus needs at least 10 images")
    rng = np.random.default_rng(base_seed)
    plan = []
    for i in range(n_images):
        pest_count = int(rng.integers(15, 31))
        condition = ConditionMetadata(
            group_id=f"pristine{i:03d}",
            phase=Phase.STATIC,
            stir_speed=StirSpeed.NONE,
            soil=False,
            density_class=DensityClass.LOW,
            pest_count=pest_count,
            t_index=TIndex.T0,
            frame_offset_s=0.0,
        )
        plan.append(
            SceneSpec(
                seed=base_seed + i,
                condition=condition,
                width=480,
                height=480,
                pest_count=pest_count,
                cluster_tightness=0.0,
            )
        )
    return plan
