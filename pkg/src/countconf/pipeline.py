"""Per-image factor scoring: the bridge from files to factor vectors.

For each manifest record this loads the image (recoloring the stirring
tool first when a mask is present), computes the two counting factors
from its detections, the sharpness/quality/complexity metrics from the
grayscale image, and the distribution-uniformity score from segmentation
centroids clustered with a detection-derived radius.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .clustering import ClusterConfig, UniformityResult, assess_uniformity
from .data import Detection, FactorVector, ImageRecord
from .errors import ValidationError
from .evaluation import counting_factors
from .imageops import average_gradient_magnitude, edge_density, histogram_entropy, to_gray
from .niqe import NiqeModel, quality_score
from .scene import SegmentationConfig, extract_centroids, recolor_tool


@dataclass(frozen=True)
class ImageScores:
    """One scored image: the six factors plus debugging extras."""

    image_id: str
    factors: FactorVector
    edge_density: float
    n_clusters: int
    noise_count: int
    flags: tuple[str, ...]


def load_rgb(path: str | Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("RGB"))
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise OSError(f"cannot read image {path}: {exc}") from exc


def load_mask(path: str | Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("L")) > 0
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise OSError(f"cannot read mask {path}: {exc}") from exc


def score_image(
    rgb: np.ndarray,
    detections: list[Detection],
    model: NiqeModel,
    seg_cfg: SegmentationConfig = SegmentationConfig(),
    cluster_cfg: ClusterConfig = ClusterConfig(),
    edge_threshold: float = 0.1,
    tool_mask: np.ndarray | None = None,
    image_id: str = "",
) -> ImageScores:
    """All six factor scores for one in-memory image."""
    if tool_mask is not None:
        rgb = recolor_tool(rgb, tool_mask)
    gray = to_gray(rgb)
    agm = average_gradient_magnitude(gray)
    ic = histogram_entropy(gray)
    ed = edge_density(gray, edge_threshold)
    iq = quality_score(gray, model)

    cf = counting_factors(detections)
    centroids = extract_centroids(rgb, seg_cfg)
    uniformity: UniformityResult = assess_uniformity(centroids, detections, cluster_cfg)

    flags: list[str] = []
    if cf.empty:
        flags.append("no_detections")
    for f in uniformity.flags:
        if f not in flags:
            flags.append(f)
    summary = uniformity.summary
    return ImageScores(
        image_id=image_id,
        factors=FactorVector(
            mdcbb=cf.mdcbb,
            pn=float(cf.pn),
            agm=agm,
            iq=iq,
            ic=ic,
            pdu=uniformity.score,
        ),
        edge_density=ed,
        n_clusters=summary.n_clusters if summary is not None else 0,
        noise_count=summary.noise_count if summary is not None else 0,
        flags=tuple(flags),
    )


def score_record(
    record: ImageRecord,
    model: NiqeModel,
    seg_cfg: SegmentationConfig = SegmentationConfig(),
    cluster_cfg: ClusterConfig = ClusterConfig(),
    edge_threshold: float = 0.1,
    base_dir: str | Path | None = None,
) -> ImageScores:
    """Score one manifest record, resolving paths against base_dir."""
    base = Path(base_dir) if base_dir is not None else Path(".")
    img_path = record.image_path if record.image_path.is_absolute() else base / record.image_path
    rgb = load_rgb(img_path)
    mask = None
    if record.tool_mask_path is not None:
        mask_path = (
            record.tool_mask_path
            if record.tool_mask_path.is_absolute()
            else base / record.tool_mask_path
        )
        mask = load_mask(mask_path)
        if mask.shape != rgb.shape[:2]:
            raise ValidationError(
                f"tool mask {mask_path} shape {mask.shape} does not match image"
                f" {img_path} shape {rgb.shape[:2]}"
            )
    return score_image(
        rgb,
        list(record.detections),
        model,
        seg_cfg,
        cluster_cfg,
        edge_threshold,
        tool_mask=mask,
        image_id=record.image_id,
    )


def score_corpus(
    records: list[ImageRecord],
    model: NiqeModel,
    seg_cfg: SegmentationConfig = SegmentationConfig(),
    cluster_cfg: ClusterConfig = ClusterConfig(),
    edge_threshold: float = 0.1,
    base_dir: str | Path | None = None,
    threads: int = 1,
) -> list[ImageScores]:
    """Score every record; output order always follows the manifest."""
    if threads < 1:
        raise ValidationError(f"thread count must be >= 1, got {threads}")

    def work(rec: ImageRecord) -> ImageScores:
        return score_record(rec, model, seg_cfg, cluster_cfg, edge_threshold, base_dir)

    if threads == 1 or len(records) <= 1:
        return [work(r) for r in records]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, records))
