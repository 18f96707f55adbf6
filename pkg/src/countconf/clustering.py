"""Adaptive density clustering of object centroids and the distribution score.

The DBSCAN radius is derived from the detections of the same image: the
mean of (w + h) / 2 over all predicted boxes, scaled by a configurable
multiplier and floored. Cluster semantics are the standard ones with
Euclidean distance; neighbor counts include the point itself, and a border
point reachable from several clusters joins the cluster of the lowest-index
core point within range, which makes the partition deterministic.

The distribution score sums count / mean-intra-cluster-distance over all
clusters; noise points contribute nothing, so tighter packing raises the
score. Degenerate inputs (no centroids, no detections, no clusters) score 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .data import Detection
from .errors import ValidationError
from .scene import Centroid


@dataclass(frozen=True)
class ClusterConfig:
    eps_multiplier: float = 1.0
    min_pts: int = 2
    eps_floor: float = 1.0

    def __post_init__(self) -> None:
        if not self.eps_multiplier > 0:
            raise ValidationError("eps_multiplier must be > 0")
        if self.min_pts < 2:
            raise ValidationError("min_pts must be >= 2")
        if not self.eps_floor > 0:
            raise ValidationError("eps_floor must be > 0")


@dataclass(frozen=True)
class ClusterSummary:
    """Per-cluster point counts and mean pairwise distances, plus noise count.

    Counts and distances are index-aligned; distances are floored at the
    clustering config's eps_floor so they are always positive.
    """

    counts: tuple[int, ...]
    mean_distances: tuple[float, ...]
    noise_count: int

    def __post_init__(self) -> None:
        if len(self.counts) != len(self.mean_distances):
            raise ValidationError("counts and mean_distances must be parallel")
        if any(c < 2 for c in self.counts):
            raise ValidationError("every cluster must contain at least 2 points")
        if any(d <= 0 for d in self.mean_distances):
            raise ValidationError("cluster mean distances must be positive")
        if self.noise_count < 0:
            raise ValidationError("noise_count must be >= 0")

    @property
    def n_clusters(self) -> int:
        return len(self.counts)

    @property
    def total_points(self) -> int:
        return sum(self.counts) + self.noise_count


def adaptive_eps(detections: list[Detection], cfg: ClusterConfig = ClusterConfig()) -> float:
    """Clustering radius from the mean detected box size (w + h) / 2."""
    if not detections:
        raise ValidationError("adaptive_eps needs at least one detection")
    sizes = [(d.box.w + d.box.h) / 2.0 for d in detections]
    return max(cfg.eps_floor, cfg.eps_multiplier * float(np.mean(sizes)))


def dbscan(points: np.ndarray, eps: float, min_pts: int) -> np.ndarray:
    """Density-based clustering; returns per-point labels (noise = -1).

    Core point: at least ``min_pts`` points (itself included) within ``eps``.
    Clusters are the connected components of core points; border points join
    the cluster of the lowest-index core point within range. Labels are
    canonicalized so cluster ids increase with their lowest member index.
    """
    if eps <= 0:
        raise ValidationError("eps must be > 0")
    if min_pts < 2:
        raise ValidationError("min_pts must be >= 2")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = len(pts)
    labels = np.full(n, -1, dtype=int)
    if n == 0:
        return labels
    tree = cKDTree(pts)
    neighbors = tree.query_ball_point(pts, r=eps)
    is_core = np.array([len(nb) >= min_pts for nb in neighbors])
    # Union-find over mutually reachable core points.
    parent = np.arange(n)

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in np.flatnonzero(is_core)[::1]:
        for j in neighbors[i]:
            if is_core[j]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    for i in range(n):
        if is_core[i]:
            labels[i] = find(i)
        else:
            core_in_range = [j for j in neighbors[i] if is_core[j]]
            if core_in_range:
                labels[i] = find(min(core_in_range))
    # Canonical ids: clusters ordered by their lowest contained point index.
    out = np.full(n, -1, dtype=int)
    next_id = 0
    seen: dict[int, int] = {}
    for i in range(n):
        if labels[i] < 0:
            continue
        root = find(labels[i])
        if root not in seen:
            seen[root] = next_id
            next_id += 1
        out[i] = seen[root]
    return out


def summarize_clusters(points: np.ndarray, labels: np.ndarray, eps_floor: float) -> ClusterSummary:
    """Cluster counts and mean pairwise distances from a label assignment."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    labels = np.asarray(labels)
    counts: list[int] = []
    dists: list[float] = []
    for cid in range(labels.max() + 1 if labels.size else 0):
        members = pts[labels == cid]
        diffs = members[:, None, :] - members[None, :, :]
        pair = np.sqrt((diffs**2).sum(axis=2))
        iu = np.triu_indices(len(members), k=1)
        counts.append(len(members))
        dists.append(max(float(pair[iu].mean()), eps_floor))
    return ClusterSummary(
        counts=tuple(counts),
        mean_distances=tuple(dists),
        noise_count=int((labels == -1).sum()),
    )


def clustering_score(summary: ClusterSummary) -> float:
    """Sum over clusters of count / mean distance; empty summary scores 0."""
    return float(sum(c / d for c, d in zip(summary.counts, summary.mean_distances)))


@dataclass(frozen=True)
class UniformityResult:
    score: float
    summary: ClusterSummary | None
    eps: float | None
    flags: tuple[str, ...] = field(default=())


def assess_uniformity(
    centroids: list[Centroid],
    detections: list[Detection],
    cfg: ClusterConfig = ClusterConfig(),
) -> UniformityResult:
    """Full distribution-uniformity assessment for one image.

    Runs adaptive-radius DBSCAN over the centroid coordinates and aggregates
    the clustering score. Totalized: missing centroids or detections yield a
    zero score with an explanatory flag instead of an error.
    """
    if not detections:
        return UniformityResult(0.0, None, None, flags=("no_detections",))
    if not centroids:
        return UniformityResult(0.0, None, None, flags=("no_centroids",))
    eps = adaptive_eps(detections, cfg)
    pts = np.array([[c.x, c.y] for c in centroids], dtype=np.float64)
    labels = dbscan(pts, eps=eps, min_pts=cfg.min_pts)
    summary = summarize_clusters(pts, labels, cfg.eps_floor)
    return UniformityResult(clustering_score(summary), summary, eps)


def pdu_score(
    centroids: list[Centroid],
    detections: list[Detection],
    cfg: ClusterConfig = ClusterConfig(),
) -> float:
    """Distribution-uniformity score; higher means denser, less uniform."""
    return assess_uniformity(centroids, detections, cfg).score
