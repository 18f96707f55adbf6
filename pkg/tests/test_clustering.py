"""Density clustering and the distribution-uniformity score."""

import numpy as np
import pytest

from countconf.clustering import (
    ClusterConfig,
    ClusterSummary,
    adaptive_eps,
    assess_uniformity,
    clustering_score,
    dbscan,
    pdu_score,
    summarize_clusters,
)
from countconf.data import BoundingBox, Detection
from countconf.errors import ValidationError
from countconf.scene import Centroid

import oracles


def _det(w, h, conf=0.8, x=0.0, y=0.0):
    return Detection(box=BoundingBox(x=x, y=y, w=w, h=h), confidence=conf)


def _random_instance(seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(2, 120))
    scale = float(r.uniform(20.0, 400.0))
    if r.random() < 0.5:
        pts = r.uniform(0.0, scale, (n, 2))
    else:
        # Clumped layout: a few tight groups plus stragglers.
        k = int(r.integers(1, 6))
        centers = r.uniform(0.0, scale, (k, 2))
        idx = r.integers(0, k, n)
        pts = centers[idx] + r.normal(0.0, scale * 0.03, (n, 2))
    eps = float(r.uniform(0.02, 0.35) * scale)
    min_pts = int(r.integers(2, 6))
    return pts, eps, min_pts


@pytest.mark.parametrize("seed", range(25))
def test_dbscan_matches_bfs_reference(seed):
    pts, eps, min_pts = _random_instance(seed)
    got = dbscan(pts, eps=eps, min_pts=min_pts)
    want = oracles.brute_dbscan(pts, eps, min_pts)
    assert list(got) == want


def test_dbscan_two_blobs_and_shared_border():
    blob = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, 0.5], [0.5, -0.5]])
    pts = np.vstack([blob, blob + [3.1, 0.0], [[2.05, 0.0]]])
    labels = dbscan(pts, eps=1.2, min_pts=4)
    # The bridge point is border only, and ties resolve to the core with the
    # lowest index, which lives in the first blob.
    assert list(labels) == [0, 0, 0, 0, 1, 1, 1, 1, 0]


def test_dbscan_all_noise():
    pts = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    assert list(dbscan(pts, eps=1.0, min_pts=2)) == [-1, -1, -1]


def test_dbscan_chain_is_transitive():
    # Consecutive points 1 apart, eps 1: one long cluster.
    pts = np.array([[float(i), 0.0] for i in range(12)])
    assert list(dbscan(pts, eps=1.0, min_pts=2)) == [0] * 12


def test_dbscan_scale_invariance():
    pts, eps, min_pts = _random_instance(99)
    base = list(dbscan(pts, eps=eps, min_pts=min_pts))
    for c in (0.5, 2.0, 1000.0):
        assert list(dbscan(pts * c, eps=eps * c, min_pts=min_pts)) == base


def test_dbscan_permutation_invariance():
    pts, eps, min_pts = _random_instance(7)
    r = np.random.default_rng(0)
    perm = r.permutation(len(pts))
    base = oracles.partition_of(dbscan(pts, eps=eps, min_pts=min_pts))
    permuted = dbscan(pts[perm], eps=eps, min_pts=min_pts)
    # Map the permuted labels back to original indices before comparing.
    back = [-1] * len(pts)
    for new_i, orig_i in enumerate(perm):
        back[orig_i] = permuted[new_i]
    assert oracles.partition_of(back) == base


def test_dbscan_parameter_validation():
    pts = np.zeros((3, 2))
    with pytest.raises(ValidationError):
        dbscan(pts, eps=0.0, min_pts=2)
    with pytest.raises(ValidationError):
        dbscan(pts, eps=1.0, min_pts=1)


def test_adaptive_eps_hand_value():
    dets = [_det(6.0, 10.0), _det(2.0, 2.0)]
    assert adaptive_eps(dets, ClusterConfig()) == pytest.approx(5.0)
    assert adaptive_eps(dets, ClusterConfig(eps_multiplier=2.0)) == pytest.approx(10.0)
    tiny = [_det(0.5, 0.5)]
    assert adaptive_eps(tiny, ClusterConfig()) == 1.0
    with pytest.raises(ValidationError):
        adaptive_eps([], ClusterConfig())


def test_summarize_clusters_hand_values():
    pts = np.array([[0.0, 0.0], [4.0, 0.0], [8.0, 0.0]])
    summary = summarize_clusters(pts, np.array([0, 0, 0]), eps_floor=1.0)
    assert summary.counts == (3,)
    assert summary.mean_distances[0] == pytest.approx(16.0 / 3.0)
    assert summary.noise_count == 0
    assert clustering_score(summary) == pytest.approx(9.0 / 16.0)


def test_summary_distance_floor():
    pts = np.array([[0.0, 0.0], [0.1, 0.0]])
    summary = summarize_clusters(pts, np.array([0, 0]), eps_floor=1.0)
    assert summary.mean_distances == (1.0,)
    assert clustering_score(summary) == pytest.approx(2.0)


def test_cluster_score_hand_cases():
    assert clustering_score(
        ClusterSummary(counts=(3, 4), mean_distances=(2.0, 1.0), noise_count=2)
    ) == pytest.approx(5.5)
    assert clustering_score(ClusterSummary(counts=(), mean_distances=(), noise_count=9)) == 0.0


def test_cluster_summary_validation():
    with pytest.raises(ValidationError):
        ClusterSummary(counts=(1,), mean_distances=(2.0,), noise_count=0)
    with pytest.raises(ValidationError):
        ClusterSummary(counts=(2, 3), mean_distances=(2.0,), noise_count=0)
    with pytest.raises(ValidationError):
        ClusterSummary(counts=(2,), mean_distances=(0.0,), noise_count=0)


def test_cluster_config_validation():
    with pytest.raises(ValidationError):
        ClusterConfig(eps_multiplier=0.0)
    with pytest.raises(ValidationError):
        ClusterConfig(min_pts=1)
    with pytest.raises(ValidationError):
        ClusterConfig(eps_floor=-1.0)


def test_assess_uniformity_flags():
    out = assess_uniformity([], [], ClusterConfig())
    assert out.score == 0.0 and out.flags == ("no_detections",)
    dets = [_det(4.0, 4.0)]
    out = assess_uniformity([], dets, ClusterConfig())
    assert out.score == 0.0 and out.flags == ("no_centroids",)


def test_assess_uniformity_two_point_case():
    dets = [_det(4.0, 4.0), _det(4.0, 4.0, x=20.0)]
    cents = [Centroid(x=10.0, y=10.0, area=20.0), Centroid(x=14.0, y=10.0, area=20.0)]
    out = assess_uniformity(cents, dets, ClusterConfig())
    assert out.eps == pytest.approx(4.0)
    assert out.score == pytest.approx(0.5)
    assert out.flags == ()
    assert pdu_score(cents, dets, ClusterConfig()) == pytest.approx(0.5)


def test_pdu_score_order_invariance():
    r = np.random.default_rng(11)
    pts = r.uniform(0.0, 100.0, (40, 2))
    cents = [Centroid(x=float(x), y=float(y), area=15.0) for x, y in pts]
    dets = [_det(float(r.uniform(4, 9)), float(r.uniform(4, 9))) for _ in range(30)]
    a = pdu_score(cents, dets, ClusterConfig())
    perm = r.permutation(len(cents))
    b = pdu_score([cents[i] for i in perm], list(reversed(dets)), ClusterConfig())
    assert b == pytest.approx(a, rel=1e-9)
