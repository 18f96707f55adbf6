"""Synthetic scene generator, stub detector, and corpus writer."""

import numpy as np
import pytest

from countconf.clustering import ClusterConfig, pdu_score
from countconf.data import (
    Phase,
    StirSpeed,
    TIndex,
    attach_annotations,
    load_detections,
    load_ground_truth,
    load_manifest,
)
from countconf.errors import ValidationError
from countconf.evaluation import match
from countconf.imageops import GrayImage, average_gradient_magnitude, histogram_entropy, to_gray
from countconf.scene import SegmentationConfig, extract_centroids, recolor_tool
from countconf.synth import (
    DegradeSpec,
    SceneSpec,
    add_stick,
    confidence_plan,
    degrade_for,
    generate,
    generate_corpus,
    pristine_plan,
    single_variable_plan,
    stub_detect,
)

from conftest import make_condition


def _spec(seed, pests=20, size=288, tightness=0.0, **kwargs):
    cond_kwargs = {}
    for key in ("phase", "stir_speed", "soil", "density_class", "t_index"):
        if key in kwargs:
            cond_kwargs[key] = kwargs.pop(key)
    cond = make_condition(group_id=f"t{seed}", pest_count=pests, **cond_kwargs)
    return SceneSpec(
        seed=seed,
        condition=cond,
        width=size,
        height=size,
        pest_count=pests,
        cluster_tightness=tightness,
        **kwargs,
    )


def test_generate_is_deterministic():
    spec = _spec(404, pests=12)
    img_a, gt_a, cond_a = generate(spec)
    img_b, gt_b, cond_b = generate(spec)
    assert np.array_equal(img_a, img_b)
    assert gt_a == gt_b
    assert cond_a == cond_b
    assert img_a.dtype == np.uint8
    assert img_a.shape == (288, 288, 3)


def test_ground_truth_matches_request():
    spec = _spec(7, pests=18)
    img, gts, _ = generate(spec)
    assert len(gts) == 18
    for gt in gts:
        b = gt.box
        assert 0 <= b.x and b.x + b.w <= spec.width
        assert 0 <= b.y and b.y + b.h <= spec.height
        assert b.w >= 2 and b.h >= 2


def test_stub_detector_on_clean_scatter():
    scores = []
    for seed in (1, 2, 3, 4, 5):
        img, gts, _ = generate(_spec(seed, pests=20))
        dets = stub_detect(img)
        res = match(dets, gts, iou_thresh=0.5)
        scores.append(res.jaccard)
    assert min(scores) >= 0.9
    assert float(np.mean(scores)) >= 0.95


def test_clumped_scenes_score_higher_uniformity():
    cfg = SegmentationConfig()
    for seed in (2, 4, 5, 6, 7):
        tight_img, _, _ = generate(_spec(seed, pests=25, size=320, tightness=0.9))
        scatter_img, _, _ = generate(_spec(seed + 100, pests=25, size=320, tightness=0.0))
        tight = pdu_score(extract_centroids(tight_img, cfg), stub_detect(tight_img), ClusterConfig())
        scatter = pdu_score(
            extract_centroids(scatter_img, cfg), stub_detect(scatter_img), ClusterConfig()
        )
        assert tight > scatter


def test_drop_rate_shrinks_detection_sets_monotonically():
    img, gts, _ = generate(_spec(31, pests=22))
    previous = None
    jaccards = []
    for rate in (0.0, 0.2, 0.4, 0.6):
        dets = stub_detect(img, degrade=DegradeSpec(drop_rate=rate, seed=555))
        boxes = {d.box.as_tuple() for d in dets}
        if previous is not None:
            assert boxes <= previous
        previous = boxes
        jaccards.append(match(dets, gts, iou_thresh=0.5).jaccard)
    assert jaccards == sorted(jaccards, reverse=True)
    assert jaccards[0] > jaccards[-1]


def test_blur_reduces_sharpness():
    values = []
    for blur in (0.0, 2.0, 4.0):
        img, _, _ = generate(_spec(9, pests=15, blur_sigma=blur))
        values.append(average_gradient_magnitude(to_gray(img)))
    assert values[0] > values[1] > values[2]


def test_noise_raises_entropy():
    quiet, _, _ = generate(_spec(10, pests=15, noise_sigma=0.0))
    noisy, _, _ = generate(_spec(10, pests=15, noise_sigma=15.0))
    assert histogram_entropy(to_gray(noisy)) > histogram_entropy(to_gray(quiet))


def test_soil_changes_texture_not_components():
    clean_img, _, _ = generate(_spec(12, pests=15, soil_speckle_density=0.0))
    soiled_img, _, _ = generate(_spec(12, pests=15, soil_speckle_density=0.8))
    assert histogram_entropy(to_gray(soiled_img)) > histogram_entropy(to_gray(clean_img))
    assert len(stub_detect(soiled_img)) == len(stub_detect(clean_img))


def test_degrade_for_scales_with_severity():
    mild = degrade_for(_spec(1, pests=10))
    harsh = degrade_for(
        _spec(
            1,
            pests=10,
            blur_sigma=3.0,
            noise_sigma=16.0,
            soil_speckle_density=0.8,
            phase=Phase.STIRRING,
            stir_speed=StirSpeed.HIGH,
        )
    )
    assert harsh.drop_rate > mild.drop_rate
    assert harsh.jitter_px > mild.jitter_px
    assert harsh.spurious_rate > mild.spurious_rate
    capped = degrade_for(_spec(1, pests=10, blur_sigma=20.0))
    assert capped.drop_rate == 0.6


def test_spurious_detections_have_expected_shape():
    img, _, _ = generate(_spec(77, pests=0))
    assert stub_detect(img) == []
    dets = stub_detect(img, degrade=DegradeSpec(spurious_rate=4.0, seed=99))
    assert len(dets) >= 1
    for d in dets:
        assert 6.0 <= d.box.w <= 16.0
        assert 6.0 <= d.box.h <= 16.0
        assert 0.05 <= d.confidence <= 0.6


def test_degrade_spec_validation():
    with pytest.raises(ValidationError):
        DegradeSpec(drop_rate=1.5)
    with pytest.raises(ValidationError):
        DegradeSpec(jitter_px=-1.0)


def test_add_stick_paints_masked_pixels():
    img, _, _ = generate(_spec(5, pests=10))
    out, mask = add_stick(img, seed=123)
    assert mask.dtype == bool and mask.any()
    assert not np.array_equal(out, img)
    assert np.array_equal(out[~mask], img[~mask])
    out2, mask2 = add_stick(img, seed=123)
    assert np.array_equal(out, out2) and np.array_equal(mask, mask2)
    # Recoloring through the mask removes the painted stick again.
    healed = recolor_tool(out, mask)
    assert len(stub_detect(healed)) == len(stub_detect(img))


def test_scene_spec_validation():
    with pytest.raises(ValidationError):
        _spec(1, size=16)
    with pytest.raises(ValidationError):
        _spec(1, tightness=1.5)
    with pytest.raises(ValidationError):
        SceneSpec(seed=1, condition=make_condition(pest_count=5), pest_count=7)
    with pytest.raises(ValidationError):
        _spec(1, pest_radius_range=(0.0, 4.0))
    with pytest.raises(ValidationError):
        _spec(1, pests=10, size=48, pest_radius_range=(10.0, 12.0))


def test_single_variable_plan_structure():
    plan = single_variable_plan()
    assert len(plan) == 96
    groups = {}
    for spec in plan:
        groups.setdefault(spec.condition.group_id, []).append(spec)
    assert len(groups) == 12
    assert all(len(v) == 8 for v in groups.values())
    density_ids = [g for g in groups if g.startswith("density")]
    speed_ids = [g for g in groups if g.startswith("speed_")]
    soil_ids = [g for g in groups if g.startswith("soil")]
    assert (len(density_ids), len(speed_ids), len(soil_ids)) == (6, 3, 3)
    for spec in plan:
        assert spec.pest_count == spec.condition.pest_count
        if spec.condition.phase is Phase.STATIC:
            assert spec.condition.stir_speed is StirSpeed.NONE
    # Each group's schedule covers static, stirring, and post-stir frames.
    for specs in groups.values():
        phases = {s.condition.phase for s in specs}
        assert phases == {Phase.STATIC, Phase.STIRRING, Phase.POST_STIR}


def test_confidence_plan_size_and_spread():
    plan = confidence_plan(n_groups=6, base_seed=12345)
    assert len(plan) == 42
    assert len({s.seed for s in plan}) == len(plan)
    counts = {s.pest_count for s in plan}
    assert len(counts) > 1


def test_pristine_plan_is_clean():
    plan = pristine_plan(n_images=10, base_seed=777)
    assert len(plan) == 10
    for spec in plan:
        assert spec.width == 480 and spec.height == 480
        assert spec.blur_sigma == 0.0 and spec.noise_sigma == 0.0
        assert spec.soil_speckle_density == 0.0
        assert spec.cluster_tightness == 0.0
        assert spec.condition.phase is Phase.STATIC
        assert spec.condition.t_index is TIndex.T0
        assert 15 <= spec.pest_count <= 30


def _tiny_plan():
    specs = []
    specs.append(_spec(700, pests=8, size=160))
    specs.append(
        _spec(
            701,
            pests=8,
            size=160,
            phase=Phase.STIRRING,
            stir_speed=StirSpeed.LOW,
            t_index=TIndex.T1,
            blur_sigma=1.2,
            noise_sigma=8.0,
        )
    )
    return specs


def test_corpus_round_trip(tmp_path):
    result = generate_corpus(_tiny_plan(), tmp_path / "corpus")
    assert result.manifest_path.exists()
    records = load_manifest(result.manifest_path)
    assert len(records) == 2
    dets = load_detections(result.detections_path)
    gts = load_ground_truth(result.ground_truth_path)
    joined = attach_annotations(records, detections=dets, ground_truth=gts)
    for rec in joined:
        assert rec.ground_truth is not None and len(rec.ground_truth) == 8
        assert rec.detections is not None
    # The stirring frame carries a tool mask; the static one does not.
    assert joined[0].tool_mask_path is None
    assert joined[1].tool_mask_path is not None and joined[1].tool_mask_path.exists()


def test_corpus_rerun_is_byte_identical(tmp_path):
    a = generate_corpus(_tiny_plan(), tmp_path / "a")
    b = generate_corpus(_tiny_plan(), tmp_path / "b")
    for rec_a, rec_b in zip(a.records, b.records):
        # In-memory records keep manifest-relative paths.
        img_a = (tmp_path / "a" / rec_a.image_path).read_bytes()
        img_b = (tmp_path / "b" / rec_b.image_path).read_bytes()
        assert img_a == img_b
    assert a.manifest_path.read_text() == b.manifest_path.read_text()
    assert a.detections_path.read_text() == b.detections_path.read_text()
    assert a.ground_truth_path.read_text() == b.ground_truth_path.read_text()


def test_corpus_rejects_empty_plan(tmp_path):
    with pytest.raises(ValidationError):
        generate_corpus([], tmp_path / "empty")
