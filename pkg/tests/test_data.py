"""Schema validation and file round trips for the data layer."""

import json

import numpy as np
import pytest
from PIL import Image

from countconf.data import (
    BoundingBox,
    ConditionMetadata,
    DensityClass,
    Detection,
    FactorVector,
    GroundTruthBox,
    ImageRecord,
    Phase,
    StirSpeed,
    TIndex,
    attach_annotations,
    load_detections,
    load_ground_truth,
    load_manifest,
    save_detections,
    save_ground_truth,
    save_manifest,
)
from countconf.errors import ValidationError

from conftest import make_condition


def test_bounding_box_basic():
    box = BoundingBox(x=1.0, y=2.0, w=3.0, h=4.0)
    assert box.area == 12.0
    assert box.as_tuple() == (1.0, 2.0, 3.0, 4.0)


@pytest.mark.parametrize("bad", [dict(w=0.0), dict(h=-1.0), dict(x=float("nan"))])
def test_bounding_box_rejects_degenerate(bad):
    kwargs = dict(x=0.0, y=0.0, w=5.0, h=5.0)
    kwargs.update(bad)
    with pytest.raises(ValidationError):
        BoundingBox(**kwargs)


def test_detection_confidence_range():
    Detection(box=BoundingBox(0, 0, 2, 2), confidence=0.0)
    Detection(box=BoundingBox(0, 0, 2, 2), confidence=1.0)
    with pytest.raises(ValidationError):
        Detection(box=BoundingBox(0, 0, 2, 2), confidence=1.5)
    with pytest.raises(ValidationError):
        Detection(box=BoundingBox(0, 0, 2, 2), confidence=-0.1)


def test_condition_metadata_static_requires_no_speed():
    make_condition()
    with pytest.raises(ValidationError):
        make_condition(stir_speed=StirSpeed.HIGH)
    with pytest.raises(ValidationError):
        make_condition(pest_count=-1)
    cond = make_condition(phase=Phase.STIRRING, stir_speed=StirSpeed.MEDIUM)
    assert cond.stir_speed is StirSpeed.MEDIUM


def test_t_index_order_is_chronological():
    orders = [t.order for t in (TIndex.T0, TIndex.T1, TIndex.T2, TIndex.T3, TIndex.T4)]
    assert orders == sorted(orders)
    assert len(set(orders)) == 5


def test_factor_vector_accessors():
    vec = FactorVector(mdcbb=0.5, pn=12.0, agm=0.1, iq=-3.0, ic=0.7, pdu=2.5)
    assert vec.as_tuple() == (0.5, 12.0, 0.1, -3.0, 0.7, 2.5)
    assert vec.value("iq") == -3.0
    with pytest.raises(ValidationError):
        FactorVector(mdcbb=float("inf"), pn=0, agm=0, iq=0, ic=0, pdu=0)


def _write_png(path):
    arr = np.zeros((4, 4, 3), dtype=np.uint8)
    Image.fromarray(arr).save(path)


def _records(tmp_path, with_mask=False):
    img_dir = tmp_path / "images"
    img_dir.mkdir(exist_ok=True)
    conditions = [
        make_condition(group_id="g0"),
        make_condition(
            group_id="g1",
            phase=Phase.STIRRING,
            stir_speed=StirSpeed.HIGH,
            soil=True,
            density_class=DensityClass.HIGH,
            pest_count=66,
            t_index=TIndex.T2,
            frame_offset_s=6.5,
        ),
    ]
    recs = []
    for i, cond in enumerate(conditions):
        p = img_dir / f"{i:04d}.png"
        _write_png(p)
        mask = None
        if with_mask and i == 1:
            mask = img_dir / f"{i:04d}_mask.png"
            _write_png(mask)
        recs.append(ImageRecord(image_path=p, metadata=cond, tool_mask_path=mask))
    return recs


def test_manifest_round_trip(tmp_path):
    recs = _records(tmp_path, with_mask=True)
    out = tmp_path / "manifest.csv"
    save_manifest(recs, out)
    loaded = load_manifest(out)
    assert len(loaded) == 2
    for orig, back in zip(recs, loaded):
        assert back.image_path == orig.image_path
        assert back.metadata == orig.metadata
        assert back.tool_mask_path == orig.tool_mask_path


def test_manifest_missing_file_detected(tmp_path):
    recs = _records(tmp_path)
    out = tmp_path / "manifest.csv"
    save_manifest(recs, out)
    recs[0].image_path.unlink()
    with pytest.raises(ValidationError):
        load_manifest(out)
    # Relaxed mode permits manifests that reference absent files.
    assert len(load_manifest(out, check_paths=False)) == 2


def test_manifest_bad_rows_name_offender(tmp_path):
    recs = _records(tmp_path)
    out = tmp_path / "manifest.csv"
    save_manifest(recs, out)
    text = out.read_text().splitlines()

    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join([text[0], text[1].replace("static", "spinning")]) + "\n")
    with pytest.raises(ValidationError) as err:
        load_manifest(bad, check_paths=False)
    assert "phase" in str(err.value)

    bad.write_text("\n".join([text[0], text[1].replace("false", "maybe")]) + "\n")
    with pytest.raises(ValidationError) as err:
        load_manifest(bad, check_paths=False)
    assert "soil" in str(err.value)

    # Short row: drop the trailing fields entirely.
    short = ",".join(text[1].split(",")[:4])
    bad.write_text("\n".join([text[0], short]) + "\n")
    with pytest.raises(ValidationError):
        load_manifest(bad, check_paths=False)


def test_detections_round_trip(tmp_path):
    dets = {
        "images/0000.png": (
            Detection(box=BoundingBox(1, 2, 3, 4), confidence=0.9),
            Detection(box=BoundingBox(5, 5, 2, 2), confidence=0.25),
        ),
        "images/0001.png": (),
    }
    path = tmp_path / "detections.json"
    save_detections(dets, path)
    back = load_detections(path)
    assert back == dets


def test_ground_truth_round_trip(tmp_path):
    gts = {"a.png": (GroundTruthBox(box=BoundingBox(0, 0, 4, 6)),)}
    path = tmp_path / "gt.json"
    save_ground_truth(gts, path)
    assert load_ground_truth(path) == gts


def test_detections_reject_malformed(tmp_path):
    path = tmp_path / "detections.json"
    path.write_text(json.dumps([{"image": "a.png", "boxes": [{"x": 1, "y": 2, "w": 3}]}]))
    with pytest.raises(ValidationError):
        load_detections(path)
    path.write_text(
        json.dumps(
            [{"image": "a.png", "boxes": [{"x": 1, "y": 2, "w": 3, "h": 4, "score": 2.0}]}]
        )
    )
    with pytest.raises(ValidationError):
        load_detections(path)


def test_attach_annotations_suffix_match(tmp_path):
    recs = _records(tmp_path)
    dets = {"images/0000.png": (Detection(box=BoundingBox(0, 0, 2, 2), confidence=0.5),)}
    gts = {"images/0001.png": (GroundTruthBox(box=BoundingBox(1, 1, 2, 2)),)}
    joined = attach_annotations(recs, detections=dets, ground_truth=gts)
    assert joined[0].detections == dets["images/0000.png"]
    assert joined[0].ground_truth is None
    assert joined[1].ground_truth == gts["images/0001.png"]
    # A record with no matching entry keeps its existing annotations.
    assert joined[1].detections == ()
