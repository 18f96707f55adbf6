"""End-to-end per-image scoring over manifests."""

import numpy as np
import pytest

from countconf.data import attach_annotations, load_detections, load_manifest
from countconf.errors import ValidationError
from countconf.pipeline import load_rgb, score_corpus, score_image, score_record
from countconf.synth import DegradeSpec, generate, generate_corpus, stub_detect

from test_synth import _spec, _tiny_plan


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("scored") / "corpus"
    result = generate_corpus(_tiny_plan(), out)
    records = load_manifest(result.manifest_path)
    dets = load_detections(result.detections_path)
    return out, attach_annotations(records, detections=dets)


def test_score_image_produces_finite_factors(niqe_model):
    img, _, _ = generate(_spec(55, pests=16))
    dets = stub_detect(img)
    scores = score_image(img, dets, niqe_model, image_id="x")
    vec = scores.factors.as_tuple()
    assert all(np.isfinite(v) for v in vec)
    assert scores.factors.pn == len(dets)
    assert 0.0 < scores.factors.mdcbb <= 1.0
    assert 0.0 <= scores.factors.agm <= 1.0
    assert 0.0 <= scores.factors.ic <= 1.0
    assert scores.factors.iq <= 0.0
    assert scores.factors.pdu >= 0.0
    assert 0.0 <= scores.edge_density <= 1.0
    assert scores.flags == ()
    assert scores.image_id == "x"


def test_score_image_flags_empty_detections(niqe_model):
    img, _, _ = generate(_spec(56, pests=12))
    scores = score_image(img, [], niqe_model)
    assert scores.factors.mdcbb == 0.0
    assert scores.factors.pn == 0
    assert scores.factors.pdu == 0.0
    assert "no_detections" in scores.flags


def test_score_record_resolves_paths(corpus, niqe_model):
    base, records = corpus
    scores = score_record(records[0], niqe_model)
    assert scores.image_id == str(records[0].image_path)
    assert np.isfinite(scores.factors.iq)


def test_score_record_rejects_mismatched_mask(tmp_path, niqe_model):
    result = generate_corpus(_tiny_plan(), tmp_path / "c")
    records = load_manifest(result.manifest_path)
    stirring = next(r for r in records if r.tool_mask_path is not None)
    from PIL import Image

    Image.fromarray(np.zeros((10, 10), dtype=np.uint8)).save(stirring.tool_mask_path)
    with pytest.raises(ValidationError):
        score_record(stirring, niqe_model)


def test_score_corpus_threading_matches_serial(corpus, niqe_model):
    base, records = corpus
    serial = score_corpus(records, niqe_model, threads=1)
    threaded = score_corpus(records, niqe_model, threads=4)
    assert [s.image_id for s in serial] == [r.image_id for r in records]
    for a, b in zip(serial, threaded):
        assert a == b
    with pytest.raises(ValidationError):
        score_corpus(records, niqe_model, threads=0)


def test_missing_image_raises_oserror(tmp_path, niqe_model):
    with pytest.raises(OSError):
        load_rgb(tmp_path / "nope.png")
