"""Prediction vs ground-truth matching and the counting metrics.

Matching is greedy and one-to-one: predictions in descending confidence
order (ties keep input order) each take the unmatched ground-truth box with
the highest IoU at or above the threshold. Per-image agreement is the
Jaccard index TP / (TP + FP + FN), with the 0/0 case (an empty image
counted as empty) defined as 1. Corpus-level mean counting confidence (MCC)
pools TP/FP/FN totals first and takes the Jaccard of the totals, which is
the only reading consistent with published count-evaluation tables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .data import BoundingBox, Detection, GroundTruthBox
from .errors import ValidationError


@dataclass(frozen=True)
class MatchResult:
    tp: int
    fp: int
    fn: int
    jaccard: float
    pairs: tuple[tuple[int, int, float], ...]  # (detection idx, gt idx, IoU)


@dataclass(frozen=True)
class DetectionEvalReport:
    ap_50: float
    tp: int
    fp: int
    fn: int
    mcc: float

    def to_json(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(
                {"ap50": self.ap_50, "tp": self.tp, "fp": self.fp, "fn": self.fn, "mcc": self.mcc},
                fh,
                indent=1,
            )


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 0 when disjoint."""
    ix = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    iy = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def jaccard_of_totals(tp: int, fp: int, fn: int) -> float:
    denom = tp + fp + fn
    return tp / denom if denom > 0 else 1.0


def match(
    preds: list[Detection],
    gts: list[GroundTruthBox],
    iou_thresh: float = 0.5,
) -> MatchResult:
    """Greedy one-to-one matching of predictions to ground truth."""
    if not (0.0 < iou_thresh <= 1.0):
        raise ValidationError(f"iou_thresh must lie in (0, 1], got {iou_thresh}")
    order = sorted(range(len(preds)), key=lambda i: (-preds[i].confidence, i))
    taken = [False] * len(gts)
    pairs: list[tuple[int, int, float]] = []
    for pi in order:
        best_j = -1
        best_iou = 0.0
        for j, gt in enumerate(gts):
            if taken[j]:
                continue
            v = iou(preds[pi].box, gt.box)
            if v >= iou_thresh and v > best_iou:
                best_iou = v
                best_j = j
        if best_j >= 0:
            taken[best_j] = True
            pairs.append((pi, best_j, best_iou))
    tp = len(pairs)
    fp = len(preds) - tp
    fn = len(gts) - tp
    return MatchResult(
        tp=tp,
        fp=fp,
        fn=fn,
        jaccard=jaccard_of_totals(tp, fp, fn),
        pairs=tuple(sorted(pairs)),
    )


def mcc(results: list[MatchResult]) -> float:
    """Mean counting confidence: Jaccard of the pooled TP/FP/FN totals."""
    if not results:
        raise ValidationError("mcc needs at least one match result")
    tp = sum(r.tp for r in results)
    fp = sum(r.fp for r in results)
    fn = sum(r.fn for r in results)
    return jaccard_of_totals(tp, fp, fn)


def ap_at_50(
    preds_per_image: list[list[Detection]],
    gts_per_image: list[list[GroundTruthBox]],
    iou_thresh: float = 0.5,
) -> float:
    """All-point interpolated average precision at the given IoU threshold.

    Predictions from all images are processed in global descending-confidence
    order; each greedily takes the best unmatched ground-truth box of its own
    image. With no ground truth anywhere the value is 1 for an empty
    prediction set and 0 otherwise.
    """
    if len(preds_per_image) != len(gts_per_image):
        raise ValidationError("preds and gts must cover the same images")
    n_gt = sum(len(g) for g in gts_per_image)
    flat: list[tuple[float, int, int]] = []  # (confidence, image idx, pred idx)
    for img_i, preds in enumerate(preds_per_image):
        for pi, p in enumerate(preds):
            flat.append((p.confidence, img_i, pi))
    if n_gt == 0:
        return 1.0 if not flat else 0.0
    flat.sort(key=lambda t: (-t[0], t[1], t[2]))
    taken = [[False] * len(g) for g in gts_per_image]
    tp_flags: list[bool] = []
    for conf, img_i, pi in flat:
        box = preds_per_image[img_i][pi].box
        best_j = -1
        best_iou = 0.0
        for j, gt in enumerate(gts_per_image[img_i]):
            if taken[img_i][j]:
                continue
            v = iou(box, gt.box)
            if v >= iou_thresh and v > best_iou:
                best_iou = v
                best_j = j
        if best_j >= 0:
            taken[img_i][best_j] = True
            tp_flags.append(True)
        else:
            tp_flags.append(False)
    # Precision envelope integrated over recall steps.
    ctp = 0
    points: list[tuple[float, float]] = []
    for k, is_tp in enumerate(tp_flags, start=1):
        ctp += int(is_tp)
        points.append((ctp / n_gt, ctp / k))
    envelope = []
    best = 0.0
    for recall, prec in reversed(points):
        best = max(best, prec)
        envelope.append((recall, best))
    envelope.reverse()
    ap = 0.0
    prev_r = 0.0
    for recall, prec in envelope:
        if recall > prev_r:
            ap += (recall - prev_r) * prec
            prev_r = recall
    return ap


@dataclass(frozen=True)
class CountingFactors:
    """Counting-result factor scores for one image."""

    mdcbb: float
    pn: int
    empty: bool


def counting_factors(preds: list[Detection]) -> CountingFactors:
    """Mean detection confidence and predicted count; empty input is flagged."""
    if not preds:
        return CountingFactors(mdcbb=0.0, pn=0, empty=True)
    mean_conf = sum(p.confidence for p in preds) / len(preds)
    return CountingFactors(mdcbb=float(mean_conf), pn=len(preds), empty=False)


def evaluate_corpus(
    preds_per_image: list[list[Detection]],
    gts_per_image: list[list[GroundTruthBox]],
    iou_thresh: float = 0.5,
) -> tuple[list[MatchResult], DetectionEvalReport]:
    """Per-image matches plus the pooled corpus report."""
    matches = [match(p, g, iou_thresh) for p, g in zip(preds_per_image, gts_per_image)]
    report = DetectionEvalReport(
        ap_50=ap_at_50(preds_per_image, gts_per_image, iou_thresh),
        tp=sum(m.tp for m in matches),
        fp=sum(m.fp for m in matches),
        fn=sum(m.fn for m in matches),
        mcc=mcc(matches),
    )
    return matches, report
