"""Domain types and file formats shared by the whole pipeline.

Boxes are axis-aligned ``(x, y, w, h)`` in pixels with a top-left origin.
Validation is strict and fail-fast: loaders reject any record that violates
a type invariant instead of repairing it, naming the offending row and field.

File formats:

* Manifest CSV with header
  ``image_path,group_id,phase,stir_speed,soil,density_class,pest_count,t_index,frame_offset_s,tool_mask_path``
  (``tool_mask_path`` may be empty). Relative paths resolve against the
  manifest's directory.
* Detections JSON: ``[{"image": "...", "boxes": [{"x":..,"y":..,"w":..,"h":..,"score":..,"label":".."}]}]``;
  ground truth is identical minus ``score``.

Floats are serialized with ``repr`` so a save/load round trip is exact.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import ValidationError


class Phase(str, Enum):
    STATIC = "static"
    STIRRING = "stirring"
    POST_STIR = "post_stir"


class StirSpeed(str, Enum):
    NONE = "none"
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


class DensityClass(str, Enum):
    LOW = "low"
    HIGH = "high"


class TIndex(str, Enum):
    T0 = "T0"
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"
    T4 = "T4"

    @property
    def order(self) -> int:
        return int(self.value[1])


# Canonical factor order used everywhere a FactorVector is flattened.
FACTOR_NAMES: tuple[str, ...] = ("mdcbb", "pn", "agm", "iq", "ic", "pdu")


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box, top-left origin, w/h strictly positive."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"box field {name!r} is not finite: {v}")
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(f"box must have w > 0 and h > 0, got w={self.w}, h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class Detection:
    box: BoundingBox
    confidence: float
    label: str = "pest"

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(
                f"detection confidence must lie in [0, 1], got {self.confidence}"
            )


@dataclass(frozen=True)
class GroundTruthBox:
    box: BoundingBox
    label: str = "pest"


@dataclass(frozen=True)
class ConditionMetadata:
    """Capture conditions for one frame of a trap sequence."""

    group_id: str
    phase: Phase
    stir_speed: StirSpeed
    soil: bool
    density_class: DensityClass
    pest_count: int
    t_index: TIndex
    frame_offset_s: float = 0.0

    def __post_init__(self) -> None:
        if self.phase is Phase.STATIC and self.stir_speed is not StirSpeed.NONE:
            raise ValidationError(
                f"phase=static requires stir_speed=none, got {self.stir_speed.value!r}"
            )
        if self.pest_count < 0:
            raise ValidationError(f"pest_count must be >= 0, got {self.pest_count}")
        if not math.isfinite(self.frame_offset_s) or self.frame_offset_s < 0:
            raise ValidationError(f"frame_offset_s must be finite and >= 0, got {self.frame_offset_s}")


@dataclass(frozen=True)
class FactorVector:
    """The six per-image scores feeding the confidence model.

    Raw values must be finite; the normalized variant produced by the
    confidence model clamps each factor to [0, 1].
    """

    mdcbb: float
    pn: float
    agm: float
    iq: float
    ic: float
    pdu: float

    def __post_init__(self) -> None:
        for name in FACTOR_NAMES:
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"factor {name!r} is not finite")

    def value(self, name: str) -> float:
        if name not in FACTOR_NAMES:
            raise ValidationError(f"unknown factor {name!r}")
        return float(getattr(self, name))

    def as_tuple(self, names: tuple[str, ...] = FACTOR_NAMES) -> tuple[float, ...]:
        return tuple(self.value(n) for n in names)


@dataclass(frozen=True)
class ImageRecord:
    """One manifest row: image, annotations, and capture metadata.

    Immutable after construction and safe to share across workers.
    """

    image_path: Path
    metadata: ConditionMetadata
    detections: tuple[Detection, ...] = ()
    ground_truth: tuple[GroundTruthBox, ...] | None = None
    tool_mask_path: Path | None = None

    @property
    def image_id(self) -> str:
        return str(self.image_path)

    def with_annotations(
        self,
        detections: tuple[Detection, ...] | None = None,
        ground_truth: tuple[GroundTruthBox, ...] | None = None,
    ) -> "ImageRecord":
        return ImageRecord(
            image_path=self.image_path,
            metadata=self.metadata,
            detections=self.detections if detections is None else detections,
            ground_truth=self.ground_truth if ground_truth is None else ground_truth,
            tool_mask_path=self.tool_mask_path,
        )


MANIFEST_HEADER = [
    "image_path",
    "group_id",
    "phase",
    "stir_speed",
    "soil",
    "density_class",
    "pest_count",
    "t_index",
    "frame_offset_s",
    "tool_mask_path",
]


def _parse_enum(enum_cls, raw: str, row: int, column: str):
    try:
        return enum_cls(raw)
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise ValidationError(
            f"manifest row {row}, field {column!r}: {raw!r} is not one of ({allowed})"
        ) from None


def _parse_bool(raw: str, row: int, column: str) -> bool:
    if raw == "true":
        return True
    if raw == "false":
        return False
    raise ValidationError(f"manifest row {row}, field {column!r}: expected true/false, got {raw!r}")


def load_manifest(path: str | Path, check_paths: bool = True) -> list[ImageRecord]:
    """Load a manifest CSV into one ImageRecord per row.

    Enum fields are parsed strictly; any invariant violation raises
    ValidationError naming the row (1-based, header excluded) and field.
    With ``check_paths`` (the default) every referenced image and mask file
    must exist.
    """
    path = Path(path)
    base = path.parent
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"manifest {path} is empty")
        missing = [c for c in MANIFEST_HEADER if c not in reader.fieldnames]
        if missing:
            raise ValidationError(f"manifest {path} is missing columns: {', '.join(missing)}")
        records: list[ImageRecord] = []
        for i, row in enumerate(reader, start=1):
            if any(row.get(c) is None for c in MANIFEST_HEADER):
                raise ValidationError(f"manifest row {i}: wrong number of fields")
            phase = _parse_enum(Phase, row["phase"], i, "phase")
            speed = _parse_enum(StirSpeed, row["stir_speed"], i, "stir_speed")
            density = _parse_enum(DensityClass, row["density_class"], i, "density_class")
            t_index = _parse_enum(TIndex, row["t_index"], i, "t_index")
            soil = _parse_bool(row["soil"], i, "soil")
            try:
                pest_count = int(row["pest_count"])
            except ValueError:
                raise ValidationError(
                    f"manifest row {i}, field 'pest_count': {row['pest_count']!r} is not an integer"
                ) from None
            try:
                offset = float(row["frame_offset_s"])
            except ValueError:
                raise ValidationError(
                    f"manifest row {i}, field 'frame_offset_s': "
                    f"{row['frame_offset_s']!r} is not a number"
                ) from None
            try:
                meta = ConditionMetadata(
                    group_id=row["group_id"],
                    phase=phase,
                    stir_speed=speed,
                    soil=soil,
                    density_class=density,
                    pest_count=pest_count,
                    t_index=t_index,
                    frame_offset_s=offset,
                )
            except ValidationError as exc:
                raise ValidationError(f"manifest row {i}: {exc}") from None
            image_path = base / row["image_path"]
            if check_paths and not image_path.is_file():
                raise ValidationError(
                    f"manifest row {i}, field 'image_path': no such file {image_path}"
                )
            mask_path: Path | None = None
            if row["tool_mask_path"]:
                mask_path = base / row["tool_mask_path"]
                if check_paths and not mask_path.is_file():
                    raise ValidationError(
                        f"manifest row {i}, field 'tool_mask_path': no such file {mask_path}"
                    )
            records.append(
                ImageRecord(image_path=image_path, metadata=meta, tool_mask_path=mask_path)
            )
    return records


def save_manifest(records: list[ImageRecord], path: str | Path) -> None:
    """Write records as a manifest CSV; paths are stored relative to it."""
    path = Path(path)
    base = path.parent
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MANIFEST_HEADER)
        for rec in records:
            m = rec.metadata
            writer.writerow(
                [
                    _relativize(rec.image_path, base),
                    m.group_id,
                    m.phase.value,
                    m.stir_speed.value,
                    "true" if m.soil else "false",
                    m.density_class.value,
                    m.pest_count,
                    m.t_index.value,
                    repr(float(m.frame_offset_s)),
                    _relativize(rec.tool_mask_path, base) if rec.tool_mask_path else "",
                ]
            )


def _relativize(p: Path, base: Path) -> str:
    try:
        return p.relative_to(base).as_posix()
    except ValueError:
        return str(p)


def _box_from_dict(entry: dict, where: str, require_score: bool) -> tuple[BoundingBox, float | None]:
    for key in ("x", "y", "w", "h"):
        if key not in entry:
            raise ValidationError(f"{where}: box is missing key {key!r}")
    try:
        box = BoundingBox(
            float(entry["x"]), float(entry["y"]), float(entry["w"]), float(entry["h"])
        )
    except ValidationError as exc:
        raise ValidationError(f"{where}: {exc}") from None
    score: float | None = None
    if require_score:
        if "score" not in entry:
            raise ValidationError(f"{where}: box is missing key 'score'")
        score = float(entry["score"])
    return box, score


def load_detections(path: str | Path) -> dict[str, tuple[Detection, ...]]:
    """Load a detections JSON file into image id -> detections.

    Confidence outside [0, 1] or non-positive w/h is a hard error, never a
    clamp. An empty box list is a valid zero-detection image.
    """
    with open(path) as fh:
        payload = json.load(fh)
    if not isinstance(payload, list):
        raise ValidationError(f"detections file {path}: top level must be a list")
    result: dict[str, tuple[Detection, ...]] = {}
    for i, entry in enumerate(payload):
        if "image" not in entry or "boxes" not in entry:
            raise ValidationError(f"detections file {path}, entry {i}: needs 'image' and 'boxes'")
        image = str(entry["image"])
        dets = []
        for j, b in enumerate(entry["boxes"]):
            where = f"detections file {path}, image {image!r}, box {j}"
            box, score = _box_from_dict(b, where, require_score=True)
            try:
                dets.append(Detection(box, float(score), str(b.get("label", "pest"))))
            except ValidationError as exc:
                raise ValidationError(f"{where}: {exc}") from None
        result[image] = tuple(dets)
    return result


def load_ground_truth(path: str | Path) -> dict[str, tuple[GroundTruthBox, ...]]:
    """Load a ground-truth JSON file (detections schema minus ``score``)."""
    with open(path) as fh:
        payload = json.load(fh)
    if not isinstance(payload, list):
        raise ValidationError(f"ground-truth file {path}: top level must be a list")
    result: dict[str, tuple[GroundTruthBox, ...]] = {}
    for i, entry in enumerate(payload):
        if "image" not in entry or "boxes" not in entry:
            raise ValidationError(f"ground-truth file {path}, entry {i}: needs 'image' and 'boxes'")
        image = str(entry["image"])
        boxes = []
        for j, b in enumerate(entry["boxes"]):
            where = f"ground-truth file {path}, image {image!r}, box {j}"
            box, _ = _box_from_dict(b, where, require_score=False)
            boxes.append(GroundTruthBox(box, str(b.get("label", "pest"))))
        result[image] = tuple(boxes)
    return result


def save_detections(dets: dict[str, tuple[Detection, ...]], path: str | Path) -> None:
    payload = [
        {
            "image": image,
            "boxes": [
                {
                    "x": d.box.x,
                    "y": d.box.y,
                    "w": d.box.w,
                    "h": d.box.h,
                    "score": d.confidence,
                    "label": d.label,
                }
                for d in boxes
            ],
        }
        for image, boxes in dets.items()
    ]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def save_ground_truth(gts: dict[str, tuple[GroundTruthBox, ...]], path: str | Path) -> None:
    payload = [
        {
            "image": image,
            "boxes": [
                {"x": g.box.x, "y": g.box.y, "w": g.box.w, "h": g.box.h, "label": g.label}
                for g in boxes
            ],
        }
        for image, boxes in gts.items()
    ]
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def attach_annotations(
    records: list[ImageRecord],
    detections: dict[str, tuple[Detection, ...]] | None = None,
    ground_truth: dict[str, tuple[GroundTruthBox, ...]] | None = None,
) -> list[ImageRecord]:
    """Join loaded detection/GT maps onto manifest records by image id.

    Annotation files key images by the manifest's relative path (or any
    suffix of the absolute path); a record with no entry keeps its current
    annotations.
    """
    out = []
    for rec in records:
        dets = _lookup(detections, rec.image_path) if detections is not None else None
        gts = _lookup(ground_truth, rec.image_path) if ground_truth is not None else None
        out.append(rec.with_annotations(detections=dets, ground_truth=gts))
    return out


def _lookup(mapping: dict[str, tuple], image_path: Path):
    key = str(image_path)
    if key in mapping:
        return mapping[key]
    # Annotation files usually store manifest-relative paths.
    posix = image_path.as_posix()
    for cand, value in mapping.items():
        if posix.endswith("/" + cand) or cand == image_path.name or cand == posix:
            return value
    return None
