"""Structured pipeline configuration with a strict JSON loader.

One config file is the single source of truth for a run; command-line
flags override individual fields. Unknown keys anywhere in the file are
rejected by name so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .clustering import ClusterConfig
from .data import FACTOR_NAMES
from .errors import ValidationError
from .scene import SegmentationConfig


@dataclass(frozen=True)
class RegressionConfig:
    degree: int = 2
    ridge: float = 1e-6
    factors: tuple[str, ...] = FACTOR_NAMES
    train_fraction: float = 0.7

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise ValidationError(f"regression degree must be >= 1, got {self.degree}")
        if self.ridge < 0 or not math.isfinite(self.ridge):
            raise ValidationError(f"ridge must be finite and >= 0, got {self.ridge}")
        unknown = [f for f in self.factors if f not in FACTOR_NAMES]
        if unknown:
            raise ValidationError(f"unknown regression factors: {', '.join(unknown)}")
        if len(set(self.factors)) != len(self.factors) or not self.factors:
            raise ValidationError("regression factors must be a nonempty set of unique names")
        if not (0.0 < self.train_fraction < 1.0):
            raise ValidationError(
                f"train_fraction must lie in (0, 1), got {self.train_fraction}"
            )


@dataclass(frozen=True)
class PipelineConfig:
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    clustering: ClusterConfig = field(default_factory=ClusterConfig)
    regression: RegressionConfig = field(default_factory=RegressionConfig)
    niqe_model_path: Path | None = None
    edge_threshold: float = 0.1
    iou_thresh: float = 0.5
    normalize_metrics: bool = True
    threads: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.edge_threshold < 1.0):
            raise ValidationError(
                f"edge_threshold must lie in (0, 1), got {self.edge_threshold}"
            )
        if not (0.0 < self.iou_thresh <= 1.0):
            raise ValidationError(f"iou_thresh must lie in (0, 1], got {self.iou_thresh}")
        if self.threads < 1:
            raise ValidationError(f"threads must be >= 1, got {self.threads}")


def _build(cls, payload: dict, where: str):
    allowed = {f.name for f in fields(cls)}
    unknown = [k for k in payload if k not in allowed]
    if unknown:
        raise ValidationError(f"unknown config key {unknown[0]!r} in {where}")
    return cls(**payload)


def load_config(path: str | Path) -> PipelineConfig:
    """Parse a JSON config file; every unknown key is an error."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ValidationError(f"config {path} must be a JSON object")

    top = dict(payload)
    kwargs = {}
    for key, cls in (
        ("segmentation", SegmentationConfig),
        ("clustering", ClusterConfig),
        ("regression", RegressionConfig),
    ):
        if key in top:
            block = top.pop(key)
            if not isinstance(block, dict):
                raise ValidationError(f"config block {key!r} must be a JSON object")
            if key == "regression" and "factors" in block:
                block = dict(block, factors=tuple(block["factors"]))
            kwargs[key] = _build(cls, block, f"{path}:{key}")
    if "niqe_model_path" in top:
        value = top.pop("niqe_model_path")
        kwargs["niqe_model_path"] = None if value is None else Path(value)
    allowed = {f.name for f in fields(PipelineConfig)}
    unknown = [k for k in top if k not in allowed]
    if unknown:
        raise ValidationError(f"unknown config key {unknown[0]!r} in {path}")
    kwargs.update(top)
    return PipelineConfig(**kwargs)
