"""
Evaluation datasets.

A manifest is a JSON-lines file, one record per line:

    {"image": "frames/0001.png", "instruction": "go to the door",
     "category": "in-view", "truth_kind": "pixel", "truth": [412, 230]}

truth_kind is one of action (an action vector), pixel (a target pixel) or
bbox (x, y, w, h in pixels). Image and camera paths are relative to the
manifest's directory; camera may also be an inline table.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.action_space.camera import CameraModel, load_camera
from src.action_space.geometry import pixel_of
from src.action_space.spaces import Action, ActionKind, ActionSpaceSpec, clamp
from src.errors import ConfigurationError, ManifestError
from src.eval.metrics import action_direction, bbox_metrics, cosine_metric, normalized_l2

logger = structlog.get_logger(__name__)

TruthKind = Literal["action", "pixel", "bbox"]

# Worst-case metric values recorded for runs that fail on a record
PENALTIES: Dict[str, float] = {
    "cosine": -1.0,
    "normalized_l2": 1.0,
    "bbox_hit": 0.0,
    "bbox_center_distance": 1.0,
}

# Metrics where a larger value is better
HIGHER_IS_BETTER = {"cosine", "bbox_hit"}


class _ManifestLine(BaseModel):
    model_config = ConfigDict(extra="forbid")

    image: str
    instruction: str
    category: str = "default"
    truth_kind: TruthKind
    truth: List[float]
    camera: Optional[Union[str, Dict[str, Any]]] = None
    id: Optional[str] = Field(None, description="Optional record identifier")

    @model_validator(mode="after")
    def _truth_shape(self) -> "_ManifestLine":
        if self.truth_kind == "pixel" and len(self.truth) != 2:
            raise ValueError("pixel truth needs [u, v]")
        if self.truth_kind == "bbox":
            if len(self.truth) != 4:
                raise ValueError("bbox truth needs [x, y, w, h]")
            if self.truth[2] <= 0 or self.truth[3] <= 0:
                raise ValueError("bbox truth needs positive width and height")
        return self


@dataclass(frozen=True)
class EvalRecord:
    """One evaluation example."""

    index: int
    image_path: Path
    instruction: str
    category: str
    truth_kind: str
    truth: Tuple[float, ...]
    camera: Optional[CameraModel] = None
    record_id: Optional[str] = None


def _resolve_camera(
    value: Optional[Union[str, Dict[str, Any]]], base: Path, line_number: int
) -> Optional[CameraModel]:
    if value is None:
        return None
    try:
        if isinstance(value, str):
            return load_camera(str(base / value))
        return CameraModel.from_dict(value)
    except ConfigurationError as e:
        raise ManifestError(str(e), line_number, field="camera") from e


def load_manifest(path: Union[str, Path]) -> List[EvalRecord]:
    """
    Read a JSON-lines manifest.

    Blank lines are skipped; record indices count records, not lines.

    Raises:
        ManifestError: Naming the 1-based line number of a bad record
        ConfigurationError: If the manifest itself is missing
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Manifest not found: {path}", field="eval.manifest")
    base = path.parent
    records: List[EvalRecord] = []
    with open(path, encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            if not raw.strip():
                continue
            try:
                line = _ManifestLine.model_validate(json.loads(raw))
            except json.JSONDecodeError as e:
                raise ManifestError(f"Invalid JSON: {e.msg}", line_number) from e
            except ValidationError as e:
                first = e.errors()[0]
                field = ".".join(str(p) for p in first["loc"]) or None
                raise ManifestError(first["msg"], line_number, field=field) from e
            records.append(
                EvalRecord(
                    index=len(records),
                    image_path=base / line.image,
                    instruction=line.instruction,
                    category=line.category,
                    truth_kind=line.truth_kind,
                    truth=tuple(line.truth),
                    camera=_resolve_camera(line.camera, base, line_number),
                    record_id=line.id,
                )
            )
    logger.info("Loaded manifest", path=str(path), records=len(records))
    return records


def sample_records(records: Sequence[EvalRecord], n: Optional[int], seed: int) -> List[EvalRecord]:
    """Seeded subset of n records, kept in manifest order; all records if n is None or large."""
    if n is None or n >= len(records):
        return list(records)
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(len(records), size=n, replace=False))
    return [records[int(i)] for i in chosen]


def metric_name(truth_kind: str, bbox_metric: str = "hit") -> str:
    """Name of the metric a truth kind is scored with."""
    if truth_kind == "action":
        return "cosine"
    if truth_kind == "pixel":
        return "normalized_l2"
    return "bbox_hit" if bbox_metric == "hit" else "bbox_center_distance"


def truth_pixel(record: EvalRecord) -> Tuple[float, float]:
    """Target pixel of a pixel or bbox record (the box center for bboxes)."""
    if record.truth_kind == "pixel":
        return (record.truth[0], record.truth[1])
    if record.truth_kind == "bbox":
        x, y, w, h = record.truth
        return (x + w / 2.0, y + h / 2.0)
    raise ValueError("action truths have no pixel")


def truth_action(record: EvalRecord, spec: ActionSpaceSpec) -> Action:
    """
    Reference answer as an action of the evaluated space.

    Pixel and bbox truths map to pixel-space actions; for pickplace the
    non-frozen halves take the target pixel.

    Raises:
        ConfigurationError: If a pixel truth meets a cart3d space
    """
    if record.truth_kind == "action":
        return clamp(spec, spec.action(record.truth))
    if spec.kind is ActionKind.CART3D:
        raise ConfigurationError(
            f"{record.truth_kind} truths need a pixel action space", field="action_space.kind"
        )
    u, v = truth_pixel(record)
    if spec.kind is ActionKind.PICKPLACE:
        values = spec.frozen_value()
        frozen = spec.frozen_mask
        for i, j in ((0, 1), (2, 3)):
            if not (frozen[i] and frozen[j]):
                values[i], values[j] = u, v
        return clamp(spec, spec.action(values))
    return clamp(spec, spec.action((u, v)))


def record_metric(
    record: EvalRecord,
    action: Action,
    spec: ActionSpaceSpec,
    camera: Optional[CameraModel],
    image_size: Tuple[int, int],
    bbox_metric: str = "hit",
) -> float:
    """
    Score a predicted action against a record's truth.

    action truths use cosine similarity of directions, pixel truths the
    normalized L2 distance, bbox truths the hit rate or center distance.
    """
    camera = record.camera or camera
    image_w = image_size[0]
    if record.truth_kind == "action":
        truth = spec.action(record.truth)
        return cosine_metric(
            action_direction(spec, camera, action, image_size),
            action_direction(spec, camera, truth, image_size),
        )
    pred_px = pixel_of(spec, camera, action)
    if record.truth_kind == "pixel":
        return normalized_l2(pred_px, record.truth, image_w)
    hit, center_distance = bbox_metrics(pred_px, record.truth, image_w)  # type: ignore[arg-type]
    if bbox_metric == "hit":
        return 1.0 if hit else 0.0
    return center_distance
