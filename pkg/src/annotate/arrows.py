"""
Procedural arrow-robustness datasets.

Two variants probe how well an oracle reads arrow annotations:

- blank-background: one arrow on a white canvas; the answer is its diagonal
  direction class.
- object-referential: four objects around the center and four numbered
  arrows, one per object; the answer is the number of the arrow pointing at
  the named target object.
"""

import itertools
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import cv2
import numpy as np
import structlog

from src.annotate.io import as_rgb, blank_image, write_image
from src.errors import ImageIOError

logger = structlog.get_logger(__name__)

RGB = Tuple[int, int, int]

ARROW_COLORS: Dict[str, RGB] = {
    "red": (230, 25, 25),
    "orange": (245, 130, 20),
    "yellow": (240, 210, 0),
    "green": (30, 170, 60),
    "blue": (30, 80, 230),
    "purple": (140, 50, 190),
}

# Unit image-space directions; image y grows downward
DIRECTIONS: Dict[str, Tuple[float, float]] = {
    "up+right": (1.0, -1.0),
    "down+right": (1.0, 1.0),
    "up+left": (-1.0, -1.0),
    "down+left": (-1.0, 1.0),
}

DIRECTION_PHRASES: Dict[str, str] = {
    "up+right": "up and to the right",
    "down+right": "down and to the right",
    "up+left": "up and to the left",
    "down+left": "down and to the left",
}

# (name, shape) per difficulty tier, drawn in neutral gray so only shape identifies them
SCENE_OBJECTS: Sequence[Tuple[str, str]] = (
    ("box", "square"),
    ("cup", "circle"),
    ("hanger", "triangle"),
    ("brush", "bar"),
)

BLANK = "blank-background"
OBJECT_REFERENTIAL = "object-referential"


@dataclass
class ArrowGrid:
    """Parameter grid; the dataset is the cartesian product of all four axes."""

    colors: List[str] = field(default_factory=lambda: list(ARROW_COLORS))
    thicknesses: List[int] = field(default_factory=lambda: [2, 4, 6])
    arrowhead_ratios: List[float] = field(default_factory=lambda: [0.1, 0.3, 0.5])
    directions: List[str] = field(default_factory=lambda: list(DIRECTIONS))

    def __post_init__(self) -> None:
        unknown = [c for c in self.colors if c not in ARROW_COLORS]
        unknown += [d for d in self.directions if d not in DIRECTIONS]
        if unknown:
            raise ValueError(f"Unknown grid values: {unknown}")

    def cells(self):
        return itertools.product(
            self.colors, self.thicknesses, self.arrowhead_ratios, self.directions
        )


@dataclass
class ArrowSample:
    """One generated image with its query and ground-truth answer."""

    image: np.ndarray
    query: str
    answer: str
    color: str
    thickness: int
    arrowhead_ratio: float
    direction: str
    target: Optional[str] = None


def _blank_query() -> str:
    options = ", ".join(DIRECTION_PHRASES.values())
    return f"In which direction does the arrow point? Answer with one of: {options}."


def _draw_object(canvas: np.ndarray, center: Tuple[int, int], shape: str, size: int) -> None:
    gray = (90, 90, 90)
    x, y = center
    if shape == "square":
        cv2.rectangle(canvas, (x - size, y - size), (x + size, y + size), gray, -1)
    elif shape == "circle":
        cv2.circle(canvas, center, size, gray, -1)
    elif shape == "triangle":
        points = np.array([[x, y - size], [x - size, y + size], [x + size, y + size]], np.int32)
        cv2.fillPoly(canvas, [points], gray)
    else:
        cv2.rectangle(canvas, (x - size, y - size // 4), (x + size, y + size // 4), gray, -1)


def _blank_sample(
    color: str, thickness: int, ratio: float, direction: str, size: int, rng: np.random.Generator
) -> ArrowSample:
    canvas = blank_image(size, size)
    dx, dy = DIRECTIONS[direction]
    length = size * rng.uniform(0.25, 0.4)
    offset = rng.uniform(-0.1, 0.1, size=2) * size
    start = np.array([size / 2.0, size / 2.0]) + offset - 0.5 * length * np.array([dx, dy]) / np.sqrt(2)
    end = start + length * np.array([dx, dy]) / np.sqrt(2)
    cv2.arrowedLine(
        canvas,
        (int(round(start[0])), int(round(start[1]))),
        (int(round(end[0])), int(round(end[1]))),
        ARROW_COLORS[color],
        thickness=thickness,
        line_type=cv2.LINE_AA,
        tipLength=ratio,
    )
    return ArrowSample(
        image=canvas,
        query=_blank_query(),
        answer=DIRECTION_PHRASES[direction],
        color=color,
        thickness=thickness,
        arrowhead_ratio=ratio,
        direction=direction,
    )


def _referential_sample(
    color: str,
    thickness: int,
    ratio: float,
    direction: str,
    size: int,
    rng: np.random.Generator,
    background: Optional[np.ndarray],
) -> ArrowSample:
    if background is not None:
        canvas = cv2.resize(as_rgb(background), (size, size), interpolation=cv2.INTER_AREA)
    else:
        canvas = blank_image(size, size)

    center = np.array([size / 2.0, size / 2.0])
    radius = size * 0.36
    object_size = max(4, size // 16)
    placement = rng.permutation(len(SCENE_OBJECTS))
    numbers = rng.permutation(len(DIRECTIONS)) + 1

    target_name = ""
    answer = 0
    for slot, name in enumerate(DIRECTIONS):
        dx, dy = DIRECTIONS[name]
        unit = np.array([dx, dy]) / np.sqrt(2)
        object_center = center + radius * unit
        object_name, shape = SCENE_OBJECTS[placement[slot]]
        _draw_object(canvas, (int(object_center[0]), int(object_center[1])), shape, object_size)

        start = center + 0.12 * size * unit
        end = center + (radius - 2.0 * object_size) * unit
        cv2.arrowedLine(
            canvas,
            (int(round(start[0])), int(round(start[1]))),
            (int(round(end[0])), int(round(end[1]))),
            ARROW_COLORS[color],
            thickness=thickness,
            line_type=cv2.LINE_AA,
            tipLength=ratio,
        )
        label_at = (int(round(start[0] - 6)), int(round(start[1] + 6)))
        cv2.putText(
            canvas, str(int(numbers[slot])), label_at, cv2.FONT_HERSHEY_SIMPLEX, 0.5, (0, 0, 0), 1
        )
        if name == direction:
            target_name = object_name
            answer = int(numbers[slot])

    query = (
        f"Which numbered arrow points at the {target_name}? "
        "Answer with the arrow number only."
    )
    return ArrowSample(
        image=canvas,
        query=query,
        answer=str(answer),
        color=color,
        thickness=thickness,
        arrowhead_ratio=ratio,
        direction=direction,
        target=target_name,
    )


def gen_arrow_dataset(
    grid: ArrowGrid,
    mode: str = BLANK,
    seed: int = 0,
    image_size: int = 256,
    background: Optional[np.ndarray] = None,
) -> List[ArrowSample]:
    """
    Generate the arrow-robustness dataset for a parameter grid.

    Args:
        grid: Color x thickness x arrowhead ratio x direction grid
        mode: "blank-background" or "object-referential"
        seed: RNG seed; identical seeds give identical images
        image_size: Square canvas side in pixels
        background: Optional scene image for object-referential mode

    Returns:
        One ArrowSample per grid cell, in grid order
    """
    if mode not in (BLANK, OBJECT_REFERENTIAL):
        raise ValueError(f"Unknown arrow dataset mode: {mode}")
    rng = np.random.default_rng(seed)
    samples: List[ArrowSample] = []
    for color, thickness, ratio, direction in grid.cells():
        if mode == BLANK:
            samples.append(_blank_sample(color, thickness, ratio, direction, image_size, rng))
        else:
            samples.append(
                _referential_sample(
                    color, thickness, ratio, direction, image_size, rng, background
                )
            )
    logger.info("Generated arrow dataset", mode=mode, samples=len(samples), seed=seed)
    return samples


def write_arrow_dataset(samples: Sequence[ArrowSample], out_dir: str) -> Path:
    """
    Write samples as PNGs plus a manifest.jsonl.

    Each manifest line holds image (relative path), query, answer and the
    style parameters of the sample.

    Returns:
        Path of the written manifest

    Raises:
        ImageIOError: If the directory or a file cannot be written
    """
    root = Path(out_dir)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ImageIOError(f"Could not create output directory ({e.strerror})", str(root)) from e

    manifest = root / "manifest.jsonl"
    lines = []
    for index, sample in enumerate(samples):
        name = f"arrow_{index:04d}.png"
        write_image(root / name, sample.image)
        record = {k: v for k, v in asdict(sample).items() if k != "image"}
        record["image"] = name
        lines.append(json.dumps(record, sort_keys=True))
    try:
        manifest.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    except OSError as e:
        raise ImageIOError(f"Could not write manifest ({e.strerror})", str(manifest)) from e
    logger.info("Wrote arrow dataset", path=str(root), samples=len(samples))
    return manifest
