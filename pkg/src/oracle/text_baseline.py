"""
Text-only baseline oracles.

The oracle sees the raw image without candidate markers and answers with a
name instead of a label:

- region mode: one of nine regions of a 3x3 image grid, mapped to the
  region center pixel
- direction mode: a named Cartesian direction, mapped to a fixed-length
  cart3d displacement
"""

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import structlog

from src.action_space.camera import CameraModel
from src.action_space.geometry import pixel_of
from src.action_space.spaces import Action, ActionKind, ActionSpaceSpec, clamp
from src.errors import ConfigurationError, OracleError, Unparseable
from src.oracle.base import BaseOracle
from src.oracle.prompts import IMAGE_MARKER, Segment
from src.oracle.remote import RemoteOracle

logger = structlog.get_logger(__name__)

ROWS = ("top", "middle", "bottom")
COLUMNS = ("left", "center", "right")


def _region_name(row: int, col: int) -> str:
    if row == 1 and col == 1:
        return "center"
    if row == 1:
        return f"middle {COLUMNS[col]}"
    return f"{ROWS[row]} {COLUMNS[col]}"


REGIONS: Dict[str, Tuple[int, int]] = {
    _region_name(r, c): (r, c) for r in range(3) for c in range(3)
}

DIRECTION_VECTORS: Dict[str, Tuple[float, float, float]] = {
    "right": (1.0, 0.0, 0.0),
    "left": (-1.0, 0.0, 0.0),
    "forward": (0.0, 1.0, 0.0),
    "backward": (0.0, -1.0, 0.0),
    "up": (0.0, 0.0, 1.0),
    "down": (0.0, 0.0, -1.0),
}


@dataclass(frozen=True)
class BaselineRequest:
    """What a text-only oracle is asked about."""

    image: np.ndarray
    instruction: str
    spec: ActionSpaceSpec
    camera: Optional[CameraModel] = None
    truth: Optional[Action] = None

    @property
    def image_size(self) -> Tuple[int, int]:
        return (self.image.shape[1], self.image.shape[0])


def region_of(pixel: Tuple[float, float], image_size: Tuple[int, int]) -> str:
    """Name of the 3x3 grid region containing a pixel (clipped to the image)."""
    width, height = image_size
    col = int(np.clip(np.floor(3.0 * pixel[0] / width), 0, 2))
    row = int(np.clip(np.floor(3.0 * pixel[1] / height), 0, 2))
    return _region_name(row, col)


def region_center(name: str, image_size: Tuple[int, int]) -> Tuple[float, float]:
    """Center pixel of a named region."""
    width, height = image_size
    row, col = REGIONS[name]
    return ((col + 0.5) * width / 3.0, (row + 0.5) * height / 3.0)


def _last_mention(text: str, names: List[str]) -> Optional[str]:
    ordered = sorted(names, key=len, reverse=True)
    pattern = r"\b(" + "|".join(re.escape(n) for n in ordered) + r")\b"
    matches = re.findall(pattern, text.lower())
    return matches[-1] if matches else None


def parse_region(text: str) -> str:
    """Last region name mentioned in the text."""
    name = _last_mention(text, list(REGIONS))
    if name is None:
        raise Unparseable(text)
    return name


def parse_direction(text: str) -> str:
    """Last direction name mentioned in the text."""
    name = _last_mention(text, list(DIRECTION_VECTORS))
    if name is None:
        raise Unparseable(text)
    return name


def baseline_segments(mode: str, instruction: str) -> List[Segment]:
    """Prompt segments for the text-only baseline."""
    if mode == "region":
        options = ", ".join(REGIONS)
        preamble = (
            "The image is split into 3 rows and 3 columns. Name the single region that best "
            f"answers the task. Choose one of: {options}. End your answer with the region name."
        )
    else:
        options = ", ".join(DIRECTION_VECTORS)
        preamble = (
            "The robot can move its arm one step in a named direction. Choose one of: "
            f"{options}. End your answer with the direction name."
        )
    return [("preamble", preamble), ("image", IMAGE_MARKER), ("task", f"Task: {instruction}")]


def answer_to_action(mode: str, text: str, request: BaselineRequest, direction_step: float) -> Action:
    """
    Map a baseline answer to an action of the request's space.

    Raises:
        Unparseable: When the text names no region/direction
        ConfigurationError: When the mode does not fit the action space
    """
    spec = request.spec
    if mode == "region":
        if spec.kind is ActionKind.CART3D:
            raise ConfigurationError(
                "region baseline needs a pixel action space", field="oracle.text_baseline.mode"
            )
        u, v = region_center(parse_region(text), request.image_size)
        if spec.kind is ActionKind.PICKPLACE:
            values = spec.frozen_value()
            frozen = spec.frozen_mask
            for i, j in ((0, 1), (2, 3)):
                if not (frozen[i] and frozen[j]):
                    values[i], values[j] = u, v
            return clamp(spec, spec.action(values))
        return clamp(spec, spec.action((u, v)))

    if spec.kind is not ActionKind.CART3D:
        raise ConfigurationError(
            "direction baseline needs a cart3d action space", field="oracle.text_baseline.mode"
        )
    vector = np.asarray(DIRECTION_VECTORS[parse_direction(text)]) * direction_step
    return clamp(spec, spec.action(vector))


class TextBaselineOracle(BaseOracle):
    """Base class of text-only oracles; answer() returns free text."""

    name = "text-baseline"
    concurrent = True

    def __init__(self, mode: str = "region", direction_step: float = 0.1):
        if mode not in ("region", "direction"):
            raise ConfigurationError(f"Unknown baseline mode: {mode}", field="oracle.text_baseline.mode")
        self.mode = mode
        self.direction_step = direction_step

    async def answer(self, request: BaselineRequest) -> str:
        raise NotImplementedError

    async def choose(self, request: BaselineRequest) -> Tuple[Action, str]:
        """Ask for a region or direction and map it to an action."""
        text = await self.answer(request)
        return answer_to_action(self.mode, text, request, self.direction_step), text


class SyntheticTextBaseline(TextBaselineOracle):
    """Names the region or dominant direction of the hidden truth, with optional noise."""

    def __init__(
        self,
        mode: str = "region",
        noise_sigma: float = 0.0,
        seed: int = 0,
        direction_step: float = 0.1,
    ):
        super().__init__(mode, direction_step)
        self.noise_sigma = noise_sigma
        self.seed = seed
        self._rng = np.random.default_rng(seed)

    def fork(self, seed: int) -> "SyntheticTextBaseline":
        return SyntheticTextBaseline(self.mode, self.noise_sigma, seed, self.direction_step)

    async def answer(self, request: BaselineRequest) -> str:
        if request.truth is None:
            raise OracleError("Synthetic baseline needs a hidden truth")
        spec = request.spec
        if self.mode == "region":
            u, v = pixel_of(spec, request.camera, request.truth)
            noise = self._rng.standard_normal(2) * self.noise_sigma * request.image_size[0]
            return f"The target is in the {region_of((u + noise[0], v + noise[1]), request.image_size)}."

        displacement = request.truth.as_array().copy()
        displacement += self._rng.standard_normal(displacement.size) * self.noise_sigma * spec.max_extent
        displacement[spec.frozen_mask] = 0.0
        axis = int(np.argmax(np.abs(displacement)))
        positive = displacement[axis] >= 0
        names = [("right", "left"), ("forward", "backward"), ("up", "down")][axis]
        return f"Move {names[0] if positive else names[1]}."


class RemoteTextBaseline(TextBaselineOracle):
    """Asks a remote VLM for a region or direction name."""

    def __init__(self, remote: RemoteOracle, mode: str = "region", direction_step: float = 0.1):
        super().__init__(mode, direction_step)
        self.remote = remote

    async def aclose(self) -> None:
        await self.remote.aclose()

    async def answer(self, request: BaselineRequest) -> str:
        return await self.remote.complete(
            baseline_segments(self.mode, request.instruction), request.image
        )
