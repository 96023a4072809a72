"""
Selection oracle port and its query/response types.
"""

from dataclasses import dataclass
from typing import Optional, Protocol, Tuple, runtime_checkable

from src.action_space.spaces import Action, ActionSpaceSpec
from src.annotate.renderer import AnnotatedImage
from src.models.config import PROMPT_SEGMENTS

TASK_KINDS = ("navigation", "manipulation", "manipulation-online", "keypoint", "pickplace")
PROMPT_STYLES = ("zero-shot-cot", "zero-shot-direct", "few-shot-cot", "few-shot-direct")


@dataclass(frozen=True)
class SelectionQuery:
    """
    One question to a selection oracle.

    Attributes:
        annotated: Image with numbered candidates
        instruction: Task text
        k: Number of labels requested
        prompt_style: Template family
        ordering: Order of the preamble, image and task segments
        task_kind: Template task family
        exemplars: Few-shot exemplar texts, inserted verbatim
        spec: Action space of the labeled actions
        truth: Reference answer known to evaluation harnesses; only
            synthetic oracles read it
    """

    annotated: AnnotatedImage
    instruction: str
    k: int = 3
    prompt_style: str = "zero-shot-cot"
    ordering: Tuple[str, ...] = PROMPT_SEGMENTS
    task_kind: str = "navigation"
    exemplars: Tuple[str, ...] = ()
    spec: Optional[ActionSpaceSpec] = None
    truth: Optional[Action] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "ordering", tuple(self.ordering))
        object.__setattr__(self, "exemplars", tuple(self.exemplars))
        labels = len(self.annotated.label_ids)
        if self.k < 1 or self.k > labels:
            raise ValueError(f"k={self.k} must be in [1, {labels}]")
        if self.task_kind not in TASK_KINDS:
            raise ValueError(f"Unknown task kind: {self.task_kind}")
        if self.prompt_style not in PROMPT_STYLES:
            raise ValueError(f"Unknown prompt style: {self.prompt_style}")
        if sorted(self.ordering) != sorted(PROMPT_SEGMENTS):
            raise ValueError(f"ordering must be a permutation of {PROMPT_SEGMENTS}")

    @property
    def valid_labels(self) -> Tuple[int, ...]:
        return tuple(self.annotated.label_ids)


@dataclass(frozen=True)
class SelectionResponse:
    """Ranked labels, best first, plus the oracle's full text."""

    ranked_labels: Tuple[int, ...]
    raw_text: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranked_labels", tuple(int(x) for x in self.ranked_labels))
        if len(set(self.ranked_labels)) != len(self.ranked_labels):
            raise ValueError(f"Duplicate labels in {self.ranked_labels}")


@runtime_checkable
class SelectionOracle(Protocol):
    """
    Anything that ranks the labels of an annotated image.

    concurrent: True when forks of this oracle may be queried concurrently;
    False makes the engine run parallel instances one after another.
    """

    name: str
    concurrent: bool

    async def select(self, query: SelectionQuery) -> SelectionResponse:
        ...

    def fork(self, seed: int) -> "SelectionOracle":
        ...


class BaseOracle:
    """Shared defaults: forks are the oracle itself."""

    name = "base"
    concurrent = False

    def fork(self, seed: int) -> "BaseOracle":
        return self

    async def aclose(self) -> None:
        """Release network resources, if any."""
