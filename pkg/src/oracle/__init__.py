"""
Selection oracles: the port the optimizer asks to rank candidate labels.
"""

from src.oracle.base import (
    BaseOracle,
    SelectionOracle,
    SelectionQuery,
    SelectionResponse,
)
from src.oracle.factory import build_oracle
from src.oracle.parsing import extract_labels, parse_selection, ranked_answer
from src.oracle.prompts import (
    IMAGE_MARKER,
    build_prompt,
    build_prompt_segments,
    load_exemplars,
    ranks_worst_first,
)
from src.oracle.remote import RemoteOracle, remote_select
from src.oracle.replay import ReplayOracle, load_script, replay_select
from src.oracle.synthetic import SyntheticOracle, synthetic_select
from src.oracle.text_baseline import (
    BaselineRequest,
    RemoteTextBaseline,
    SyntheticTextBaseline,
    TextBaselineOracle,
    parse_direction,
    parse_region,
    region_center,
    region_of,
)
from src.oracle.throttle import RequestThrottle, ThrottleConfig

__all__ = [
    "IMAGE_MARKER",
    "BaseOracle",
    "BaselineRequest",
    "RemoteOracle",
    "RemoteTextBaseline",
    "ReplayOracle",
    "RequestThrottle",
    "SelectionOracle",
    "SelectionQuery",
    "SelectionResponse",
    "SyntheticOracle",
    "SyntheticTextBaseline",
    "TextBaselineOracle",
    "ThrottleConfig",
    "build_oracle",
    "build_prompt",
    "build_prompt_segments",
    "extract_labels",
    "load_exemplars",
    "load_script",
    "parse_direction",
    "parse_region",
    "parse_selection",
    "ranked_answer",
    "ranks_worst_first",
    "region_center",
    "region_of",
    "remote_select",
    "replay_select",
    "synthetic_select",
]
