"""
Parsing of oracle answers into ranked labels.

Three answer formats are recognized, in priority order:

1. a JSON object with a "points" array, e.g. {"points": [3, 5]}
2. an arrow summary, e.g. Arrow: [5, 10]
3. a "final answer" list, e.g. final answer [2, 7]

Within a format the LAST occurrence wins, since chain-of-thought answers
may mention label numbers before their final summary.

The points object is decoded as JSON; only integer entries count as labels,
so decimals, strings, booleans and nested objects are never read as labels.
Negative integers are kept as raw labels and removed by the rendered-label
filter like any other invented label.
"""

import json
import re
from typing import Any, Iterable, List, Optional

import structlog

from src.errors import EmptyAfterFilter, Unparseable
from src.oracle.base import SelectionQuery
from src.oracle.prompts import ranks_worst_first

logger = structlog.get_logger(__name__)

_DECODER = json.JSONDecoder()
_ARROW = re.compile(r"arrows?\s*:\s*\[([^\[\]]*)\]", re.IGNORECASE)
# separator may not swallow the sign of a negative label
_FINAL = re.compile(
    r"final\s+answer(?:\s+is)?(?:[^\w-]|-(?!\d)){0,10}\[?\s*((?:-?\d+(?:\.\d+)?\s*,?\s*(?:and\s+)?)+)",
    re.IGNORECASE,
)
_INTEGER = re.compile(r"(?<![\d.])-?\d+(?![\d.])")
_TRAILING_COMMA = re.compile(r",\s*([\]}])")


def _decode_object(text: str, start: int) -> Optional[Any]:
    """JSON value starting at text[start], tolerating single quotes and trailing commas."""
    try:
        return _DECODER.raw_decode(text, start)[0]
    except json.JSONDecodeError:
        pass
    repaired = _TRAILING_COMMA.sub(r"\1", text[start:].replace("'", '"'))
    try:
        return _DECODER.raw_decode(repaired)[0]
    except json.JSONDecodeError:
        return None


def _last_points(text: str) -> Optional[List[Any]]:
    """Points array of the last JSON object that has one."""
    found: Optional[List[Any]] = None
    for match in re.finditer(r"\{", text):
        value = _decode_object(text, match.start())
        if isinstance(value, dict) and isinstance(value.get("points"), list):
            found = value["points"]
    return found


def _integer_labels(points: List[Any]) -> List[int]:
    return [p for p in points if isinstance(p, int) and not isinstance(p, bool)]


def extract_labels(raw_text: str) -> List[int]:
    """
    Raw label numbers from the answer block, unfiltered.

    Raises:
        Unparseable: When no answer block is present
    """
    text = raw_text or ""
    points = _last_points(text)
    if points is not None:
        return _integer_labels(points)
    for pattern in (_ARROW, _FINAL):
        matches = pattern.findall(text)
        if matches:
            return [int(x) for x in _INTEGER.findall(matches[-1])]
    raise Unparseable(text)


def parse_selection(raw_text: str, valid_labels: Iterable[int]) -> List[int]:
    """
    Ranked, filtered, duplicate-free labels from an oracle answer.

    Args:
        raw_text: Full oracle text
        valid_labels: Labels that were actually rendered

    Returns:
        Labels in stated order, restricted to valid_labels, first occurrence kept

    Raises:
        Unparseable: When no answer block is present
        EmptyAfterFilter: When no valid label survives filtering
    """
    raw_labels = extract_labels(raw_text)
    valid = set(valid_labels)
    ranked: List[int] = []
    for label in raw_labels:
        if label in valid and label not in ranked:
            ranked.append(label)
    if not ranked:
        raise EmptyAfterFilter(raw_text, raw_labels)
    if len(ranked) != len(raw_labels):
        logger.debug("Filtered oracle labels", raw=raw_labels, kept=ranked)
    return ranked


def ranked_answer(raw_text: str, query: SelectionQuery) -> List[int]:
    """
    Best-first labels from an answer to the query's prompt.

    Prompts that ask for a worst-to-best ranking have their order flipped.
    """
    ranked = parse_selection(raw_text, query.valid_labels)
    if ranks_worst_first(query):
        ranked.reverse()
    return ranked
