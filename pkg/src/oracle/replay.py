"""
Scripted oracle that replays canned answers in order.
"""

import json
from collections import deque
from pathlib import Path
from typing import Iterable, List

import structlog

from src.errors import ConfigurationError, ScriptExhausted
from src.oracle.base import BaseOracle, SelectionQuery, SelectionResponse
from src.oracle.parsing import ranked_answer

logger = structlog.get_logger(__name__)


def replay_select(query: SelectionQuery, script: deque) -> SelectionResponse:
    """
    Pop the next canned answer and parse it against the query's labels.

    Raises:
        ScriptExhausted: When the script is empty
        SelectionParseError: When the canned answer has no usable label
    """
    if not script:
        raise ScriptExhausted("Replay script has no responses left")
    text = script.popleft()
    ranked = ranked_answer(text, query)
    return SelectionResponse(ranked_labels=tuple(ranked), raw_text=text)


def load_script(path: str) -> List[str]:
    """
    Read a replay script: a JSON list of strings, or one response per line.

    Raises:
        ConfigurationError: If the file is missing or malformed
    """
    script_path = Path(path)
    if not script_path.exists():
        raise ConfigurationError(f"Replay script not found: {path}", field="oracle.replay.script_file")
    content = script_path.read_text(encoding="utf-8")
    if content.lstrip().startswith("["):
        try:
            data = json.loads(content)
        except json.JSONDecodeError as e:
            raise ConfigurationError(
                f"Invalid JSON in {path}: {e.msg}", field="oracle.replay.script_file"
            ) from e
        if not isinstance(data, list) or not all(isinstance(item, str) for item in data):
            raise ConfigurationError(
                "Replay script entries must be strings", field="oracle.replay.script_file"
            )
        return list(data)
    return [line for line in content.splitlines() if line.strip()]


class ReplayOracle(BaseOracle):
    """Serial oracle over a shared queue of canned answers."""

    name = "replay"
    concurrent = False

    def __init__(self, script: Iterable[str]):
        self._script = deque(script)

    @property
    def remaining(self) -> int:
        return len(self._script)

    async def select(self, query: SelectionQuery) -> SelectionResponse:
        return replay_select(query, self._script)
