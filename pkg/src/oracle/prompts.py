"""
Prompt templates for selection queries.

A prompt is an ordered list of segments: a preamble (rules and answer
format), the image, and the task. Few-shot exemplars follow the preamble.
The image segment renders as "IMG," in plain text; remote clients put the
PNG at that position instead.
"""

import json
from pathlib import Path
from typing import Dict, List, Tuple

from src.errors import ConfigurationError, MissingExemplars
from src.models.config import PromptConfig
from src.oracle.base import SelectionQuery

IMAGE_MARKER = "IMG,"

Segment = Tuple[str, str]

JSON_FORMAT = 'Provide your answer at the end in a json file of this format:\n{"points": []}'

ARROW_FORMAT = "Arrow: [<number>, <number>, etc.]"

DEPTH_LEGEND = (
    "Red means move the arm forward (away from the camera), blue means move the arm "
    "backwards (towards the camera).\n"
    "Smaller circles are further from the camera and thus move the arm forward, larger "
    "circles are closer and thus move the arm backwards."
)


def _keypoint(query: SelectionQuery, cot: bool) -> Dict[str, str]:
    analysis = (
        "Give a one sentence analysis of why you chose those points."
        if cot
        else "Skip analysis."
    )
    preamble = (
        "Your goal is to find the OBJECT in this scene. I have annotated the image with "
        f"numbered circles. Choose the {query.k} numbers that have the most overlap with the "
        "OBJECT. If there are no points with overlap, then don't choose any points. You are a "
        f"five-time world champion in this game. {analysis} {JSON_FORMAT}"
    )
    return {"preamble": preamble, "task": f"OBJECT: {query.instruction}"}


def _navigation(query: SelectionQuery, cot: bool) -> Dict[str, str]:
    answer = (
        "Reason briefly about each candidate and provide your answer at the end in a json "
        "file of this form:"
        if cot
        else "Skip analysis and provide your answer at the end in a json file of this form:"
    )
    # the instruction sits inside the preamble sentence, so there is no task segment
    preamble = (
        "I am a wheeled robot that cannot go over objects. This is the image I'm seeing right "
        "now. I have annotated it with numbered circles. Each number represent a general "
        "direction I can follow. Now you are a five-time world-champion navigation agent and "
        "your task is to tell me which circle I should pick for the task of: "
        f"{query.instruction}? Choose {query.k} best candidate numbers. Do NOT choose routes "
        f'that goes through objects. {answer}\n{{"points": []}}'
    )
    return {"preamble": preamble}


def _manipulation(query: SelectionQuery, cot: bool) -> Dict[str, str]:
    if cot:
        preamble = (
            "Summary: The arrows are actions the robot can take.\n"
            "Reason through the task first and at the end summarize the correct action "
            f"choice(s) with the format, {ARROW_FORMAT}.\n"
            "Description: The robot can only grasp or move objects if the gripper is around "
            "the object and closed on the object.\n"
            f"{DEPTH_LEGEND}\n"
            f"Return at most {query.k} arrows, best first.\n"
            "You must include this summarization."
        )
    else:
        preamble = (
            "Summary: The arrows are actions the robot can take.\n"
            f"{DEPTH_LEGEND}\n"
            f"Return at most {query.k} arrows, best first.\n"
            f"Do not output anything else, direct answer with the format, {ARROW_FORMAT}."
        )
    task = f"Task: What are the best arrows for the robot follow to {query.instruction}?"
    return {"preamble": preamble, "task": task}


def _manipulation_online(query: SelectionQuery, cot: bool) -> Dict[str, str]:
    task = f"What number arrow should the robot follow to {query.instruction}?"
    if not cot:
        return {"preamble": f"Answer with the format, {ARROW_FORMAT}.", "task": task}
    preamble = (
        "Rules:\n"
        "- You are looking at an image of a robot in front of a desk trying to arrange "
        "objects. The robot has an arm and a gripper with yellow fingers.\n"
        "- The arrows in the image represent actions the robot can take.\n"
        "- Red arrows move the arm farther away from the camera, blue arrows move the arm "
        "closer towards the camera.\n"
        "- Smaller circles are further from the camera and thus move the arm farther, larger "
        "circles are closer and thus move the arm backwards.\n"
        "- The robot can only grasp or move objects if the robot gripper is close to the "
        "object and the gripper fingers would stably enclose the object\n"
        "- Your answer must end with a list of candidate arrows which represent the immediate "
        "next action to take (~0.3 seconds). Do not consider future actions between the "
        "immediate next step.\n"
        "- If multiple arrows represent good immediate actions to take, return all candidates "
        "ranked from worst to best.\n"
        f"- A general rule of thumb is to return 1-{query.k} candidates.\n"
        "Instruction: Reason through the task first and at the end summarize the correct "
        f"action choice(s) with the format, {ARROW_FORMAT}."
    )
    return {"preamble": preamble, "task": f"Task: {query.instruction}"}


def _pickplace(query: SelectionQuery, cot: bool) -> Dict[str, str]:
    preamble = (
        "I have annotated the image with numbered markers. Markers that share a number form "
        f"one candidate. Pick at most {query.k} numbers."
    )
    answer = (
        "Reason and express the final answer as 'final answer' followed by a list of the "
        "closest marker numbers."
        if cot
        else "Express only the final answer as 'final answer' followed by a list of the "
        "closest marker numbers."
    )
    return {
        "preamble": preamble,
        "task": f"which number markers are closest to the {query.instruction}? {answer}",
    }


_TEMPLATES = {
    "keypoint": _keypoint,
    "navigation": _navigation,
    "manipulation": _manipulation,
    "manipulation-online": _manipulation_online,
    "pickplace": _pickplace,
}


def ranks_worst_first(query: SelectionQuery) -> bool:
    """Whether the prompt asks for candidates ranked from worst to best."""
    return query.task_kind == "manipulation-online" and query.prompt_style.endswith("cot")


def build_prompt_segments(query: SelectionQuery) -> List[Segment]:
    """
    Ordered (kind, text) segments of the prompt for a query.

    Kinds are "preamble", "exemplar", "image" and "task". Navigation prompts
    name the task inside the preamble and have no task segment. Exemplars
    take the preamble's place in the ordering.

    Raises:
        MissingExemplars: For few-shot styles without exemplars
    """
    few_shot = query.prompt_style.startswith("few-shot")
    cot = query.prompt_style.endswith("cot")
    if few_shot and not query.exemplars:
        raise MissingExemplars(f"{query.prompt_style} prompts need at least one exemplar")

    parts = _TEMPLATES[query.task_kind](query, cot)
    segments: List[Segment] = []
    for kind in query.ordering:
        if kind == "image":
            segments.append(("image", IMAGE_MARKER))
            continue
        if kind in parts:
            segments.append((kind, parts[kind]))
        if kind == "preamble" and few_shot:
            segments.extend(("exemplar", text) for text in query.exemplars)
    return segments


def build_prompt(query: SelectionQuery) -> str:
    """Full prompt text with the image position marked as "IMG,"."""
    return "\n".join(text for _, text in build_prompt_segments(query))


EXEMPLAR_SEPARATOR = "---"


def load_exemplars(prompt: PromptConfig) -> Tuple[str, ...]:
    """
    Inline exemplars followed by those read from prompt.exemplars_file.

    The file is either a JSON list of strings or plain text with exemplars
    separated by lines holding only "---".

    Raises:
        ConfigurationError: If the file is missing or malformed
    """
    exemplars = list(prompt.exemplars)
    if not prompt.exemplars_file:
        return tuple(exemplars)
    path = Path(prompt.exemplars_file)
    if not path.exists():
        raise ConfigurationError(
            f"Exemplars file not found: {path}", field="prompt.exemplars_file"
        )
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(
                f"Invalid JSON in {path}: {e.msg}", field="prompt.exemplars_file"
            ) from e
        if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
            raise ConfigurationError(
                "Exemplars file must hold a list of strings", field="prompt.exemplars_file"
            )
        exemplars.extend(data)
    else:
        block: List[str] = []
        for line in text.splitlines() + [EXEMPLAR_SEPARATOR]:
            if line.strip() == EXEMPLAR_SEPARATOR:
                if "".join(block).strip():
                    exemplars.append("\n".join(block).strip())
                block = []
            else:
                block.append(line)
    return tuple(exemplars)
