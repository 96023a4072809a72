"""
Tests for prompts, answer parsing and the selection oracles.
"""

import json
from pathlib import Path

import httpx
import numpy as np
import pytest


def _annotated(spec, points):
    from src.action_space import ArrowGeometry
    from src.annotate import AnnotatedImage

    labels = {i: spec.action(p) for i, p in enumerate(points, start=1)}
    geometries = [
        ArrowGeometry(start_px=tuple(p), end_px=tuple(p), depth=0.0, label_id=i)
        for i, p in enumerate(points, start=1)
    ]
    pixels = np.full((480, 640, 3), 128, dtype=np.uint8)
    return AnnotatedImage(pixels=pixels, labels=labels, geometries=geometries)


def _query(spec, count=10, **kwargs):
    from src.oracle import SelectionQuery

    points = [(30.0 + 50.0 * i, 200.0) for i in range(count)]
    kwargs.setdefault("instruction", "the blue mug")
    return SelectionQuery(annotated=_annotated(spec, points), spec=spec, **kwargs)


class TestSelectionQuery:
    """Tests for query validation."""

    def test_k_bounds(self, nav2d_spec):
        """k must lie within the number of rendered labels."""
        with pytest.raises(ValueError):
            _query(nav2d_spec, count=3, k=4)
        with pytest.raises(ValueError):
            _query(nav2d_spec, count=3, k=0)

    def test_bad_ordering(self, nav2d_spec):
        """Orderings must permute the three segments."""
        with pytest.raises(ValueError):
            _query(nav2d_spec, ordering=("preamble", "task"))

    def test_duplicate_response_labels(self):
        """Responses never rank a label twice."""
        from src.oracle import SelectionResponse

        with pytest.raises(ValueError):
            SelectionResponse(ranked_labels=(1, 1))


class TestPrompts:
    """Tests for prompt construction."""

    def test_keypoint_zero_shot(self, keypoint_spec):
        """Keypoint prompts ask for a JSON answer and name the object."""
        from src.oracle import build_prompt

        prompt = build_prompt(_query(keypoint_spec, task_kind="keypoint", k=3))
        assert "Provide your answer at the end in a json file" in prompt
        assert "Choose the 3 numbers" in prompt
        assert "OBJECT: the blue mug" in prompt
        assert "IMG," in prompt

    def test_navigation_k(self, nav2d_spec):
        """Navigation prompts state K."""
        from src.oracle import build_prompt

        prompt = build_prompt(_query(nav2d_spec, k=2))
        assert "Choose 2 best candidate numbers" in prompt
        assert '{"points": []}' in prompt

    def test_manipulation_depth_legend(self, nav2d_spec):
        """Manipulation prompts explain the depth colors and arrow format."""
        from src.oracle import build_prompt

        prompt = build_prompt(_query(nav2d_spec, task_kind="manipulation"))
        assert "Red means move the arm forward" in prompt
        assert "Arrow: [<number>, <number>, etc.]" in prompt

    def test_direct_styles_skip_reasoning(self, nav2d_spec):
        """Direct prompts ask for no analysis."""
        from src.oracle import build_prompt

        cot = build_prompt(_query(nav2d_spec, task_kind="keypoint"))
        direct = build_prompt(
            _query(nav2d_spec, task_kind="keypoint", prompt_style="zero-shot-direct")
        )
        assert "one sentence analysis" in cot
        assert "Skip analysis." in direct

    def test_ordering(self, nav2d_spec):
        """Segments follow the configured order."""
        from src.oracle import build_prompt_segments

        segments = build_prompt_segments(
            _query(nav2d_spec, task_kind="manipulation", ordering=("task", "image", "preamble"))
        )
        assert [kind for kind, _ in segments] == ["task", "image", "preamble"]
        assert segments[1] == ("image", "IMG,")

    def test_few_shot_exemplars_follow_preamble(self, nav2d_spec):
        """Exemplars are inserted verbatim after the preamble."""
        from src.oracle import build_prompt_segments

        segments = build_prompt_segments(
            _query(
                nav2d_spec,
                task_kind="manipulation",
                prompt_style="few-shot-cot",
                exemplars=("first", "second"),
            )
        )
        kinds = [kind for kind, _ in segments]
        assert kinds == ["preamble", "exemplar", "exemplar", "image", "task"]
        assert segments[1][1] == "first"

    def test_few_shot_needs_exemplars(self, nav2d_spec):
        """Few-shot styles without exemplars fail."""
        from src.errors import MissingExemplars
        from src.oracle import build_prompt

        with pytest.raises(MissingExemplars):
            build_prompt(_query(nav2d_spec, prompt_style="few-shot-direct"))

    def test_navigation_names_task_inline(self, nav2d_spec):
        """The navigation instruction sits inside the preamble sentence."""
        from src.oracle import build_prompt_segments

        segments = build_prompt_segments(_query(nav2d_spec, k=2, prompt_style="zero-shot-direct"))
        assert [kind for kind, _ in segments] == ["preamble", "image"]
        assert (
            "which circle I should pick for the task of: the blue mug? "
            "Choose 2 best candidate numbers." in segments[0][1]
        )
        assert "Skip analysis and provide your answer at the end in a json file" in segments[0][1]

    def test_manipulation_online_direct(self, nav2d_spec):
        """The direct online prompt asks a single question."""
        from src.oracle import build_prompt

        prompt = build_prompt(
            _query(
                nav2d_spec,
                instruction="pick up the string cheese",
                task_kind="manipulation-online",
                prompt_style="zero-shot-direct",
            )
        )
        assert "What number arrow should the robot follow to pick up the string cheese?" in prompt
        assert "Arrow: [<number>, <number>, etc.]" in prompt
        assert "Rules:" not in prompt

    def test_manipulation_online_rules(self, nav2d_spec):
        """The reasoning online prompt carries the rule list and the task line."""
        from src.oracle import build_prompt

        prompt = build_prompt(
            _query(
                nav2d_spec,
                instruction="erase the whiteboard",
                task_kind="manipulation-online",
                k=4,
            )
        )
        assert prompt.startswith("Rules:\n")
        assert (
            "- Red arrows move the arm farther away from the camera, blue arrows move the arm "
            "closer towards the camera." in prompt
        )
        assert (
            "- If multiple arrows represent good immediate actions to take, return all "
            "candidates ranked from worst to best." in prompt
        )
        assert "- A general rule of thumb is to return 1-4 candidates." in prompt
        assert (
            "Instruction: Reason through the task first and at the end summarize the correct "
            "action choice(s) with the format, Arrow: [<number>, <number>, etc.]." in prompt
        )
        assert prompt.endswith("Task: erase the whiteboard")

    def test_online_task_kind_is_configurable(self):
        """The online variant is selectable from the [prompt] section."""
        from src.models.config import PromptConfig

        assert PromptConfig(task_kind="manipulation-online").task_kind == "manipulation-online"


class TestLoadExemplars:
    """Tests for load_exemplars."""

    def test_inline_and_text_file(self, tmp_path):
        """Inline exemplars come first, then '---' separated blocks."""
        from src.models.config import PromptConfig
        from src.oracle import load_exemplars

        path = tmp_path / "shots.txt"
        path.write_text("Image 1: arrow 3\n---\nImage 2: arrow 7\n---\n")
        exemplars = load_exemplars(PromptConfig(exemplars=["inline"], exemplars_file=str(path)))
        assert exemplars == ("inline", "Image 1: arrow 3", "Image 2: arrow 7")

    def test_json_file(self, tmp_path):
        """JSON files hold a list of strings."""
        from src.models.config import PromptConfig
        from src.oracle import load_exemplars

        path = tmp_path / "shots.json"
        path.write_text(json.dumps(["a", "b"]))
        assert load_exemplars(PromptConfig(exemplars_file=str(path))) == ("a", "b")

    def test_missing_file(self, tmp_path):
        """A missing file is a configuration error."""
        from src.errors import ConfigurationError
        from src.models.config import PromptConfig
        from src.oracle import load_exemplars

        with pytest.raises(ConfigurationError) as exc_info:
            load_exemplars(PromptConfig(exemplars_file=str(tmp_path / "none.txt")))
        assert exc_info.value.field == "prompt.exemplars_file"


def _parser_corpus():
    path = Path(__file__).parent / "fixtures" / "parser_corpus.json"
    cases = json.loads(path.read_text(encoding="utf-8"))
    return [pytest.param(case, id=f"case{i:02d}") for i, case in enumerate(cases)]


class TestParsing:
    """Tests for parse_selection."""

    VALID = range(1, 11)

    @pytest.mark.parametrize("case", _parser_corpus())
    def test_corpus(self, case):
        """Answer formats, last-occurrence and filtering rules over the answer corpus."""
        from src import errors
        from src.oracle import parse_selection

        if "error" in case:
            with pytest.raises(getattr(errors, case["error"])):
                parse_selection(case["text"], self.VALID)
        else:
            assert parse_selection(case["text"], self.VALID) == case["labels"]

    def test_corpus_size(self):
        """The corpus covers every format with both outcomes."""
        cases = [param.values[0] for param in _parser_corpus()]
        assert len(cases) >= 50
        assert any("error" in case for case in cases)

    def test_unparseable(self):
        """Prose without an answer block."""
        from src.errors import Unparseable
        from src.oracle import parse_selection

        with pytest.raises(Unparseable):
            parse_selection("I am not sure which one to pick.", self.VALID)

    def test_empty_after_filter(self):
        """Only unrendered labels."""
        from src.errors import EmptyAfterFilter
        from src.oracle import parse_selection

        with pytest.raises(EmptyAfterFilter) as exc_info:
            parse_selection('{"points": [42]}', self.VALID)
        assert exc_info.value.raw_labels == [42]

    def test_extract_keeps_invalid(self):
        """extract_labels does not filter."""
        from src.oracle import extract_labels

        assert extract_labels("Arrows: [11, 2, 11]") == [11, 2, 11]

    def test_negative_label_keeps_sign(self):
        """A negative label is never read as its absolute value."""
        from src.errors import EmptyAfterFilter
        from src.oracle import extract_labels, parse_selection

        assert extract_labels('{"points": [-3]}') == [-3]
        assert extract_labels("Arrow: [-3, 4]") == [-3, 4]
        assert extract_labels("final answer: [-1, 2]") == [-1, 2]
        with pytest.raises(EmptyAfterFilter) as exc_info:
            parse_selection('{"points": [-3]}', self.VALID)
        assert exc_info.value.raw_labels == [-3]

    def test_non_integer_points_skipped(self):
        """Decimals, booleans and strings in the points array are not labels."""
        from src.oracle import extract_labels

        assert extract_labels('{"points": [2.5, 4]}') == [4]
        assert extract_labels('{"points": [true, "3", 5]}') == [5]

    def test_nested_objects_are_not_labels(self):
        """Numbers inside nested objects never become labels."""
        from src.errors import EmptyAfterFilter
        from src.oracle import extract_labels, parse_selection

        text = '{"points": [{"label": 3}, {"label": 5}]}'
        assert extract_labels(text) == []
        with pytest.raises(EmptyAfterFilter):
            parse_selection(text, self.VALID)
        assert extract_labels('{"answer": {"points": [4, 8]}}') == [4, 8]

    def test_truncated_object_falls_back(self):
        """A cut-off points object leaves the arrow summary in charge."""
        from src.errors import Unparseable
        from src.oracle import parse_selection

        assert parse_selection('Arrow: [9]. {"points": [3', self.VALID) == [9]
        with pytest.raises(Unparseable):
            parse_selection('{"points": [3, 5', self.VALID)


class TestSyntheticOracle:
    """Tests for the synthetic oracle."""

    def test_matches_brute_force_sort(self, nav2d_spec):
        """Zero noise ranks labels by distance to the truth."""
        from src.oracle import synthetic_select

        query = _query(nav2d_spec, count=8, k=8)
        truth = nav2d_spec.action((260.0, 150.0))
        response = synthetic_select(query, truth, 0.0, np.random.default_rng(0))

        def distance(label):
            return np.linalg.norm(query.annotated.labels[label].as_array() - truth.as_array())

        assert list(response.ranked_labels) == sorted(range(1, 9), key=lambda l: (distance(l), l))
        assert json.loads(response.raw_text)["points"] == list(response.ranked_labels)

    def test_returns_k(self, nav2d_spec):
        """Exactly k labels come back."""
        from src.oracle import synthetic_select

        response = synthetic_select(
            _query(nav2d_spec, k=3), nav2d_spec.action((0.0, 0.0)), 0.5, np.random.default_rng(1)
        )
        assert len(response.ranked_labels) == 3

    async def test_reads_query_truth(self, nav2d_spec):
        """Without a fixed truth the query truth is used."""
        from src.oracle import SyntheticOracle

        query = _query(nav2d_spec, k=1, truth=nav2d_spec.action((230.0, 200.0)))
        response = await SyntheticOracle().select(query)
        assert response.ranked_labels == (5,)

    async def test_needs_truth(self, nav2d_spec):
        """No truth anywhere is an error."""
        from src.errors import OracleError
        from src.oracle import SyntheticOracle

        with pytest.raises(OracleError):
            await SyntheticOracle().select(_query(nav2d_spec))

    async def test_forks_are_reproducible(self, nav2d_spec):
        """Forks with the same seed give the same answers."""
        from src.oracle import SyntheticOracle

        query = _query(nav2d_spec, truth=nav2d_spec.action((300.0, 200.0)))
        oracle = SyntheticOracle(noise_sigma=0.5)
        first = await oracle.fork(7).select(query)
        second = await oracle.fork(7).select(query)
        assert first == second


class TestReplayOracle:
    """Tests for the replay oracle."""

    async def test_in_order(self, nav2d_spec):
        """Canned answers are consumed in order."""
        from src.oracle import ReplayOracle

        oracle = ReplayOracle(['{"points": [2]}', "Arrow: [3, 1]"])
        assert (await oracle.select(_query(nav2d_spec))).ranked_labels == (2,)
        assert (await oracle.select(_query(nav2d_spec))).ranked_labels == (3, 1)
        assert oracle.remaining == 0

    async def test_worst_to_best_answers_are_flipped(self, nav2d_spec):
        """Online reasoning answers rank worst first; responses are best first."""
        from src.oracle import ReplayOracle

        cot = _query(nav2d_spec, task_kind="manipulation-online", prompt_style="zero-shot-cot")
        direct = _query(
            nav2d_spec, task_kind="manipulation-online", prompt_style="zero-shot-direct"
        )
        oracle = ReplayOracle(["Arrow: [2, 5, 7]", "Arrow: [2, 5, 7]"])
        assert (await oracle.select(cot)).ranked_labels == (7, 5, 2)
        assert (await oracle.select(direct)).ranked_labels == (2, 5, 7)

    async def test_exhausted(self, nav2d_spec):
        """An empty script raises ScriptExhausted."""
        from src.errors import ScriptExhausted
        from src.oracle import ReplayOracle

        with pytest.raises(ScriptExhausted):
            await ReplayOracle([]).select(_query(nav2d_spec))

    async def test_invalid_labels(self, nav2d_spec):
        """Out-of-range canned labels raise EmptyAfterFilter."""
        from src.errors import EmptyAfterFilter
        from src.oracle import ReplayOracle

        with pytest.raises(EmptyAfterFilter):
            await ReplayOracle(['{"points": [99]}']).select(_query(nav2d_spec))

    def test_load_script_formats(self, tmp_path):
        """JSON lists and line files both load."""
        from src.oracle import load_script

        as_json = tmp_path / "script.json"
        as_json.write_text(json.dumps(['{"points": [1]}', "Arrow: [2]"]))
        as_lines = tmp_path / "script.txt"
        as_lines.write_text('{"points": [1]}\n\nArrow: [2]\n')
        assert load_script(str(as_json)) == load_script(str(as_lines))

    def test_load_script_missing(self, tmp_path):
        """A missing script file is a configuration error."""
        from src.errors import ConfigurationError
        from src.oracle import load_script

        with pytest.raises(ConfigurationError):
            load_script(str(tmp_path / "none.txt"))

    def test_load_script_invalid_json(self, tmp_path):
        """A script that opens a JSON list but does not close it is a configuration error."""
        from src.errors import ConfigurationError
        from src.oracle import load_script

        path = tmp_path / "script.json"
        path.write_text('["{\\"points\\": [1]}", ')
        with pytest.raises(ConfigurationError) as exc_info:
            load_script(str(path))
        assert exc_info.value.field == "oracle.replay.script_file"
        assert "Invalid JSON" in str(exc_info.value)


class TestRemoteOracle:
    """Tests for the remote oracle against mocked endpoints."""

    @pytest.fixture
    def gemini_config(self, monkeypatch):
        from src.models.config import RemoteConfig

        monkeypatch.setenv("GEMINI_API_KEY", "test-key")
        return RemoteConfig(
            endpoint="https://vlm.example/v1beta",
            api_key_env="GEMINI_API_KEY",
            model="gemini-pro",
            wire_schema="gemini-generate",
            max_retries=2,
        )

    @staticmethod
    def _gemini_reply(text):
        return {"candidates": [{"content": {"parts": [{"text": text}]}}]}

    def test_missing_key(self):
        """The API key must be in the configured environment variable."""
        from src.errors import ConfigurationError
        from src.models.config import RemoteConfig
        from src.oracle import RemoteOracle

        with pytest.raises(ConfigurationError) as exc_info:
            RemoteOracle(RemoteConfig())
        assert exc_info.value.field == "oracle.remote.api_key_env"

    async def test_gemini_points(self, gemini_config, nav2d_spec):
        """The request carries the key and the image; the answer is parsed."""
        from src.oracle import RemoteOracle

        seen = []

        def handler(request):
            seen.append(request)
            return httpx.Response(200, json=self._gemini_reply('{"points": [2]}'))

        async with httpx.AsyncClient(transport=httpx.MockTransport(handler)) as client:
            oracle = RemoteOracle(gemini_config, http_client=client)
            response = await oracle.select(_query(nav2d_spec))

        assert response.ranked_labels == (2,)
        [request] = seen
        assert request.url.path == "/v1beta/models/gemini-pro:generateContent"
        assert request.headers["x-goog-api-key"] == "test-key"
        parts = json.loads(request.content)["contents"][0]["parts"]
        assert parts[1]["inline_data"]["mime_type"] == "image/png"

    async def test_rate_limit_then_success(self, gemini_config, nav2d_spec):
        """A 429 is retried after the server's hint."""
        from src.oracle import RemoteOracle

        replies = [
            httpx.Response(429, headers={"retry-after": "0"}, json={}),
            httpx.Response(200, json=self._gemini_reply("Arrow: [1, 4]")),
        ]

        async with httpx.AsyncClient(
            transport=httpx.MockTransport(lambda request: replies.pop(0))
        ) as client:
            oracle = RemoteOracle(gemini_config, http_client=client)
            response = await oracle.select(_query(nav2d_spec))

        assert response.ranked_labels == (1, 4)
        assert replies == []

    async def test_client_error_not_retried(self, gemini_config, nav2d_spec):
        """4xx answers other than 408/429 fail at once."""
        from src.errors import OracleTransportError
        from src.oracle import RemoteOracle

        calls = []

        def handler(request):
            calls.append(request)
            return httpx.Response(400, text="bad request")

        async with httpx.AsyncClient(transport=httpx.MockTransport(handler)) as client:
            oracle = RemoteOracle(gemini_config, http_client=client)
            with pytest.raises(OracleTransportError) as exc_info:
                await oracle.select(_query(nav2d_spec))

        assert exc_info.value.status_code == 400
        assert len(calls) == 1

    async def test_openai_chat(self, monkeypatch, nav2d_spec):
        """The chat schema goes through the OpenAI client."""
        from src.models.config import RemoteConfig
        from src.oracle import remote_select

        monkeypatch.setenv("OPENAI_API_KEY", "sk-test")
        seen = []

        def handler(request):
            seen.append(request)
            return httpx.Response(
                200,
                json={
                    "id": "chatcmpl-1",
                    "object": "chat.completion",
                    "created": 0,
                    "model": "gpt-4o",
                    "choices": [
                        {
                            "index": 0,
                            "message": {"role": "assistant", "content": "final answer: [7, 3]"},
                            "finish_reason": "stop",
                        }
                    ],
                },
            )

        config = RemoteConfig(endpoint="https://llm.example/v1", max_retries=0)
        async with httpx.AsyncClient(transport=httpx.MockTransport(handler)) as client:
            response = await remote_select(_query(nav2d_spec), config, http_client=client)

        assert response.ranked_labels == (7, 3)
        assert seen[0].url.path == "/v1/chat/completions"
        content = json.loads(seen[0].content)["messages"][0]["content"]
        assert any(part["type"] == "image_url" for part in content)


class TestRequestThrottle:
    """Tests for RequestThrottle."""

    async def test_in_flight(self):
        """Slots count while held."""
        from src.oracle import RequestThrottle, ThrottleConfig

        throttle = RequestThrottle(ThrottleConfig(max_in_flight=2))
        async with throttle.slot():
            assert throttle.get_usage()["in_flight"] == 1
        assert throttle.get_usage()["in_flight"] == 0

    async def test_window_expires(self):
        """Requests leave the window after a minute."""
        from src.oracle import RequestThrottle, ThrottleConfig

        now = [100.0]
        throttle = RequestThrottle(
            ThrottleConfig(requests_per_minute=5), clock=lambda: now[0]
        )
        for _ in range(3):
            async with throttle.slot():
                pass
        assert throttle.get_usage()["window_requests"] == 3
        now[0] += 60.0
        assert throttle.get_usage()["window_requests"] == 0
        assert throttle.get_usage()["throttled_waits"] == 0


class TestTextBaseline:
    """Tests for the text-only baselines."""

    def test_regions(self):
        """Pixels map to a 3x3 grid of named regions."""
        from src.oracle import region_center, region_of

        assert region_of((100.0, 100.0), (640, 480)) == "top left"
        assert region_of((320.0, 240.0), (640, 480)) == "center"
        assert region_of((639.0, 240.0), (640, 480)) == "middle right"
        assert region_center("bottom right", (600, 300)) == (500.0, 250.0)

    def test_last_mention_wins(self):
        """The final region or direction named is used."""
        from src.oracle import parse_direction, parse_region

        assert parse_region("Top left? No: bottom right.") == "bottom right"
        assert parse_direction("Not left. Move forward.") == "forward"

    def test_direction_to_action(self, cart3d_spec):
        """Directions become fixed-length displacements."""
        from src.oracle import BaselineRequest
        from src.oracle.text_baseline import answer_to_action

        request = BaselineRequest(image=np.zeros((4, 4, 3), np.uint8), instruction="x", spec=cart3d_spec)
        action = answer_to_action("direction", "Move up.", request, 0.1)
        assert action.components == pytest.approx((0.0, 0.0, 0.1))

    def test_mode_must_fit_space(self, cart3d_spec):
        """Region answers need a pixel space."""
        from src.errors import ConfigurationError
        from src.oracle import BaselineRequest
        from src.oracle.text_baseline import answer_to_action

        request = BaselineRequest(image=np.zeros((4, 4, 3), np.uint8), instruction="x", spec=cart3d_spec)
        with pytest.raises(ConfigurationError):
            answer_to_action("region", "center", request, 0.1)

    async def test_synthetic_direction(self, cart3d_spec):
        """The dominant truth axis is named."""
        from src.oracle import BaselineRequest, SyntheticTextBaseline

        request = BaselineRequest(
            image=np.zeros((4, 4, 3), np.uint8),
            instruction="push the block",
            spec=cart3d_spec,
            truth=cart3d_spec.action((0.05, -0.15, 0.02)),
        )
        action, text = await SyntheticTextBaseline(mode="direction").choose(request)
        assert text == "Move backward."
        assert action.components == pytest.approx((0.0, -0.1, 0.0))


class TestBuildOracle:
    """Tests for build_oracle."""

    def test_synthetic_with_truth(self, nav2d_spec):
        """A fixed truth is read in the given space."""
        from src.models.config import OracleConfig
        from src.oracle import SyntheticOracle, build_oracle

        config = OracleConfig.model_validate({"synthetic": {"truth": [10, 20]}})
        oracle = build_oracle(config, seed=3, spec=nav2d_spec)
        assert isinstance(oracle, SyntheticOracle)
        assert oracle.truth.components == (10.0, 20.0)

    def test_truth_needs_space(self):
        """A fixed truth without an action space is rejected."""
        from src.errors import ConfigurationError
        from src.models.config import OracleConfig
        from src.oracle import build_oracle

        config = OracleConfig.model_validate({"synthetic": {"truth": [10, 20]}})
        with pytest.raises(ConfigurationError) as exc_info:
            build_oracle(config)
        assert exc_info.value.field == "oracle.synthetic.truth"

    def test_replay_needs_script(self):
        """An empty replay script is rejected."""
        from src.errors import ConfigurationError
        from src.models.config import OracleConfig
        from src.oracle import build_oracle

        with pytest.raises(ConfigurationError):
            build_oracle(OracleConfig(kind="replay"))

    def test_replay_from_file(self, tmp_path):
        """Inline and file scripts are concatenated."""
        from src.models.config import OracleConfig
        from src.oracle import ReplayOracle, build_oracle

        path = tmp_path / "script.txt"
        path.write_text('{"points": [2]}\n')
        config = OracleConfig.model_validate(
            {"kind": "replay", "replay": {"script": ["Arrow: [1]"], "script_file": str(path)}}
        )
        oracle = build_oracle(config)
        assert isinstance(oracle, ReplayOracle)
        assert oracle.remaining == 2

    def test_text_baseline(self):
        """The synthetic text baseline is the default backend."""
        from src.models.config import OracleConfig
        from src.oracle import SyntheticTextBaseline, build_oracle

        oracle = build_oracle(OracleConfig(kind="text-baseline"))
        assert isinstance(oracle, SyntheticTextBaseline)
        assert oracle.mode == "region"

    def test_remote_without_key(self):
        """Remote oracles fail fast without a key."""
        from src.errors import ConfigurationError
        from src.models.config import OracleConfig
        from src.oracle import build_oracle

        with pytest.raises(ConfigurationError):
            build_oracle(OracleConfig(kind="remote"))
