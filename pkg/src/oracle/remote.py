"""
Remote vision-language oracle.

Sends the prompt text with the annotated image (base64 PNG) to an
OpenAI-compatible chat endpoint or a Gemini generateContent endpoint, and
parses the answer text. Transport failures are retried with tenacity,
honoring the server's retry-after hint on HTTP 429.
"""

import base64
import os
from typing import Any, Dict, List, Optional, Sequence

import httpx
import openai
import structlog
from openai import AsyncOpenAI
from tenacity import (
    AsyncRetrying,
    retry_if_exception,
    stop_after_attempt,
    wait_exponential,
)
from tenacity.wait import wait_base

from src.annotate.io import encode_png
from src.errors import ConfigurationError, OracleTransportError, RateLimited
from src.models.config import RemoteConfig
from src.oracle.base import BaseOracle, SelectionQuery, SelectionResponse
from src.oracle.parsing import ranked_answer
from src.oracle.prompts import Segment, build_prompt_segments
from src.oracle.throttle import RequestThrottle, ThrottleConfig

logger = structlog.get_logger(__name__)

MAX_RETRY_AFTER_SECONDS = 60.0


def _retry_after(headers: Any) -> Optional[float]:
    if headers is None:
        return None
    value = headers.get("retry-after")
    if value is None:
        return None
    try:
        return max(float(value), 0.0)
    except ValueError:
        return None


def _is_retryable(error: BaseException) -> bool:
    if not isinstance(error, OracleTransportError):
        return False
    status = error.status_code
    return status is None or status in (408, 429) or status >= 500


class wait_retry_after(wait_base):
    """Wait the server's retry-after hint when present, else fall back."""

    def __init__(self, fallback: wait_base, max_wait: float = MAX_RETRY_AFTER_SECONDS):
        self.fallback = fallback
        self.max_wait = max_wait

    def __call__(self, retry_state) -> float:
        error = retry_state.outcome.exception() if retry_state.outcome else None
        if isinstance(error, RateLimited) and error.retry_after is not None:
            return min(error.retry_after, self.max_wait)
        return self.fallback(retry_state)


def image_data(pixels) -> str:
    """Base64 PNG of an RGB raster."""
    return base64.b64encode(encode_png(pixels)).decode("ascii")


class RemoteOracle(BaseOracle):
    """
    Oracle backed by a remote VLM endpoint.

    Safe for concurrent calls; a RequestThrottle bounds in-flight requests
    and requests per minute.
    """

    name = "remote"
    concurrent = True

    def __init__(
        self,
        config: RemoteConfig,
        http_client: Optional[httpx.AsyncClient] = None,
    ):
        self.config = config
        api_key = os.environ.get(config.api_key_env)
        if not api_key:
            raise ConfigurationError(
                f"Environment variable {config.api_key_env} is not set",
                field="oracle.remote.api_key_env",
            )
        self._api_key = api_key
        self._owns_client = http_client is None
        self._http = http_client or httpx.AsyncClient(timeout=config.timeout)
        self._throttle = RequestThrottle(
            ThrottleConfig(
                max_in_flight=config.max_in_flight,
                requests_per_minute=config.requests_per_minute,
            )
        )
        self._openai: Optional[AsyncOpenAI] = None
        if config.wire_schema == "openai-chat":
            self._openai = AsyncOpenAI(
                api_key=api_key,
                base_url=config.endpoint,
                timeout=config.timeout,
                max_retries=0,
                http_client=self._http,
            )
        logger.info(
            "Remote oracle ready",
            endpoint=config.endpoint[:30] + "..." if len(config.endpoint) > 30 else config.endpoint,
            model=config.model,
            wire_schema=config.wire_schema,
        )

    async def aclose(self) -> None:
        if self._owns_client:
            await self._http.aclose()

    @property
    def throttle(self) -> RequestThrottle:
        return self._throttle

    def _openai_messages(self, segments: Sequence[Segment], pixels) -> List[Dict[str, Any]]:
        content: List[Dict[str, Any]] = []
        for kind, text in segments:
            if kind == "image":
                url = f"data:image/png;base64,{image_data(pixels)}"
                content.append({"type": "image_url", "image_url": {"url": url}})
            else:
                content.append({"type": "text", "text": text})
        return [{"role": "user", "content": content}]

    def _gemini_body(self, segments: Sequence[Segment], pixels) -> Dict[str, Any]:
        parts: List[Dict[str, Any]] = []
        for kind, text in segments:
            if kind == "image":
                parts.append({"inline_data": {"mime_type": "image/png", "data": image_data(pixels)}})
            else:
                parts.append({"text": text})
        return {
            "contents": [{"role": "user", "parts": parts}],
            "generationConfig": {
                "temperature": self.config.temperature,
                "maxOutputTokens": self.config.max_tokens,
            },
        }

    async def _send_openai(self, segments: Sequence[Segment], pixels) -> str:
        assert self._openai is not None
        try:
            completion = await self._openai.chat.completions.create(
                model=self.config.model,
                messages=self._openai_messages(segments, pixels),
                temperature=self.config.temperature,
                max_tokens=self.config.max_tokens,
            )
        except openai.RateLimitError as e:
            raise RateLimited(str(e), retry_after=_retry_after(e.response.headers)) from e
        except openai.APIStatusError as e:
            raise OracleTransportError(str(e), status_code=e.status_code) from e
        except openai.APIConnectionError as e:
            raise OracleTransportError(f"Connection failed: {e}") from e
        if not completion.choices:
            return ""
        return completion.choices[0].message.content or ""

    async def _send_gemini(self, segments: Sequence[Segment], pixels) -> str:
        url = f"{self.config.endpoint.rstrip('/')}/models/{self.config.model}:generateContent"
        try:
            response = await self._http.post(
                url,
                json=self._gemini_body(segments, pixels),
                headers={"x-goog-api-key": self._api_key},
                timeout=self.config.timeout,
            )
        except httpx.HTTPError as e:
            raise OracleTransportError(f"Connection failed: {e}") from e
        if response.status_code == 429:
            raise RateLimited("Rate limited", retry_after=_retry_after(response.headers))
        if response.status_code >= 400:
            raise OracleTransportError(
                f"HTTP {response.status_code}: {response.text[:200]}",
                status_code=response.status_code,
            )
        data = response.json()
        candidates = data.get("candidates") or []
        if not candidates:
            return ""
        parts = candidates[0].get("content", {}).get("parts", [])
        return "".join(part.get("text", "") for part in parts)

    async def _send_once(self, segments: Sequence[Segment], pixels) -> str:
        async with self._throttle.slot():
            if self.config.wire_schema == "openai-chat":
                return await self._send_openai(segments, pixels)
            return await self._send_gemini(segments, pixels)

    async def complete(self, segments: Sequence[Segment], pixels) -> str:
        """
        Send prompt segments with an image and return the answer text.

        Raises:
            OracleTransportError: After retries are exhausted
        """
        retrying = AsyncRetrying(
            stop=stop_after_attempt(self.config.max_retries + 1),
            wait=wait_retry_after(wait_exponential(multiplier=1, min=1, max=10)),
            retry=retry_if_exception(_is_retryable),
            reraise=True,
        )
        text = ""
        async for attempt in retrying:
            with attempt:
                if attempt.retry_state.attempt_number > 1:
                    logger.warning(
                        "Retrying oracle request", attempt=attempt.retry_state.attempt_number
                    )
                text = await self._send_once(segments, pixels)
        return text

    async def select(self, query: SelectionQuery) -> SelectionResponse:
        """
        Query the endpoint and parse the answer.

        Raises:
            OracleTransportError: After retries are exhausted
            SelectionParseError: When the answer has no usable label
        """
        text = await self.complete(build_prompt_segments(query), query.annotated.pixels)
        ranked = ranked_answer(text, query)
        return SelectionResponse(ranked_labels=tuple(ranked), raw_text=text)


async def remote_select(
    query: SelectionQuery,
    endpoint: RemoteConfig,
    http_client: Optional[httpx.AsyncClient] = None,
) -> SelectionResponse:
    """One-off remote selection with a short-lived client."""
    oracle = RemoteOracle(endpoint, http_client=http_client)
    try:
        return await oracle.select(query)
    finally:
        await oracle.aclose()
