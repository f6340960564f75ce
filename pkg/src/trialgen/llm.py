"""Chat-completion client with retrying HTTP transport and deterministic mocks,
plus parsing/validation of model outputs (reason lists, synthetic trial reports).
"""

from __future__ import annotations

import hashlib
import itertools
import json
import logging
import os
import random
import re
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

from .corpus import scrub_leakage
from .prompts import TokenCounter, estimate_tokens
from .retrieval import DEFAULT_TOKEN_BUDGET

logger = logging.getLogger(__name__)

API_KEY_ENV = "OPENAI_API_KEY"


class LlmError(Exception):
    pass


class BudgetExceeded(LlmError):
    pass


class TransportError(LlmError):
    pass


class TransientTransportError(TransportError):
    """Retryable failure: HTTP 429/5xx, timeout, connection reset."""


class EmptyResponse(LlmError):
    pass


class MalformedReasonList(LlmError):
    pass


class MissingIntervention(LlmError):
    pass


class NotReportShaped(LlmError):
    pass


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    temperature: float = 1.0
    model_name: str = "gpt-4o-mini"
    max_output_tokens: int | None = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class ReasonSet:
    intervention: str
    label: int
    reasons: tuple[str, ...]


@dataclass(frozen=True)
class Provenance:
    example_ids: tuple[str, ...]
    reasons: tuple[str, ...]
    model_name: str
    temperature: float
    seed: int
    timestamp: str
    unit_index: int = 0


@dataclass(frozen=True)
class SyntheticTrial:
    trial_id: str
    text: str
    intervention: str
    label: int
    provenance: Provenance


class Transport(Protocol):
    def __call__(self, request: CompletionRequest) -> str: ...


class ScriptedTransport:
    """Returns queued responses in request order; queue items may be exceptions.

    Every request that reaches the transport is recorded, which lets tests
    assert that budget rejections never hit the wire.
    """

    def __init__(self, responses: list):
        self.queue = list(responses)
        self.requests: list[CompletionRequest] = []

    def __call__(self, request: CompletionRequest) -> str:
        self.requests.append(request)
        if not self.queue:
            raise TransportError("scripted transport exhausted")
        item = self.queue.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


class MappedTransport:
    """Content-addressed mock: sha256(prompt) -> response."""

    def __init__(self, mapping: dict[str, str]):
        self.mapping = dict(mapping)
        self.requests: list[CompletionRequest] = []

    def __call__(self, request: CompletionRequest) -> str:
        self.requests.append(request)
        digest = prompt_sha256(request.prompt)
        try:
            return self.mapping[digest]
        except KeyError:
            raise TransportError(f"no scripted response for prompt sha256 {digest}") from None


class HttpTransport:
    """POSTs OpenAI-style chat completions; API key comes from the environment."""

    def __init__(self, base_url: str, timeout: float = 60.0, api_key_env: str = API_KEY_ENV):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.api_key_env = api_key_env

    def __call__(self, request: CompletionRequest) -> str:
        import requests

        api_key = os.environ.get(self.api_key_env, "")
        if not api_key:
            raise TransportError(f"missing API key in ${self.api_key_env}")
        body = {
            "model": request.model_name,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
        }
        if request.max_output_tokens is not None:
            body["max_tokens"] = request.max_output_tokens
        try:
            resp = requests.post(
                f"{self.base_url}/chat/completions",
                json=body,
                headers={"Authorization": f"Bearer {api_key}"},
                timeout=self.timeout,
            )
        except requests.exceptions.RequestException as exc:
            raise TransientTransportError(str(exc)) from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientTransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"unexpected response shape: {exc}") from exc


def prompt_sha256(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def load_mock_transport(path: str | Path):
    """Build a mock transport from a JSON fixture.

    Accepts either {"responses": [...]} (ordered queue) or
    {"by_prompt_sha256": {digest: response}} (content-addressed).
    """
    with open(path, encoding="utf-8") as handle:
        fixture = json.load(handle)
    if "responses" in fixture:
        return ScriptedTransport(fixture["responses"])
    if "by_prompt_sha256" in fixture:
        return MappedTransport(fixture["by_prompt_sha256"])
    raise ValueError(f"mock fixture {path} has neither 'responses' nor 'by_prompt_sha256'")


class ChatClient:
    """Budget-checked completion client with exponential-backoff retries."""

    def __init__(
        self,
        transport: Transport,
        model_name: str = "gpt-4o-mini",
        temperature: float = 1.0,
        token_budget: int = DEFAULT_TOKEN_BUDGET,
        max_retries: int = 5,
        backoff_base: float = 0.5,
        token_counter: TokenCounter = estimate_tokens,
        sleep: Callable[[float], None] = time.sleep,
        jitter: Callable[[], float] | None = None,
    ):
        self.transport = transport
        self.model_name = model_name
        self.temperature = temperature
        self.token_budget = token_budget
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.token_counter = token_counter
        self._sleep = sleep
        self._jitter = jitter or (lambda: random.random())

    def request_for(self, prompt: str) -> CompletionRequest:
        return CompletionRequest(
            prompt=prompt, temperature=self.temperature, model_name=self.model_name
        )

    def complete(self, request: CompletionRequest) -> str:
        """Run one completion; transient failures are retried with backoff."""
        tokens = self.token_counter(request.prompt)
        if tokens > self.token_budget:
            raise BudgetExceeded(
                f"prompt estimated at {tokens} tokens exceeds budget {self.token_budget}"
            )
        last_error: Exception | None = None
        for attempt in range(self.max_retries):
            try:
                text = self.transport(request)
            except TransientTransportError as exc:
                last_error = exc
                if attempt + 1 < self.max_retries:
                    delay = self.backoff_base * (2**attempt) + self.backoff_base * self._jitter()
                    logger.warning(
                        "transient LLM failure (attempt %d/%d): %s",
                        attempt + 1,
                        self.max_retries,
                        exc,
                    )
                    self._sleep(delay)
                continue
            if not text or not text.strip():
                raise EmptyResponse("model returned an empty message")
            return text
        raise TransportError(f"retries exhausted after {self.max_retries} attempts: {last_error}")


def _marker(n: int) -> re.Pattern[str]:
    return re.compile(rf"(?:(?<=\s)|^){n}\.\s+")


_MARKERS = {n: _marker(n) for n in range(1, 7)}


def parse_reasons(response: str, intervention: str, label: int) -> ReasonSet:
    """Extract the 5 numbered reasons ("1. ... 5. ...") from a model response."""
    matches = []
    start = 0
    for n in range(1, 6):
        match = _MARKERS[n].search(response, start)
        if match is None:
            raise MalformedReasonList(f"numbered item {n}. not found in response")
        matches.append(match)
        start = match.end()
    overflow = _MARKERS[6].search(response, matches[-1].end())
    if overflow is not None:
        raise MalformedReasonList("more than 5 numbered items in response")
    reasons = []
    for i, match in enumerate(matches):
        end = matches[i + 1].start() if i + 1 < len(matches) else len(response)
        item = response[match.end() : end].strip()
        if not item:
            raise MalformedReasonList(f"numbered item {i + 1}. is empty")
        reasons.append(item)
    return ReasonSet(intervention=intervention, label=label, reasons=tuple(reasons))


_TAG_PAIR_RE = re.compile(r"<(\w+)(?:\s[^<>]*)?>[\s\S]*?</\1\s*>")


class SyntheticIdAllocator:
    """Thread-safe monotone id source for synthetic trials (SYN-000001, ...)."""

    def __init__(self, start: int = 1):
        self._counter = itertools.count(start)
        self._lock = threading.Lock()

    def next_id(self) -> str:
        with self._lock:
            return f"SYN-{next(self._counter):06d}"


_default_allocator = SyntheticIdAllocator()


def validate_synthetic(
    response: str,
    intervention: str,
    label: int,
    provenance: Provenance,
    ids: SyntheticIdAllocator | None = None,
) -> SyntheticTrial:
    """Scrub and structurally validate one generated trial report.

    The stored text has the four label words removed; the report must still
    mention the intervention and contain at least one matched XML-like tag pair.
    """
    if not response or not response.strip():
        raise EmptyResponse("generated report is empty")
    text = scrub_leakage(response, mode="synthetic")
    if intervention.lower() not in text.lower():
        raise MissingIntervention(f"report does not mention {intervention!r}")
    if _TAG_PAIR_RE.search(text) is None:
        raise NotReportShaped("report has no matched XML-like tag pair")
    allocator = ids if ids is not None else _default_allocator
    return SyntheticTrial(
        trial_id=allocator.next_id(),
        text=text,
        intervention=intervention,
        label=label,
        provenance=provenance,
    )


__all__ = [
    "API_KEY_ENV",
    "BudgetExceeded",
    "ChatClient",
    "CompletionRequest",
    "EmptyResponse",
    "HttpTransport",
    "LlmError",
    "MalformedReasonList",
    "MappedTransport",
    "MissingIntervention",
    "NotReportShaped",
    "Provenance",
    "ReasonSet",
    "ScriptedTransport",
    "SyntheticIdAllocator",
    "SyntheticTrial",
    "TransientTransportError",
    "TransportError",
    "load_mock_transport",
    "parse_reasons",
    "prompt_sha256",
    "validate_synthetic",
]
