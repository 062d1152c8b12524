"""Chat-model plumbing: a client speaking the standard chat-completion wire
protocol, a scripted stand-in for deterministic tests, parsers for model
outputs, and the external classifier client for content constraints.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, field
from typing import Optional, Protocol

import requests

DEFAULT_TEMPERATURE = 0.8
DEFAULT_MAX_TOKENS = 1024

ENV_CHAT_URL = "VERIFIX_CHAT_URL"
ENV_API_KEY = "VERIFIX_API_KEY"
ENV_MODEL = "VERIFIX_MODEL"
ENV_CLASSIFIER_URL = "VERIFIX_CLASSIFIER_URL"


class GatewayError(RuntimeError):
    """Base class for chat/classifier transport problems."""


class TransportError(GatewayError):
    """The endpoint could not be reached after the configured retries."""


class EndpointRejection(GatewayError):
    """The endpoint answered with an error code or an unusable body."""

    def __init__(self, status: int, body: str):
        super().__init__(f"endpoint rejected request: HTTP {status}: {body[:500]}")
        self.status = status
        self.body = body


class ScriptExhausted(GatewayError):
    """A scripted mock ran out of replies."""


class UnknownLabel(GatewayError):
    """The classifier returned no usable label."""


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[tuple[str, str], ...]  # (role, content) pairs, in order
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS

    def __post_init__(self) -> None:
        if not self.messages:
            raise ValueError("chat request requires at least one message")


@dataclass(frozen=True)
class ChatReply:
    content: str
    finish_reason: str = "stop"


def user_request(
    prompt: str,
    *,
    model: str = "default",
    temperature: float = DEFAULT_TEMPERATURE,
    max_tokens: int = DEFAULT_MAX_TOKENS,
) -> ChatRequest:
    """A single-turn user request, the shape every loop step uses."""
    return ChatRequest(model, (("user", prompt),), temperature, max_tokens)


class ChatModel(Protocol):
    def chat(self, request: ChatRequest) -> ChatReply: ...


@dataclass
class ClientConfig:
    """Connection settings; secrets come from the environment, never flags."""

    endpoint: str = ""
    api_key: str = ""
    model: str = "default"
    classifier_endpoint: str = ""
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    timeout: float = 60.0
    retries: int = 3
    backoff: float = 0.5

    @classmethod
    def from_env(cls, **overrides) -> "ClientConfig":
        cfg = cls(
            endpoint=os.environ.get(ENV_CHAT_URL, ""),
            api_key=os.environ.get(ENV_API_KEY, ""),
            model=os.environ.get(ENV_MODEL, "default"),
            classifier_endpoint=os.environ.get(ENV_CLASSIFIER_URL, ""),
        )
        for key, value in overrides.items():
            setattr(cfg, key, value)
        return cfg


class HttpChatModel:
    """Chat-completion client over plain JSON HTTP.

    Request body: {"model", "messages": [{"role", "content"}], "temperature",
    "max_tokens"}; the reply's choices[0].message.content is returned.
    Transient network failures are retried with exponential backoff;
    HTTP error codes are surfaced immediately as EndpointRejection.
    """

    def __init__(self, config: ClientConfig, session: Optional[requests.Session] = None):
        if not config.endpoint:
            raise ValueError("chat endpoint is not configured")
        self.config = config
        self._session = session or requests.Session()

    def chat(self, request: ChatRequest) -> ChatReply:
        payload = {
            "model": request.model,
            "messages": [{"role": r, "content": c} for r, c in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        last_error: Optional[Exception] = None
        for attempt in range(self.config.retries + 1):
            try:
                resp = self._session.post(
                    self.config.endpoint,
                    json=payload,
                    headers=headers,
                    timeout=self.config.timeout,
                )
            except (requests.ConnectionError, requests.Timeout) as exc:
                last_error = exc
                if attempt < self.config.retries:
                    time.sleep(self.config.backoff * (2**attempt))
                continue
            if resp.status_code >= 400:
                raise EndpointRejection(resp.status_code, resp.text)
            return _parse_reply(resp)
        raise TransportError(f"chat endpoint unreachable: {last_error}")


def _parse_reply(resp: requests.Response) -> ChatReply:
    try:
        data = resp.json()
        choice = data["choices"][0]
        content = choice["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise EndpointRejection(resp.status_code, resp.text) from exc
    if content is None:
        raise EndpointRejection(resp.status_code, resp.text)
    return ChatReply(str(content), str(choice.get("finish_reason", "stop")))


class ScriptedChatModel:
    """Replays a fixed list of replies, in order; errors when exhausted.

    Single-consumer: one cursor, not to be shared across concurrent runs.
    """

    def __init__(self, replies: list[str]):
        self._replies = list(replies)
        self._cursor = 0
        self.requests: list[ChatRequest] = []

    def chat(self, request: ChatRequest) -> ChatReply:
        self.requests.append(request)
        if self._cursor >= len(self._replies):
            raise ScriptExhausted(
                f"script exhausted after {len(self._replies)} replies"
            )
        reply = self._replies[self._cursor]
        self._cursor += 1
        return ChatReply(reply)


_DECOMP_ITEM_RE = re.compile(r"^\s*#\s*\d+\s*\.\s*(.*\S)\s*$")


def parse_decomposition(reply: str) -> list[str]:
    """Extract "#<n>." items from a decomposition reply, in order.

    Returns an empty list when no markers are present, which the caller
    treats as a decomposition failure.
    """
    items = []
    for line in reply.splitlines():
        m = _DECOMP_ITEM_RE.match(line)
        if m:
            items.append(m.group(1))
    return items


_FENCE_RE = re.compile(r"^```[a-zA-Z0-9_-]*\s*|\s*```$")


def clean_model_output(reply: str) -> str:
    """Lenient cleanup of a short model answer: trim, strip markdown fences,
    and keep only the first nonempty line."""
    text = _FENCE_RE.sub("", reply.strip()).strip()
    for line in text.splitlines():
        if line.strip():
            return line.strip()
    return ""


class ClassifierClient(Protocol):
    def __call__(self, kind: str, text: str) -> str: ...


class HttpClassifier:
    """Client for an external content classifier service.

    POSTs {"kind": "topic"|"sentiment", "text": ...} and expects
    {"label": "..."} back.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0,
                 session: Optional[requests.Session] = None):
        if not endpoint:
            raise ValueError("classifier endpoint is not configured")
        self.endpoint = endpoint
        self.timeout = timeout
        self._session = session or requests.Session()

    def __call__(self, kind: str, text: str) -> str:
        try:
            resp = self._session.post(
                self.endpoint, json={"kind": kind, "text": text}, timeout=self.timeout
            )
        except (requests.ConnectionError, requests.Timeout) as exc:
            raise TransportError(f"classifier unreachable: {exc}") from exc
        if resp.status_code >= 400:
            raise EndpointRejection(resp.status_code, resp.text)
        try:
            label = resp.json().get("label")
        except ValueError as exc:
            raise EndpointRejection(resp.status_code, resp.text) from exc
        if not label:
            raise UnknownLabel(f"classifier returned no label for {kind!r}")
        return str(label)


def classify_content(kind: str, text: str, client: ClassifierClient) -> str:
    """Top label for a topic or sentiment query via the given client."""
    if kind not in ("topic", "sentiment"):
        raise ValueError(f"unknown classification kind: {kind!r}")
    return client(kind, text)


@dataclass
class LoopSettings:
    """Operator-tunable knobs shared by the CLI and the run loop."""

    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = DEFAULT_MAX_TOKENS
    max_trials: int = 5
    generate_few_shots: int = 5
    refine_few_shots: int = 8
    timeout: float = 60.0
    retries: int = 3
    model: str = "default"
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str) -> "LoopSettings":
        """Load settings from a JSON (or TOML, when available) config file."""
        if path.endswith(".toml"):
            try:
                import tomllib  # Python 3.11+
            except ImportError as exc:
                raise ValueError(
                    "TOML config requires Python 3.11+; use JSON instead"
                ) from exc
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        else:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        settings = cls()
        for key, value in data.items():
            if hasattr(settings, key) and key != "extra":
                setattr(settings, key, value)
            else:
                settings.extra[key] = value
        return settings
