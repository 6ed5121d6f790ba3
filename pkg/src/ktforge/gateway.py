"""Chat-completion gateway with live, record, replay and mock backends."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Protocol, Sequence

log = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-4o-mini"
DEFAULT_TEMPERATURE = 1.0
API_KEY_ENV = "KTFORGE_API_KEY"
ROLES = frozenset({"system", "user", "assistant"})


class GatewayError(RuntimeError):
    pass


class TransportError(GatewayError):
    """Network-level failure talking to the endpoint."""


class HTTPStatusError(GatewayError):
    def __init__(self, status: int, body: str):
        super().__init__(f"endpoint returned HTTP {status}: {body[:200]}")
        self.status = status


class MalformedResponse(GatewayError):
    pass


class MissingFixture(GatewayError):
    def __init__(self, digest: str):
        super().__init__(f"no recorded response for request digest {digest}")
        self.digest = digest


class ScriptExhausted(GatewayError):
    pass


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[tuple[str, str], ...]
    model: str = DEFAULT_MODEL
    temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self):
        if not self.messages:
            raise ValueError("a chat request needs at least one message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        for role, _ in self.messages:
            if role not in ROLES:
                raise ValueError(f"unknown role {role!r}")

    def canonical(self) -> str:
        # Message content is carried verbatim; only the envelope is normalised.
        payload = {
            "messages": [{"content": c, "role": r} for r, c in self.messages],
            "model": self.model,
            "temperature": float(self.temperature),
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()

    def to_json(self) -> dict:
        return json.loads(self.canonical())

    @classmethod
    def from_json(cls, data: dict) -> "ChatRequest":
        return cls(tuple((m["role"], m["content"]) for m in data["messages"]), data["model"], data["temperature"])


@dataclass(frozen=True)
class ChatResponse:
    content: str
    usage: Optional[tuple[int, int]] = None
    latency_ms: int = 0

    def to_json(self) -> dict:
        return {"content": self.content, "latency_ms": self.latency_ms, "usage": list(self.usage) if self.usage else None}

    @classmethod
    def from_json(cls, data: dict) -> "ChatResponse":
        usage = data.get("usage")
        return cls(data["content"], tuple(usage) if usage else None, int(data.get("latency_ms", 0)))


class Backend(Protocol):
    def complete(self, request: ChatRequest) -> ChatResponse: ...


class LiveBackend:
    """POSTs to an OpenAI-compatible ``/chat/completions`` endpoint."""

    def __init__(self, base_url: str, api_key: Optional[str] = None, max_in_flight: int = 4,
                 attempts: int = 3, backoff_s: float = 1.0, timeout_s: float = 120.0, client=None):
        import httpx

        self.url = base_url.rstrip("/") + "/chat/completions"
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.attempts = attempts
        self.backoff_s = backoff_s
        self.slots = threading.BoundedSemaphore(max_in_flight)
        self.client = client or httpx.Client(timeout=timeout_s)
        self._httpx = httpx

    def complete(self, request: ChatRequest) -> ChatResponse:
        body = {"model": request.model, "temperature": request.temperature,
                "messages": [{"role": r, "content": c} for r, c in request.messages]}
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        last: Optional[GatewayError] = None
        for attempt in range(self.attempts):
            if attempt:
                time.sleep(self.backoff_s * 2 ** (attempt - 1))
            start = time.monotonic()
            try:
                with self.slots:
                    resp = self.client.post(self.url, json=body, headers=headers)
            except self._httpx.HTTPError as exc:
                last = TransportError(f"request to {self.url} failed: {exc}")
                log.warning("attempt %d/%d: %s", attempt + 1, self.attempts, last)
                continue
            latency = int((time.monotonic() - start) * 1000)
            if not 200 <= resp.status_code < 300:
                last = HTTPStatusError(resp.status_code, resp.text)
                log.warning("attempt %d/%d: %s", attempt + 1, self.attempts, last)
                continue
            try:
                data = resp.json()
                content = data["choices"][0]["message"]["content"]
                if not isinstance(content, str):
                    raise TypeError("content is not text")
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                last = MalformedResponse(f"unexpected response body: {exc}")
                log.warning("attempt %d/%d: %s", attempt + 1, self.attempts, last)
                continue
            usage = data.get("usage") or {}
            tokens = (usage["prompt_tokens"], usage["completion_tokens"]) if "prompt_tokens" in usage else None
            return ChatResponse(content, tokens, latency)
        assert last is not None
        raise last


@dataclass
class ReplayFixture:
    entries: dict[str, dict] = field(default_factory=dict)  # digest -> {"request":..., "response":...}

    @classmethod
    def load(cls, path: str | Path) -> "ReplayFixture":
        p = Path(path)
        if not p.exists():
            return cls()
        return cls(json.loads(p.read_text(encoding="utf-8"))["entries"])

    def dumps(self) -> str:
        return json.dumps({"entries": dict(sorted(self.entries.items()))}, indent=1, sort_keys=True, ensure_ascii=False) + "\n"

    def save(self, path: str | Path) -> None:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(self.dumps(), encoding="utf-8")


class ReplayBackend:
    def __init__(self, fixture: ReplayFixture):
        self.fixture = fixture

    def complete(self, request: ChatRequest) -> ChatResponse:
        entry = self.fixture.entries.get(request.digest())
        if entry is None:
            raise MissingFixture(request.digest())
        return ChatResponse.from_json(entry["response"])


class RecordBackend:
    """Forwards to ``inner`` and stores every exchange in ``fixture``."""

    def __init__(self, inner: Backend, fixture: ReplayFixture, path: Optional[str | Path] = None):
        self.inner = inner
        self.fixture = fixture
        self.path = path
        self.lock = threading.Lock()

    def complete(self, request: ChatRequest) -> ChatResponse:
        response = self.inner.complete(request)
        with self.lock:
            self.fixture.entries[request.digest()] = {"request": request.to_json(), "response": response.to_json()}
            if self.path is not None:
                self.fixture.save(self.path)
        return response


class MockBackend:
    """Returns scripted responses in call order; thread-safe."""

    def __init__(self, script: Iterable[str | ChatResponse]):
        self.script = [s if isinstance(s, ChatResponse) else ChatResponse(s) for s in script]
        self.pos = 0
        self.lock = threading.Lock()
        self.requests: list[ChatRequest] = []

    def complete(self, request: ChatRequest) -> ChatResponse:
        with self.lock:
            if self.pos >= len(self.script):
                raise ScriptExhausted(f"mock script exhausted after {self.pos} responses")
            self.requests.append(request)
            self.pos += 1
            return self.script[self.pos - 1]


class Gateway:
    """Builds requests with the configured model and temperature and forwards them."""

    def __init__(self, backend: Backend, model: str = DEFAULT_MODEL, temperature: float = DEFAULT_TEMPERATURE):
        self.backend = backend
        self.model = model
        self.temperature = temperature

    def request(self, messages: Sequence[tuple[str, str]]) -> ChatRequest:
        return ChatRequest(tuple(messages), self.model, self.temperature)

    def complete(self, request: ChatRequest) -> ChatResponse:
        return self.backend.complete(request)

    def ask(self, messages: Sequence[tuple[str, str]]) -> str:
        return self.complete(self.request(messages)).content
