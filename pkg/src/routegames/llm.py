"""Chat-completion plumbing: live HTTP backend with retry and rate limiting,
plus deterministic scripted and replay backends for offline runs and tests.

The wire format is the common chat-completions contract: POST a JSON body
with model/temperature/messages, read ``choices[0].message.content`` back.
Credentials are taken from an environment variable, never from config files.
"""
from __future__ import annotations

import json
import os
import threading
import time
import urllib.error
import urllib.request
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .representations import ChatTurn

DEFAULT_MODEL = "gpt-4o-2024-08-06"
DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"

_WIRE_ROLES = {"system": "system", "environment": "user", "agent": "assistant"}


class TransportError(RuntimeError):
    """The live backend ran out of attempts or hit a non-retryable failure."""


class ScriptExhaustedError(RuntimeError):
    """A scripted backend was asked for more responses than it was given."""


class ReplayMissError(KeyError):
    """A replay backend has no stored response for the requested key."""


class RouteParseError(ValueError):
    """No well-formed JSON object with a string "route" field was found."""


class InvalidRouteError(ValueError):
    """The parsed route name is not one of the valid routes."""


@dataclass(frozen=True)
class CompletionRequest:
    model: str
    temperature: float
    messages: tuple[dict[str, str], ...]

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError(f"temperature must be nonnegative, got {self.temperature}")
        if not self.messages or self.messages[0]["role"] != "system":
            raise ValueError("first message must have the system role")


def turns_to_messages(turns: Sequence[ChatTurn]) -> tuple[dict[str, str], ...]:
    """Map context roles onto the wire vocabulary."""
    return tuple({"role": _WIRE_ROLES[t.role], "content": t.content} for t in turns)


@dataclass(frozen=True)
class CompletionResult:
    text: str
    tokens: dict[str, int] | None = None
    latency_s: float = 0.0


@dataclass(frozen=True)
class TranscriptEntry:
    """One completion attempt, keyed by (trial, agent, round, attempt)."""

    trial: str
    agent: int
    round: int
    attempt: int
    request: dict
    response: str | None
    error: str | None = None
    latency_s: float = 0.0
    tokens: dict[str, int] | None = None

    def key(self) -> tuple[str, int, int, int]:
        return (self.trial, self.agent, self.round, self.attempt)


class TranscriptStore:
    """Append-only, thread-safe record of completion attempts."""

    def __init__(self, entries: Iterable[TranscriptEntry] = ()) -> None:
        self._lock = threading.Lock()
        self._entries: list[TranscriptEntry] = []
        self._index: dict[tuple[str, int, int, int], TranscriptEntry] = {}
        for entry in entries:
            self.add(entry)

    def add(self, entry: TranscriptEntry) -> None:
        with self._lock:
            self._entries.append(entry)
            self._index[entry.key()] = entry

    def get(self, trial: str, agent: int, round: int, attempt: int) -> TranscriptEntry:
        try:
            return self._index[(trial, agent, round, attempt)]
        except KeyError:
            raise ReplayMissError(
                f"no transcript entry for trial={trial!r} agent={agent} "
                f"round={round} attempt={attempt}"
            ) from None

    def entries(self) -> tuple[TranscriptEntry, ...]:
        with self._lock:
            return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for entry in self.entries():
                handle.write(json.dumps(entry.__dict__, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> TranscriptStore:
        store = cls()
        with open(path, "r", encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    store.add(TranscriptEntry(**json.loads(line)))
        return store


class RateLimiter:
    """Paces dispatches so at most ``rate`` fall in any 1-second window.

    Implemented as minimum spacing of 1/rate between grants, which is the
    strictest reading of the windowed contract (no bursts).
    """

    def __init__(
        self,
        rate: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        if rate <= 0:
            raise ValueError(f"rate must be positive, got {rate}")
        self.rate = rate
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_allowed = float("-inf")

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            wait = self._next_allowed - now
            grant = max(now, self._next_allowed)
            self._next_allowed = grant + 1.0 / self.rate
        if wait > 0:
            self._sleep(wait)


class ScriptedBackend:
    """Pops queued response texts in order; deterministic, key-agnostic."""

    def __init__(self, responses: Iterable[str]) -> None:
        self._queue = deque(responses)
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest, key=None) -> CompletionResult:
        with self._lock:
            if not self._queue:
                raise ScriptExhaustedError("scripted backend has no responses left")
            return CompletionResult(text=self._queue.popleft())


class ReplayBackend:
    """Serves stored responses keyed by (trial, agent, round, attempt)."""

    def __init__(self, store: TranscriptStore) -> None:
        self._store = store

    def complete(self, request: CompletionRequest, key=None) -> CompletionResult:
        if key is None:
            raise ReplayMissError("replay backend requires a completion key")
        entry = self._store.get(*key)
        if entry.response is None:
            raise ReplayMissError(f"stored attempt {key} failed originally: {entry.error}")
        return CompletionResult(text=entry.response, tokens=entry.tokens)


class LiveBackend:
    """One HTTP round-trip per completion, with exponential backoff on 429/5xx."""

    def __init__(
        self,
        endpoint: str = DEFAULT_ENDPOINT,
        credential_env: str = "OPENAI_API_KEY",
        rate_limiter: RateLimiter | None = None,
        max_attempts: int = 5,
        backoff_base: float = 1.0,
        timeout: float = 60.0,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.endpoint = endpoint
        self.credential_env = credential_env
        self.rate_limiter = rate_limiter
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.timeout = timeout
        self._sleep = sleep

    def _credential(self) -> str:
        value = os.environ.get(self.credential_env)
        if not value:
            raise TransportError(
                f"credential environment variable {self.credential_env!r} is not set"
            )
        return value

    def complete(self, request: CompletionRequest, key=None) -> CompletionResult:
        body = json.dumps(
            {
                "model": request.model,
                "temperature": request.temperature,
                "messages": list(request.messages),
            }
        ).encode("utf-8")
        headers = {
            "Content-Type": "application/json",
            "Authorization": f"Bearer {self._credential()}",
        }
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if self.rate_limiter is not None:
                self.rate_limiter.acquire()
            started = time.monotonic()
            http_request = urllib.request.Request(self.endpoint, data=body, headers=headers)
            try:
                with urllib.request.urlopen(http_request, timeout=self.timeout) as response:
                    payload = json.load(response)
                latency = time.monotonic() - started
                return CompletionResult(
                    text=payload["choices"][0]["message"]["content"],
                    tokens=payload.get("usage"),
                    latency_s=latency,
                )
            except urllib.error.HTTPError as exc:
                last_error = exc
                if exc.code == 429 or 500 <= exc.code < 600:
                    self._sleep(self.backoff_base * 2**attempt)
                    continue
                raise TransportError(f"HTTP {exc.code} from {self.endpoint}") from exc
            except urllib.error.URLError as exc:
                last_error = exc
                self._sleep(self.backoff_base * 2**attempt)
                continue
        raise TransportError(
            f"gave up after {self.max_attempts} attempts: {last_error}"
        ) from last_error


class ChatClient:
    """Backend wrapper that records every attempt (success or failure) in a
    transcript before returning, keyed for deterministic replay."""

    def __init__(self, backend, transcript: TranscriptStore | None = None) -> None:
        self.backend = backend
        self.transcript = transcript

    def complete(
        self, request: CompletionRequest, *, trial: str, agent: int, round: int, attempt: int
    ) -> str:
        key = (trial, agent, round, attempt)
        started = time.monotonic()
        try:
            result = self.backend.complete(request, key=key)
        except Exception as exc:
            self._record(key, request, response=None, error=str(exc), started=started)
            raise
        self._record(
            key,
            request,
            response=result.text,
            error=None,
            started=started,
            tokens=result.tokens,
        )
        return result.text

    def _record(self, key, request, *, response, error, started, tokens=None) -> None:
        if self.transcript is None:
            return
        trial, agent, round_index, attempt = key
        self.transcript.add(
            TranscriptEntry(
                trial=trial,
                agent=agent,
                round=round_index,
                attempt=attempt,
                request={
                    "model": request.model,
                    "temperature": request.temperature,
                    "messages": list(request.messages),
                },
                response=response,
                error=error,
                latency_s=time.monotonic() - started,
                tokens=tokens,
            )
        )


def parse_route(text: str, valid_routes: Sequence[str]) -> str:
    """Extract the route from the last well-formed JSON object in ``text``
    that carries a string "route" field.

    Chain-of-thought answers put reasoning first, so later objects win.
    Fenced code blocks and surrounding prose are tolerated.  The value must
    equal one of ``valid_routes`` exactly (case-sensitive).
    """
    if not valid_routes:
        raise ValueError("valid_routes must be non-empty")
    decoder = json.JSONDecoder()
    route: str | None = None
    position = text.find("{")
    while position != -1:
        try:
            obj, _ = decoder.raw_decode(text, position)
        except ValueError:
            pass
        else:
            if isinstance(obj, dict) and isinstance(obj.get("route"), str):
                route = obj["route"]
        position = text.find("{", position + 1)
    if route is None:
        raise RouteParseError("no JSON object with a string 'route' field in response")
    if route not in valid_routes:
        raise InvalidRouteError(
            f"route {route!r} is not one of {', '.join(valid_routes)}"
        )
    return route
