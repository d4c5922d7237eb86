"""Pluggable model backends for the five pipeline roles.

Roles: ``vision`` (frame captioning), ``asr`` (speech transcription),
``audio_events`` (audio event localization), ``reasoner`` (all text script
processing) and ``judge`` (answer grading).

Two backends per role:

* ``http``: a chat-completion style endpoint. Request body is
  ``{"model": ..., "messages": [{"role": "user", "content": [parts...]}],
  "max_tokens": ...}`` where parts are ``{"type": "text", "text": ...}`` or
  ``{"type": "image_url", "image_url": {"url": "data:..."}}`` (audio is sent
  as a base64 data URI in a text part). The response may be either
  ``{"content": "..."}`` or the OpenAI ``choices[0].message.content`` shape.
  Credentials come from an env var named in the config (``SW_API_KEY_<ROLE>``
  by default) and are never written to config files.

* ``mock``: hermetic, deterministic. Without a script, the reply is a pure
  function of (input digest, seed). A script file can pin replies; schema:

  ``[{"role": "vision", "match": {"ordinal": 0}, "response": "..."}, ...]``

  ``match`` is either ``{"ordinal": N}`` (the N-th call for that role within
  the process, 0-based) or ``{"digest": "<sha256 prefix>"}`` of the canonical
  input. ``response`` may be any JSON value; non-strings are serialized to
  compact JSON. ``"error": "unavailable" | "rejected"`` instead of
  ``response`` makes the call raise, for failure-path testing.
"""

from __future__ import annotations

import base64
import hashlib
import json
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import requests

from .errors import (
    ConfigError,
    ProviderMalformedOutput,
    ProviderRejected,
    ProviderUnavailable,
)
from .parsing import canonical_json
from .telemetry import PROVIDER_CALLS, counters

ROLES = ("vision", "asr", "audio_events", "reasoner", "judge")


@dataclass(frozen=True)
class Part:
    """One content part of a provider request."""

    kind: str  # text | image | audio
    text: str = ""
    data: bytes = b""

    @staticmethod
    def from_text(text: str) -> "Part":
        return Part(kind="text", text=text)

    @staticmethod
    def from_image(data: bytes) -> "Part":
        return Part(kind="image", data=data)

    @staticmethod
    def from_audio(data: bytes) -> "Part":
        return Part(kind="audio", data=data)


def parts_digest(parts: Sequence[Part], seed: int = 0) -> str:
    """Canonical digest of a request; the identity mocks key off."""
    hasher = hashlib.sha256()
    hasher.update(f"seed={seed}\n".encode())
    for part in parts:
        hasher.update(part.kind.encode())
        hasher.update(b"\x00")
        if part.kind == "text":
            hasher.update(hashlib.sha256(part.text.encode()).digest())
        else:
            hasher.update(hashlib.sha256(part.data).digest())
        hasher.update(b"\n")
    return hasher.hexdigest()


@dataclass(frozen=True)
class BackendConfig:
    kind: str = "mock"  # mock | http
    model: str = "mock"
    endpoint: str = ""  # http base URL
    path: str = "/v1/chat/completions"
    api_key_env: str = ""
    timeout: float = 30.0
    retries: int = 2
    backoff: float = 0.2
    max_parallel: int = 4
    max_tokens: int = 1024
    script: str = ""  # mock script file
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "model": self.model,
            "endpoint": self.endpoint,
            "path": self.path,
            "api_key_env": self.api_key_env,
            "timeout": self.timeout,
            "retries": self.retries,
            "backoff": self.backoff,
            "max_parallel": self.max_parallel,
            "max_tokens": self.max_tokens,
            "script": self.script,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ProviderProfile:
    """Binding of each role to a concrete backend."""

    backends: Mapping[str, BackendConfig] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "backends", dict(self.backends))
        missing = [role for role in ROLES if role not in self.backends]
        extra = [role for role in self.backends if role not in ROLES]
        if missing:
            raise ConfigError(f"provider profile missing roles: {', '.join(missing)}")
        if extra:
            raise ConfigError(f"provider profile has unknown roles: {', '.join(extra)}")

    def backend(self, role: str) -> BackendConfig:
        return self.backends[role]

    def to_dict(self) -> dict:
        return {role: self.backends[role].to_dict() for role in ROLES}

    def digest(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()

    @staticmethod
    def offline(seed: int = 0, scripts: Mapping[str, str] | None = None) -> "ProviderProfile":
        scripts = scripts or {}
        return ProviderProfile(
            {
                role: BackendConfig(kind="mock", seed=seed, script=scripts.get(role, ""))
                for role in ROLES
            }
        )


class ProviderClient(ABC):
    """A single role's backend. Implementations must be thread-safe."""

    def __init__(self, role: str, max_parallel: int = 4):
        self.role = role
        self.max_parallel = max(1, int(max_parallel))

    @abstractmethod
    def complete(self, parts: Sequence[Part], max_tokens: int | None = None) -> str:
        """Run one request and return the model's text reply."""


@dataclass(frozen=True)
class MockRule:
    role: str
    ordinal: int | None = None
    digest: str | None = None
    response: str | None = None
    error: str | None = None


def load_mock_rules(path: str | Path) -> list[MockRule]:
    """Load a mock script file (schema in the module docstring)."""
    try:
        records = json.loads(Path(path).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read mock script {path}: {exc}") from exc
    if not isinstance(records, list):
        raise ConfigError(f"mock script {path}: top level must be a JSON array")
    rules = []
    for i, record in enumerate(records):
        if not isinstance(record, dict) or "role" not in record:
            raise ConfigError(f"mock script {path}: record {i} needs a 'role'")
        match = record.get("match", {})
        ordinal = match.get("ordinal")
        digest = match.get("digest")
        if ordinal is None and digest is None:
            raise ConfigError(f"mock script {path}: record {i} needs match.ordinal or match.digest")
        response = record.get("response")
        if response is not None and not isinstance(response, str):
            response = canonical_json(response)
        error = record.get("error")
        if error not in (None, "unavailable", "rejected"):
            raise ConfigError(f"mock script {path}: record {i} has unknown error {error!r}")
        if response is None and error is None:
            raise ConfigError(f"mock script {path}: record {i} needs 'response' or 'error'")
        rules.append(MockRule(role=record["role"], ordinal=ordinal, digest=digest,
                              response=response, error=error))
    return rules


_DEFAULT_SHAPES = {
    # Unscripted ASR/audio-events replies must parse as empty result lists so
    # an unscripted offline run degrades to "no dialogue" instead of erroring.
    "asr": lambda d: "[]",
    "audio_events": lambda d: "[]",
    "vision": lambda d: f"Synthetic frame content {d[:12]}.",
    "reasoner": lambda d: f"Synthetic reasoner reply {d[:12]}.",
    "judge": lambda d: f"Synthetic judge reply {d[:12]}.",
}


class MockClient(ProviderClient):
    """Deterministic in-process backend; replies are pure in (digest, seed).

    Ordinal matching counts calls per role across the whole process, not per
    client instance: pipeline stages construct their own clients from the
    profile, and a script like "reasoner call 0 answers X, call 1 answers Y"
    must keep meaning "the first and second reasoner calls of the run".
    Tests isolate themselves with :func:`MockClient.reset_ordinals`.
    """

    _ordinals: dict[str, int] = {}
    _ordinals_lock = threading.Lock()

    def __init__(
        self,
        role: str,
        *,
        rules: Sequence[MockRule] = (),
        responses: Sequence[str] = (),
        seed: int = 0,
        max_parallel: int = 4,
    ):
        super().__init__(role, max_parallel)
        self.seed = seed
        self._rules = [r for r in rules if r.role == role]
        self._responses = list(responses)

    @classmethod
    def from_backend(cls, cfg: BackendConfig, role: str) -> "MockClient":
        rules = load_mock_rules(cfg.script) if cfg.script else ()
        return cls(role, rules=rules, seed=cfg.seed, max_parallel=cfg.max_parallel)

    @classmethod
    def reset_ordinals(cls) -> None:
        with cls._ordinals_lock:
            cls._ordinals.clear()

    @classmethod
    def _next_ordinal(cls, role: str) -> int:
        with cls._ordinals_lock:
            ordinal = cls._ordinals.get(role, 0)
            cls._ordinals[role] = ordinal + 1
            return ordinal

    def complete(self, parts: Sequence[Part], max_tokens: int | None = None) -> str:
        counters.increment(PROVIDER_CALLS)
        digest = parts_digest(parts, self.seed)
        ordinal = self._next_ordinal(self.role)
        rule = self._find_rule(digest, ordinal)
        if rule is not None:
            if rule.error == "unavailable":
                raise ProviderUnavailable(f"mock {self.role}: scripted outage")
            if rule.error == "rejected":
                raise ProviderRejected(f"mock {self.role}: scripted rejection")
            return rule.response or ""
        if ordinal < len(self._responses):
            return self._responses[ordinal]
        return _DEFAULT_SHAPES[self.role](digest)

    def _find_rule(self, digest: str, ordinal: int) -> MockRule | None:
        for rule in self._rules:
            if rule.digest is not None and digest.startswith(rule.digest):
                return rule
        for rule in self._rules:
            if rule.digest is None and rule.ordinal == ordinal:
                return rule
        return None


class HttpClient(ProviderClient):
    """Chat-completion style HTTP backend (contract in module docstring)."""

    def __init__(self, role: str, cfg: BackendConfig):
        super().__init__(role, cfg.max_parallel)
        if not cfg.endpoint:
            raise ConfigError(f"providers.{role}: http backend needs an endpoint")
        self.cfg = cfg

    def complete(self, parts: Sequence[Part], max_tokens: int | None = None) -> str:
        counters.increment(PROVIDER_CALLS)
        payload = {
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": [_wire_part(p) for p in parts]}],
            "max_tokens": max_tokens or self.cfg.max_tokens,
        }
        headers = {"Content-Type": "application/json"}
        api_key = self._api_key()
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        url = self.cfg.endpoint.rstrip("/") + self.cfg.path
        last_error: Exception | None = None
        for attempt in range(self.cfg.retries + 1):
            if attempt:
                time.sleep(self.cfg.backoff * attempt)
            try:
                response = requests.post(url, json=payload, headers=headers,
                                         timeout=self.cfg.timeout)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if response.status_code in (401, 402, 403, 429):
                raise ProviderRejected(
                    f"{self.role} backend rejected request: HTTP {response.status_code}"
                )
            if response.status_code >= 500:
                last_error = ProviderUnavailable(
                    f"{self.role} backend HTTP {response.status_code}"
                )
                continue
            if response.status_code != 200:
                raise ProviderRejected(
                    f"{self.role} backend unexpected HTTP {response.status_code}"
                )
            return _parse_reply(response, self.role)
        raise ProviderUnavailable(
            f"{self.role} backend unreachable after {self.cfg.retries + 1} attempts: {last_error}"
        )

    def _api_key(self) -> str:
        import os

        env = self.cfg.api_key_env or f"SW_API_KEY_{self.role.upper()}"
        return os.environ.get(env, "")


def _wire_part(part: Part) -> dict:
    if part.kind == "text":
        return {"type": "text", "text": part.text}
    if part.kind == "image":
        uri = "data:image/png;base64," + base64.b64encode(part.data).decode()
        return {"type": "image_url", "image_url": {"url": uri}}
    if part.kind == "audio":
        uri = "data:audio/wav;base64," + base64.b64encode(part.data).decode()
        return {"type": "text", "text": uri}
    raise ValueError(f"unknown part kind {part.kind!r}")


def _parse_reply(response: requests.Response, role: str) -> str:
    try:
        body = response.json()
    except ValueError as exc:
        raise ProviderMalformedOutput(f"{role} backend returned non-JSON body") from exc
    if isinstance(body, dict):
        if isinstance(body.get("content"), str):
            return body["content"]
        choices = body.get("choices")
        if isinstance(choices, list) and choices:
            message = choices[0].get("message", {})
            if isinstance(message, dict) and isinstance(message.get("content"), str):
                return message["content"]
    raise ProviderMalformedOutput(f"{role} backend reply has no text content")


def make_client(cfg: BackendConfig, role: str) -> ProviderClient:
    if cfg.kind == "mock":
        return MockClient.from_backend(cfg, role)
    if cfg.kind == "http":
        return HttpClient(role, cfg)
    raise ConfigError(f"providers.{role}.kind: unknown backend {cfg.kind!r}")


def make_clients(profile: ProviderProfile) -> dict[str, ProviderClient]:
    return {role: make_client(profile.backend(role), role) for role in ROLES}
