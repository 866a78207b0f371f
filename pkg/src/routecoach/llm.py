"""Chat-completion clients: a real HTTP endpoint and a scripted mock.

Both expose ``complete(prompt) -> CompletionResult``.  The HTTP client
speaks the common chat-completion wire format (single user message) and
retries transient failures with exponential backoff.  The mock replays
numbered text files from a directory, which keeps every test and report
that needs "model output" fully offline and deterministic.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

import requests

from .prompts import count_tokens

ENV_BASE_URL = "ROUTECOACH_LLM_BASE_URL"
ENV_API_KEY = "ROUTECOACH_LLM_API_KEY"
ENV_MODEL = "ROUTECOACH_LLM_MODEL"
ENV_TIMEOUT = "ROUTECOACH_LLM_TIMEOUT"

MAX_ATTEMPTS = 3
BACKOFF_BASE_SECONDS = 1.0


class LlmError(RuntimeError):
    """Endpoint still failing after the bounded retries."""


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    api_key: str = ""
    model: str = "gpt-3.5-turbo"
    timeout: float = 30.0
    temperature: float = 0.2

    @classmethod
    def from_env(cls) -> "EndpointConfig":
        base_url = os.environ.get(ENV_BASE_URL, "").strip()
        if not base_url:
            raise LlmError(f"{ENV_BASE_URL} is not set; configure the endpoint or use the mock")
        return cls(
            base_url=base_url,
            api_key=os.environ.get(ENV_API_KEY, ""),
            model=os.environ.get(ENV_MODEL, "gpt-3.5-turbo"),
            timeout=float(os.environ.get(ENV_TIMEOUT, "30")),
        )


@dataclass(frozen=True)
class CompletionResult:
    text: str
    token_count: int  # endpoint-reported when available, else whitespace chunks


class ChatCompleter(Protocol):
    def complete(self, prompt: str) -> CompletionResult: ...


class HttpChatCompleter:
    def __init__(self, config: EndpointConfig, *, sleep: Callable[[float], None] = time.sleep):
        self.config = config
        self._sleep = sleep

    def complete(self, prompt: str) -> CompletionResult:
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        headers = {"Content-Type": "application/json"}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        last_error: Exception | None = None
        for attempt in range(MAX_ATTEMPTS):
            try:
                response = requests.post(url, json=payload, headers=headers, timeout=self.config.timeout)
                response.raise_for_status()
                doc = response.json()
                text = doc["choices"][0]["message"]["content"]
                usage = doc.get("usage") or {}
                tokens = usage.get("total_tokens")
                if tokens is None:
                    tokens = count_tokens(prompt) + count_tokens(text)
                return CompletionResult(text=text, token_count=int(tokens))
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
                if attempt < MAX_ATTEMPTS - 1:
                    self._sleep(BACKOFF_BASE_SECONDS * 2**attempt)
        raise LlmError(f"chat endpoint failed after {MAX_ATTEMPTS} attempts: {last_error}") from last_error


def llm_generate(prompt: str, config: EndpointConfig, **kwargs) -> CompletionResult:
    """One-shot completion against a configured endpoint."""
    return HttpChatCompleter(config, **kwargs).complete(prompt)


class MockChatCompleter:
    """Replays numbered ``*.txt`` files from a directory, in sorted order.

    Once the scripts run out the last one repeats, so long runs stay
    deterministic without having to count regeneration events up front.
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self._files = sorted(self.directory.glob("*.txt"))
        if not self._files:
            raise LlmError(f"mock directory {self.directory} has no .txt scripts")
        self._cursor = 0

    def complete(self, prompt: str) -> CompletionResult:
        path = self._files[min(self._cursor, len(self._files) - 1)]
        self._cursor += 1
        text = path.read_text()
        return CompletionResult(text=text, token_count=count_tokens(prompt) + count_tokens(text))
