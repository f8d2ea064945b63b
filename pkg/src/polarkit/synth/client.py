"""Thin JSON-over-HTTP clients for the chat, translation and embedding services.

Only the OpenAI-compatible subset we need is spoken: a single user message,
``temperature`` and ``max_tokens``, reading ``choices[0].message.content``.
Transport errors, 5xx and 429 responses are retried with full-jitter
exponential backoff.
"""

from __future__ import annotations

import logging
import os
import random
import threading
import time
from typing import Any, Callable

import httpx

from ..errors import TransportError

logger = logging.getLogger(__name__)

LLM_KEY_ENV = "POLAR_LLM_API_KEY"
MT_KEY_ENV = "POLAR_MT_API_KEY"


def _retryable(status: int) -> bool:
    return status == 429 or 500 <= status < 600


class JsonEndpoint:
    def __init__(
        self,
        base_url: str,
        api_key: str | None = None,
        *,
        timeout: float = 60.0,
        max_retries: int = 3,
        backoff_base: float = 1.0,
        backoff_factor: float = 2.0,
        sleep: Callable[[float], None] = time.sleep,
        jitter_seed: int | None = None,
        transport: httpx.BaseTransport | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.backoff_factor = backoff_factor
        self._sleep = sleep
        self._jitter = random.Random(jitter_seed)
        self._lock = threading.Lock()
        self.request_count = 0
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self._http = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def close(self) -> None:
        self._http.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def backoff_delay(self, attempt: int) -> float:
        cap = self.backoff_base * self.backoff_factor ** attempt
        with self._lock:
            return self._jitter.uniform(0.0, cap)

    def post(self, path: str, body: dict[str, Any]) -> Any:
        url = f"{self.base_url}/{path.lstrip('/')}"
        last: str = ""
        status: int | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                delay = self.backoff_delay(attempt - 1)
                logger.debug("retry %d for %s in %.2fs (%s)", attempt, url, delay, last)
                self._sleep(delay)
            with self._lock:
                self.request_count += 1
            try:
                resp = self._http.post(url, json=body)
            except httpx.TransportError as exc:
                last, status = f"{type(exc).__name__}: {exc}", None
                continue
            if resp.status_code < 400:
                try:
                    return resp.json()
                except ValueError:
                    raise TransportError(f"{url}: response is not JSON", resp.status_code) from None
            last, status = f"HTTP {resp.status_code}: {resp.text[:200]}", resp.status_code
            if not _retryable(resp.status_code):
                raise TransportError(f"{url}: {last}", status, attempt + 1)
        raise TransportError(f"{url}: giving up after {self.max_retries + 1} attempts ({last})",
                             status, self.max_retries + 1)


def chat_request_body(model: str, prompt: str, temperature: float, max_tokens: int) -> dict[str, Any]:
    return {
        "model": model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": temperature,
        "max_tokens": max_tokens,
    }


class ChatClient(JsonEndpoint):
    def __init__(self, base_url: str, model: str, api_key: str | None = None, **kwargs: Any):
        if api_key is None:
            api_key = os.environ.get(LLM_KEY_ENV)
        super().__init__(base_url, api_key, **kwargs)
        self.model = model

    def complete(self, prompt: str, temperature: float, max_tokens: int) -> str:
        data = self.post(
            "chat/completions", chat_request_body(self.model, prompt, temperature, max_tokens)
        )
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise TransportError("chat response lacks choices[0].message.content") from None
        return content or ""


class TranslationClient(JsonEndpoint):
    def __init__(self, base_url: str, api_key: str | None = None, **kwargs: Any):
        if api_key is None:
            api_key = os.environ.get(MT_KEY_ENV)
        super().__init__(base_url, api_key, **kwargs)

    def translate(self, text: str, source: str, target: str) -> str:
        data = self.post("translate", {"text": text, "source": source, "target": target})
        if not isinstance(data, dict) or not isinstance(data.get("text"), str):
            raise TransportError('translation response lacks a "text" string')
        return data["text"]
