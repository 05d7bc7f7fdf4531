"""Client for OpenAI-compatible chat-completion endpoints.

One POST to ``{base_url}/chat/completions`` per prompt, the prompt sent as a
single user message. Generation parameters are passed through opaquely at the
top level of the request body, so backend-specific knobs (beam counts,
temperature, token limits) reach backends that understand them and are
ignored elsewhere. Endpoints with a ``mock:`` URL scheme are answered
in-process by the deterministic mock backend.

Auth tokens are read from the environment at request time and never stored on
the config object, so config snapshots and manifests cannot leak them.
"""

from __future__ import annotations

import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import httpx

from . import mock_llm
from .errors import PpaceError

_TRANSIENT_STATUSES = {429, 500, 502, 503, 504}


class GatewayError(PpaceError):
    pass


class AuthMissingError(GatewayError):
    def __init__(self, env_name: str):
        self.env_name = env_name
        super().__init__(f"auth environment variable {env_name} is not set")


class ExhaustedError(GatewayError):
    def __init__(self, detail: str, attempts: int):
        self.attempts = attempts
        super().__init__(f"gave up after {attempts} attempt(s): {detail}")


class RequestRejectedError(GatewayError):
    """Non-transient HTTP failure; retrying would not help."""


class MalformedResponseError(GatewayError):
    pass


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 4
    backoff_base: float = 1.0
    backoff_factor: float = 2.0
    jitter: float = 0.2

    def delay(self, attempt: int) -> float:
        base = self.backoff_base * (self.backoff_factor ** attempt)
        return base * (1.0 + self.jitter * (2.0 * random.random() - 1.0))


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    model_name: str
    auth_env: str | None = None
    gen_params: dict = field(default_factory=dict)
    max_in_flight: int = 4
    retry: RetryPolicy = field(default_factory=RetryPolicy)
    timeout: float = 30.0

    def __post_init__(self):
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.retry.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")

    @property
    def is_mock(self) -> bool:
        return self.base_url.startswith("mock:")


@dataclass
class CompletionResult:
    raw_text: str
    model_name: str
    latency: float
    attempt_count: int
    usage: dict | None = None


def _bearer_token(config: EndpointConfig) -> str | None:
    if config.auth_env is None:
        return None
    token = os.environ.get(config.auth_env)
    if not token:
        raise AuthMissingError(config.auth_env)
    return token


def _extract_text(payload: dict) -> str:
    try:
        return payload["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise MalformedResponseError(f"no choices[0].message.content: {exc}") from exc


def complete(prompt: str, config: EndpointConfig, client: httpx.Client | None = None) -> CompletionResult:
    """Single completion with retries on transient failures (429/5xx, timeouts)."""
    if not prompt:
        raise ValueError("prompt must be non-empty")
    started = time.monotonic()

    if config.is_mock:
        seed, table = mock_llm.mock_params(config.base_url)
        text = mock_llm.mock_completion(seed, prompt, table)
        return CompletionResult(
            raw_text=text,
            model_name=config.model_name,
            latency=time.monotonic() - started,
            attempt_count=1,
            usage={"prompt_tokens": len(prompt.split()), "completion_tokens": len(text.split())},
        )

    token = _bearer_token(config)
    headers = {"Content-Type": "application/json"}
    if token:
        headers["Authorization"] = f"Bearer {token}"
    body = {
        "model": config.model_name,
        "messages": [{"role": "user", "content": prompt}],
        **config.gen_params,
    }
    url = config.base_url.rstrip("/") + "/chat/completions"

    own_client = client is None
    http = client or httpx.Client(timeout=config.timeout)
    last_detail = "no attempt made"
    try:
        for attempt in range(1, config.retry.max_attempts + 1):
            try:
                response = http.post(url, json=body, headers=headers)
            except httpx.HTTPError as exc:
                last_detail = f"{type(exc).__name__}: {exc}"
            else:
                if response.status_code == 200:
                    try:
                        payload = response.json()
                    except ValueError as exc:
                        raise MalformedResponseError(f"response body is not JSON: {exc}") from exc
                    return CompletionResult(
                        raw_text=_extract_text(payload),
                        model_name=config.model_name,
                        latency=time.monotonic() - started,
                        attempt_count=attempt,
                        usage=payload.get("usage"),
                    )
                if response.status_code not in _TRANSIENT_STATUSES:
                    raise RequestRejectedError(f"HTTP {response.status_code}")
                last_detail = f"HTTP {response.status_code}"
            if attempt < config.retry.max_attempts:
                time.sleep(config.retry.delay(attempt - 1))
        raise ExhaustedError(last_detail, attempts=config.retry.max_attempts)
    finally:
        if own_client:
            http.close()


def complete_batch(
    prompts: list[str], config: EndpointConfig, client: httpx.Client | None = None
) -> list[CompletionResult | GatewayError]:
    """Complete a batch with at most ``max_in_flight`` concurrent requests.

    Results align index-by-index with the inputs; a failing item yields its
    error object in place, never aborting the rest of the batch.
    """
    if not prompts:
        return []
    own_client = client is None and not config.is_mock
    http = client if client is not None else (httpx.Client(timeout=config.timeout) if own_client else None)

    def one(prompt: str) -> CompletionResult | GatewayError:
        try:
            return complete(prompt, config, client=http)
        except GatewayError as exc:
            return exc

    try:
        with ThreadPoolExecutor(max_workers=config.max_in_flight) as pool:
            return list(pool.map(one, prompts))
    finally:
        if own_client and http is not None:
            http.close()
