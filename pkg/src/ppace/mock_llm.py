"""Deterministic mock backend for offline runs and tests.

Two forms, sharing one response function so behaviour is identical:

- in-process: endpoint URLs with a ``mock:`` scheme are answered directly by
  :func:`mock_completion`, no sockets involved;
- HTTP: :class:`MockLLMServer` serves the same responses on a local port with
  optional scripted statuses, per-request delay, and a concurrency counter,
  for exercising the real transport path.

Responses derive from sha256(seed, prompt): the same seed and prompt always
produce the same bytes. Unknown classification prompts get a well-formed
reasoning-plus-categories completion; prompts that ask for a pairwise verdict
get a verdict line. A canned-response table maps sha256(prompt) hex digests
to exact texts and takes precedence.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from functools import lru_cache
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlsplit

_WORDS = (
    "the", "project", "focuses", "on", "transmission", "dynamics", "vaccine",
    "candidates", "clinical", "management", "surveillance", "community",
    "response", "of", "emerging", "pathogens", "and", "health", "systems",
    "capacity", "impact", "prevention", "measures", "ethical", "aspects",
)


def prompt_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def _digest(seed: int, prompt: str) -> bytes:
    return hashlib.sha256(f"{seed}:{prompt}".encode("utf-8")).digest()


def mock_completion(seed: int, prompt: str, table: dict[str, str] | None = None) -> str:
    """Deterministic completion text for any prompt."""
    if table:
        canned = table.get(prompt_key(prompt))
        if canned is not None:
            return canned
    h = _digest(seed, prompt)
    if "### Verdict:" in prompt:
        verdict = ("Response 1", "Response 2", "Response 1", "Tie")[h[0] % 4]
        return f"### Verdict: {verdict}"
    n_categories = 1 + h[0] % 3
    ids = sorted({1 + b % 12 for b in h[1:1 + 3]})[:n_categories]
    n_words = 8 + h[4] % 7
    words = [_WORDS[b % len(_WORDS)] for b in h[5:5 + n_words]]
    rationale = " ".join(words)
    listed = ", ".join(f"'{i}'" for i in ids)
    return f"### Reasoning: {rationale}\n### Categories: {listed}"


@lru_cache(maxsize=32)
def _load_table_cached(path: str) -> dict[str, str]:
    return {str(k): str(v) for k, v in json.loads(Path(path).read_text(encoding="utf-8")).items()}


def mock_params(base_url: str) -> tuple[int, dict[str, str] | None]:
    """Seed and optional canned table from a mock endpoint URL.

    ``mock://local?seed=7&table=/path/to/table.json``
    """
    query = parse_qs(urlsplit(base_url).query)
    seed = int(query.get("seed", ["0"])[0])
    table_path = query.get("table", [None])[0]
    table = _load_table_cached(table_path) if table_path else None
    return seed, table


class _Handler(BaseHTTPRequestHandler):
    server: "MockLLMServer"

    def log_message(self, fmt, *args):  # silence per-request stderr noise
        pass

    def do_POST(self):
        if not self.path.endswith("/chat/completions"):
            self.send_error(404)
            return
        length = int(self.headers.get("Content-Length", "0"))
        body = json.loads(self.rfile.read(length) or b"{}")
        messages = body.get("messages", [])
        prompt = messages[-1].get("content", "") if messages else ""

        srv = self.server
        with srv.lock:
            srv.request_count += 1
            srv.in_flight += 1
            srv.peak_concurrency = max(srv.peak_concurrency, srv.in_flight)
            srv.seen_prompts.append(prompt)
            if prompt in srv.fail_prompts:
                status = 500
            else:
                status = srv.script.pop(0) if srv.script else 200
        try:
            if srv.response_delay:
                time.sleep(srv.response_delay)
            if status != 200:
                payload = json.dumps({"error": {"message": f"scripted {status}"}}).encode()
                self.send_response(status)
            else:
                text = mock_completion(srv.seed, prompt, srv.table)
                payload = json.dumps(
                    {
                        "model": body.get("model", "mock"),
                        "choices": [
                            {"index": 0, "message": {"role": "assistant", "content": text}}
                        ],
                        "usage": {
                            "prompt_tokens": len(prompt.split()),
                            "completion_tokens": len(text.split()),
                        },
                    }
                ).encode()
                self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(payload)))
            self.end_headers()
            self.wfile.write(payload)
        finally:
            with srv.lock:
                srv.in_flight -= 1


class MockLLMServer(ThreadingHTTPServer):
    """Local chat-completions endpoint with scripted failures and instrumentation."""

    def __init__(
        self,
        seed: int = 0,
        table: dict[str, str] | None = None,
        script: list[int] | None = None,
        response_delay: float = 0.0,
        fail_prompts: set[str] | None = None,
    ):
        super().__init__(("127.0.0.1", 0), _Handler)
        self.seed = seed
        self.table = table or {}
        self.script = list(script or [])
        self.response_delay = response_delay
        self.fail_prompts = fail_prompts or set()
        self.lock = threading.Lock()
        self.request_count = 0
        self.in_flight = 0
        self.peak_concurrency = 0
        self.seen_prompts: list[str] = []
        self._thread: threading.Thread | None = None

    @property
    def base_url(self) -> str:
        host, port = self.server_address[:2]
        return f"http://{host}:{port}/v1"

    def start(self) -> "MockLLMServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self.shutdown()
        self.server_close()
        if self._thread:
            self._thread.join(timeout=5)
