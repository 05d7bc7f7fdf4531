import json
import threading

import pytest

from ppace.gateway import (
    AuthMissingError,
    CompletionResult,
    EndpointConfig,
    ExhaustedError,
    GatewayError,
    RequestRejectedError,
    RetryPolicy,
    complete,
    complete_batch,
)
from ppace.mock_llm import MockLLMServer, mock_completion, prompt_key
from ppace.output_parser import STRICT, parse

FAST_RETRY = RetryPolicy(max_attempts=4, backoff_base=0.01, backoff_factor=2.0, jitter=0.2)


@pytest.fixture()
def server():
    srv = MockLLMServer(seed=7).start()
    yield srv
    srv.stop()


def _config(srv, **kwargs) -> EndpointConfig:
    defaults = dict(base_url=srv.base_url, model_name="mock-model", retry=FAST_RETRY, timeout=5.0)
    defaults.update(kwargs)
    return EndpointConfig(**defaults)


def test_mock_url_completion_with_table(tmp_path):
    table = {prompt_key("ping"): "pong"}
    table_path = tmp_path / "table.json"
    table_path.write_text(json.dumps(table), encoding="utf-8")
    config = EndpointConfig(base_url=f"mock://local?seed=0&table={table_path}",
                            model_name="mock-model")
    result = complete("ping", config)
    assert result.raw_text == "pong"
    assert result.attempt_count == 1


def test_http_roundtrip(server):
    result = complete("classify this", _config(server))
    assert isinstance(result, CompletionResult)
    assert result.raw_text.startswith("### Reasoning:")
    assert result.usage["completion_tokens"] > 0


def test_table_hit_over_http(tmp_path):
    srv = MockLLMServer(seed=0, table={prompt_key("ping"): "pong"}).start()
    try:
        assert complete("ping", _config(srv)).raw_text == "pong"
    finally:
        srv.stop()


def test_retry_on_429_then_success():
    srv = MockLLMServer(seed=1, script=[429, 200]).start()
    try:
        result = complete("hello", _config(srv))
        assert result.attempt_count == 2
        assert srv.request_count == 2
    finally:
        srv.stop()


def test_exhausted_after_max_attempts():
    srv = MockLLMServer(seed=1, script=[500, 500, 500, 500]).start()
    try:
        with pytest.raises(ExhaustedError) as err:
            complete("hello", _config(srv))
        assert err.value.attempts == 4
        assert srv.request_count == 4
    finally:
        srv.stop()


def test_non_transient_status_fails_fast():
    srv = MockLLMServer(seed=1, script=[404]).start()
    try:
        with pytest.raises(RequestRejectedError):
            complete("hello", _config(srv))
        assert srv.request_count == 1
    finally:
        srv.stop()


def test_auth_missing_before_any_request(server, monkeypatch):
    monkeypatch.delenv("PPACE_TEACHER_TOKEN", raising=False)
    config = _config(server, auth_env="PPACE_TEACHER_TOKEN")
    with pytest.raises(AuthMissingError):
        complete("hello", config)
    assert server.request_count == 0


def test_auth_header_sent_when_present(server, monkeypatch):
    monkeypatch.setenv("PPACE_TEACHER_TOKEN", "secret-token")
    result = complete("hello", _config(server, auth_env="PPACE_TEACHER_TOKEN"))
    assert result.raw_text


def test_config_never_carries_the_token(server, monkeypatch):
    monkeypatch.setenv("PPACE_TEACHER_TOKEN", "secret-token")
    config = _config(server, auth_env="PPACE_TEACHER_TOKEN")
    assert "secret-token" not in repr(config)


def test_batch_preserves_input_order(server):
    prompts = [f"prompt {i}" for i in range(5)]
    config = _config(server, max_in_flight=2)
    results = complete_batch(prompts, config)
    assert len(results) == 5
    expected = [mock_completion(7, p) for p in prompts]
    assert [r.raw_text for r in results] == expected


def test_batch_order_stable_under_reversed_timing(server):
    # later prompts answered faster than earlier ones: order must not change
    server.response_delay = 0.0
    prompts = [f"p{i}" for i in range(6)]
    slow_first = {prompt_key("p0"): "### Reasoning: slow\n### Categories: '1'"}
    server.table = slow_first
    config = _config(server, max_in_flight=6)
    results = complete_batch(prompts, config)
    assert [r.raw_text for r in results][0].endswith("'1'")
    assert [not isinstance(r, GatewayError) for r in results] == [True] * 6


def test_batch_isolates_per_item_failures():
    # item 3 always fails: its slot carries the error, the rest succeed
    srv = MockLLMServer(seed=2, fail_prompts={"q2"}).start()
    try:
        config = EndpointConfig(
            base_url=srv.base_url, model_name="m",
            retry=RetryPolicy(max_attempts=2, backoff_base=0.01), max_in_flight=2, timeout=5.0,
        )
        results = complete_batch([f"q{i}" for i in range(5)], config)
        assert [isinstance(r, CompletionResult) for r in results] == [
            True, True, False, True, True,
        ]
        assert isinstance(results[2], ExhaustedError)
    finally:
        srv.stop()


def test_peak_concurrency_bounded():
    srv = MockLLMServer(seed=3, response_delay=0.05).start()
    try:
        config = EndpointConfig(
            base_url=srv.base_url, model_name="m", max_in_flight=2,
            retry=FAST_RETRY, timeout=5.0,
        )
        complete_batch([f"c{i}" for i in range(8)], config)
        assert srv.peak_concurrency <= 2
    finally:
        srv.stop()


def test_mock_determinism_same_seed_same_prompt():
    assert mock_completion(9, "alpha") == mock_completion(9, "alpha")
    assert mock_completion(9, "alpha") != mock_completion(10, "alpha")


def test_mock_generations_always_strict_parseable():
    for i in range(1000):
        text = mock_completion(7, f"generated prompt {i}")
        parsed = parse(text, STRICT)
        assert parsed.categories and all(1 <= c <= 12 for c in parsed.categories)


def test_mock_verdict_shape():
    text = mock_completion(4, "judge this pair ### Verdict: format")
    assert text.startswith("### Verdict: ")


def test_empty_prompt_rejected():
    config = EndpointConfig(base_url="mock://local", model_name="m")
    with pytest.raises(ValueError):
        complete("", config)


def test_config_validation():
    with pytest.raises(ValueError):
        EndpointConfig(base_url="mock://", model_name="m", max_in_flight=0)
    with pytest.raises(ValueError):
        EndpointConfig(base_url="mock://", model_name="m",
                       retry=RetryPolicy(max_attempts=0))
