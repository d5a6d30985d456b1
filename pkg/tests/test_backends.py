import json
import random
import threading
import time
from types import SimpleNamespace

import httpx
import pytest

from ontology_harness.core.errors import BackendError, BackendTimeoutError, ConfigurationError, IntegrityError
from ontology_harness.core.models import BackendConfig, BackendKind, ModelFamily, RawResponse, RenderedPrompt
from ontology_harness.backends import (BackendClient, RateLimiter, ResponseCache, cache_key, check_compatible,
                                       dispatch, invoke_cached, iter_dispatch, read_responses, response_to_dict)
from ontology_harness.utils.jsonl import write_jsonl

PROMPT = RenderedPrompt(template_id="A.wordnet.causal.1", item_id="wordnet:test:cat.n.01",
                        text="cat is a")
MASKED = RenderedPrompt(template_id="A.wordnet.masked.1", item_id="wordnet:test:cat.n.01",
                        text="cat POS is a [MASK] .", mask_token_used="[MASK]")


def wire_config(kind=BackendKind.COMPLETION, **overrides):
    values = {"backend_id": "wire", "kind": kind, "model_name": "test-model",
              "endpoint_url": "http://llm.test/v1", "max_retries": 2, "backoff_seconds": 0.5}
    values.update(overrides)
    return BackendConfig(**values)


def completion(text):
    return httpx.Response(200, json={"choices": [{"text": text}]})


class Recorder:
    """MockTransport handler replaying scripted responses and keeping the requests it saw."""

    def __init__(self, *replies):
        self.replies = list(replies)
        self.requests = []

    def __call__(self, request):
        self.requests.append(request)
        reply = self.replies.pop(0) if len(self.replies) > 1 else self.replies[0]
        if isinstance(reply, Exception):
            raise reply
        return reply


def client_for(config, handler, sleeps=None):
    return BackendClient(config, transport=httpx.MockTransport(handler),
                         sleep=(sleeps.append if sleeps is not None else lambda _: None))


class TestBackendClient:
    def test_completion_request(self, monkeypatch):
        monkeypatch.setenv("TEST_LLM_KEY", "secret")
        handler = Recorder(completion(" noun"))
        client = client_for(wire_config(api_key_env="TEST_LLM_KEY"), handler)

        response = client.invoke(PROMPT)
        assert response.text == " noun"
        assert response.backend_id == "wire"
        request = handler.requests[0]
        assert request.url.path == "/v1/completions"
        assert request.headers["Authorization"] == "Bearer secret"
        assert json.loads(request.content) == {"model": "test-model", "prompt": "cat is a", "temperature": 0.0,
                                               "max_tokens": 16}

    def test_chat_request(self):
        handler = Recorder(httpx.Response(200, json={"choices": [{"message": {"content": "a noun"}}]}))
        client = client_for(wire_config(BackendKind.CHAT), handler)

        assert client.invoke(PROMPT).text == "a noun"
        assert handler.requests[0].url.path == "/v1/chat/completions"
        assert json.loads(handler.requests[0].content)["messages"] == [{"role": "user", "content": "cat is a"}]

    def test_fill_mask_tokens_are_ranked(self):
        handler = Recorder(httpx.Response(200, json={"tokens": [{"token": "verb", "score": 0.1},
                                                               {"token": "noun", "score": 0.8}]}))
        client = client_for(wire_config(BackendKind.FILL_MASK, endpoint_url="http://mask.test"), handler)

        response = client.invoke(MASKED)
        assert response.ranked_tokens == (("noun", 0.8), ("verb", 0.1))
        assert handler.requests[0].url.path == "/fill-mask"
        assert json.loads(handler.requests[0].content)["mask_token"] == "[MASK]"

    def test_retries_server_errors_with_backoff(self):
        sleeps = []
        handler = Recorder(httpx.Response(503, text="busy"), httpx.Response(429), completion("noun"))
        client = client_for(wire_config(), handler, sleeps)

        assert client.invoke(PROMPT).text == "noun"
        assert client.request_count == 3
        assert sleeps == [0.5, 1.0]

    def test_timeout_after_retries(self):
        sleeps = []
        handler = Recorder(httpx.ReadTimeout("too slow"))
        client = client_for(wire_config(max_retries=1), handler, sleeps)

        with pytest.raises(BackendTimeoutError):
            client.invoke(PROMPT)
        assert client.request_count == 2
        assert sleeps == [0.5]

    def test_client_errors_are_not_retried(self):
        sleeps = []
        handler = Recorder(httpx.Response(401, text="bad key"))
        client = client_for(wire_config(), handler, sleeps)

        with pytest.raises(BackendError) as info:
            client.invoke(PROMPT)
        assert info.value.status == 401
        assert "bad key" in str(info.value)
        assert client.request_count == 1
        assert sleeps == []

    def test_unexpected_shape(self):
        client = client_for(wire_config(), Recorder(httpx.Response(200, json={"result": "noun"})))
        with pytest.raises(BackendError):
            client.invoke(PROMPT)

    def test_configuration_checks(self):
        with pytest.raises(ConfigurationError):
            BackendClient(wire_config(endpoint_url=None))
        with pytest.raises(ConfigurationError):
            BackendClient(BackendConfig("echo", BackendKind.STUB_ECHO_GOLD, "echo", endpoint_url="http://x"))

    def test_family_compatibility(self):
        check_compatible(wire_config(BackendKind.FILL_MASK), ModelFamily.MASKED)
        with pytest.raises(ConfigurationError):
            check_compatible(wire_config(), ModelFamily.MASKED)
        with pytest.raises(ConfigurationError):
            check_compatible(wire_config(BackendKind.FILL_MASK), ModelFamily.SEQ2SEQ)
        client = client_for(wire_config(), Recorder(completion("noun")))
        with pytest.raises(ConfigurationError):
            client.invoke(MASKED)


class TestStubs:
    def test_echo_gold(self):
        client = BackendClient(BackendConfig("echo", BackendKind.STUB_ECHO_GOLD, "echo"),
                               oracle={PROMPT.item_id: "noun"})
        assert client.invoke(PROMPT).text == "noun"
        assert client.invoke(MASKED).ranked_tokens == (("noun", 1.0),)
        assert client.request_count == 0

    def test_echo_needs_gold(self):
        echo = BackendConfig("echo", BackendKind.STUB_ECHO_GOLD, "echo")
        with pytest.raises(ConfigurationError):
            BackendClient(echo).invoke(PROMPT)
        with pytest.raises(IntegrityError):
            BackendClient(echo, oracle={}).invoke(PROMPT)

    def test_constant(self):
        client = BackendClient(BackendConfig("always-true", BackendKind.STUB_CONSTANT, "always-true",
                                             stub_constant_text="true"))
        assert client.invoke(PROMPT).text == "true"


class TestResponseCache:
    def test_key_covers_generation_settings(self):
        base = wire_config()
        assert cache_key(base, PROMPT) == cache_key(wire_config(max_retries=0), PROMPT)
        assert cache_key(base, PROMPT) != cache_key(wire_config(temperature=0.7), PROMPT)
        assert cache_key(base, PROMPT) != cache_key(wire_config(model_name="other"), PROMPT)

    def test_distinct_prompts_get_distinct_keys(self):
        config = wire_config()
        rng = random.Random(7)
        words = ["dog", "lake", "heart", "city", "verb", "organism", "stream", "Canis"]
        texts = set()
        while len(texts) < 1000:
            texts.add(" ".join(rng.choice(words) for _ in range(rng.randint(1, 6))) + f" is a {len(texts)}")
        prompts = [RenderedPrompt(template_id="A.wordnet.causal.1", item_id=f"wordnet:test:{i}", text=text)
                   for i, text in enumerate(sorted(texts))]

        keys = {cache_key(config, prompt) for prompt in prompts}
        assert len(keys) == 1000
        assert all(len(key) == 64 for key in keys)

    def test_same_text_shares_a_key(self):
        other_item = RenderedPrompt(template_id="A.wordnet.causal.5", item_id="wordnet:test:x", text=PROMPT.text)
        assert cache_key(wire_config(), PROMPT) == cache_key(wire_config(), other_item)

    def test_hits_after_first_call(self, tmp_path):
        handler = Recorder(completion("noun"))
        client = client_for(wire_config(), handler)
        with ResponseCache(tmp_path, "wire") as cache:
            first = invoke_cached(client, PROMPT, cache)
            second = invoke_cached(client, PROMPT, cache)

        assert (first.from_cache, second.from_cache) == (False, True)
        assert second.text == "noun"
        assert len(handler.requests) == 1
        assert (cache.hits, cache.misses) == (1, 1)

    def test_reopen_uses_index(self, tmp_path):
        response = RawResponse(PROMPT.item_id, PROMPT.template_id, "wire", ranked_tokens=(("noun", 0.9),))
        with ResponseCache(tmp_path, "wire") as cache:
            cache.put("k1", response)

        index = json.loads((tmp_path / "wire.idx.json").read_text(encoding="utf-8"))
        assert index["offsets"] == {"k1": 0}
        with ResponseCache(tmp_path, "wire") as reopened:
            assert reopened.get("k1")["ranked_tokens"] == [["noun", 0.9]]
            assert reopened.corrupt_entries == 0

    def test_corrupt_lines_are_misses(self, tmp_path):
        response = RawResponse(PROMPT.item_id, PROMPT.template_id, "wire", text="noun")
        with ResponseCache(tmp_path, "wire") as cache:
            cache.put("k1", response)
        with open(tmp_path / "wire.jsonl", "a", encoding="utf-8") as handle:
            handle.write('{"key": "k2", "text": \n')

        with ResponseCache(tmp_path, "wire") as reopened:
            assert reopened.corrupt_entries == 1
            assert reopened.get("k2") is None
            assert reopened.get("k1")["text"] == "noun"

    def test_many_keys(self, tmp_path):
        with ResponseCache(tmp_path, "wire") as cache:
            for i in range(1000):
                cache.put(f"key-{i}", RawResponse(f"item-{i}", "t.1", "wire", text=str(i)))
        with ResponseCache(tmp_path, "wire") as reopened:
            assert len(reopened) == 1000
            assert reopened.get("key-737")["text"] == "737"


class FakeClient:
    """Answers prompts after a short pause while tracking how many calls overlap."""

    def __init__(self, fail_on=None):
        self.config = SimpleNamespace(backend_id="fake")
        self.fail_on = fail_on
        self.active = 0
        self.peak = 0
        self._lock = threading.Lock()

    def invoke(self, prompt, family=None):
        with self._lock:
            self.active += 1
            self.peak = max(self.peak, self.active)
        try:
            time.sleep(0.005)
            if prompt.item_id == self.fail_on:
                raise BackendError("boom", 500)
            return RawResponse(prompt.item_id, prompt.template_id, "fake", text=prompt.text)
        finally:
            with self._lock:
                self.active -= 1


def prompts(count):
    return [RenderedPrompt(template_id="t.1", item_id=f"item-{i:03d}", text=f"prompt {i}") for i in range(count)]


class TestDispatch:
    def test_order_and_bound(self):
        client = FakeClient()
        responses = dispatch(client, prompts(40), parallelism=3)

        assert [r.item_id for r in responses] == [p.item_id for p in prompts(40)]
        assert 1 <= client.peak <= 3

    def test_failure_keeps_earlier_responses(self):
        client = FakeClient(fail_on="item-005")
        received = []
        with pytest.raises(BackendError):
            for response in iter_dispatch(client, prompts(10), parallelism=1, progress=False):
                received.append(response.item_id)
        assert received == [f"item-{i:03d}" for i in range(5)]

    def test_parallelism_must_be_positive(self):
        with pytest.raises(ValueError):
            dispatch(FakeClient(), prompts(1), parallelism=0)


class TestRateLimiter:
    def test_waits_for_tokens(self):
        now = [0.0]
        sleeps = []

        def sleep(seconds):
            sleeps.append(seconds)
            now[0] += seconds

        limiter = RateLimiter(2, burst=1, clock=lambda: now[0], sleep=sleep)
        limiter.acquire()
        limiter.acquire()
        assert sleeps == [pytest.approx(0.5)]

    def test_rate_must_be_positive(self):
        with pytest.raises(ValueError):
            RateLimiter(0)


def test_response_log(tmp_path):
    response = RawResponse(PROMPT.item_id, PROMPT.template_id, "wire", text="noun", latency=1.5)
    record = response_to_dict(response)
    assert "latency" not in record

    write_jsonl([record], tmp_path / "responses.jsonl")
    (restored,) = read_responses(tmp_path / "responses.jsonl")
    assert restored.text == "noun"
    assert restored.latency == 0.0
