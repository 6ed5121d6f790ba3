import json

import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ktforge.gateway import (ChatRequest, ChatResponse, Gateway, HTTPStatusError, LiveBackend, MalformedResponse,
                             MissingFixture, MockBackend, RecordBackend, ReplayBackend, ReplayFixture, ScriptExhausted,
                             TransportError)

_MESSAGES = st.lists(st.tuples(st.sampled_from(["system", "user", "assistant"]), st.text(max_size=40)),
                     min_size=1, max_size=4)


@settings(max_examples=200, deadline=None)
@given(_MESSAGES, st.sampled_from([0, 0.0, 0.5, 1, 1.0, 2]), st.integers(0, 6))
def test_digest_survives_reserialization(messages, temperature, indent):
    req = ChatRequest(tuple(messages), "m", temperature)
    blob = json.dumps(req.to_json(), indent=indent or None, sort_keys=bool(indent % 2))
    again = ChatRequest.from_json(json.loads(blob))
    assert again.digest() == req.digest()
    assert again.messages == req.messages


def test_content_whitespace_is_significant():
    a = ChatRequest((("user", "hello world"),))
    b = ChatRequest((("user", "hello  world"),))
    assert a.digest() != b.digest()


def test_integer_temperature_is_normalized():
    assert ChatRequest((("user", "x"),), "m", 1).digest() == ChatRequest((("user", "x"),), "m", 1.0).digest()


def test_request_validation():
    with pytest.raises(ValueError):
        ChatRequest(())
    with pytest.raises(ValueError):
        ChatRequest((("user", "x"),), temperature=-0.1)
    with pytest.raises(ValueError):
        ChatRequest((("robot", "x"),))


def test_replay_hit_and_miss():
    req = ChatRequest((("user", "ping"),))
    fixture = ReplayFixture({req.digest(): {"request": req.to_json(), "response": {"content": "pong"}}})
    backend = ReplayBackend(fixture)
    assert backend.complete(req).content == "pong"
    other = ChatRequest((("user", "ping?"),))
    with pytest.raises(MissingFixture) as info:
        backend.complete(other)
    assert other.digest() in str(info.value)


def test_record_then_replay(tmp_path):
    path = tmp_path / "fx" / "rec.json"
    recorder = RecordBackend(MockBackend(["one", ChatResponse("two", (3, 4), 12)]), ReplayFixture(), path)
    gw = Gateway(recorder, model="m", temperature=0.2)
    assert gw.ask([("user", "a")]) == "one"
    assert gw.ask([("system", "s"), ("user", "b")]) == "two"
    replay = Gateway(ReplayBackend(ReplayFixture.load(path)), model="m", temperature=0.2)
    assert replay.ask([("user", "a")]) == "one"
    got = replay.complete(replay.request([("system", "s"), ("user", "b")]))
    assert got == ChatResponse("two", (3, 4), 12)
    assert ReplayFixture.load(path).dumps() == path.read_text()


def test_missing_fixture_file_is_empty(tmp_path):
    assert ReplayFixture.load(tmp_path / "none.json").entries == {}


def test_mock_script_exhausts():
    mock = MockBackend(["only"])
    gw = Gateway(mock)
    assert gw.ask([("user", "x")]) == "only"
    with pytest.raises(ScriptExhausted):
        gw.ask([("user", "y")])
    assert len(mock.requests) == 1


def _live(handler, attempts=3):
    client = httpx.Client(transport=httpx.MockTransport(handler))
    return LiveBackend("http://llm.test/v1/", api_key="k", attempts=attempts, backoff_s=0.0, client=client)


def _ok(content="hi"):
    return httpx.Response(200, json={"choices": [{"message": {"content": content}}],
                                     "usage": {"prompt_tokens": 5, "completion_tokens": 2}})


def test_live_success_sends_openai_shape():
    seen = []

    def handler(request):
        seen.append(request)
        return _ok("hello")

    got = _live(handler).complete(ChatRequest((("user", "q"),), "gpt-4o-mini", 1.0))
    assert got.content == "hello" and got.usage == (5, 2)
    assert str(seen[0].url) == "http://llm.test/v1/chat/completions"
    assert seen[0].headers["Authorization"] == "Bearer k"
    assert json.loads(seen[0].content) == {"model": "gpt-4o-mini", "temperature": 1.0,
                                           "messages": [{"role": "user", "content": "q"}]}


def test_live_retries_then_succeeds():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(503, text="busy") if len(calls) < 3 else _ok()

    assert _live(handler).complete(ChatRequest((("user", "q"),))).content == "hi"
    assert len(calls) == 3


@pytest.mark.parametrize("handler, error", [
    (lambda r: httpx.Response(500, text="boom"), HTTPStatusError),
    (lambda r: httpx.Response(200, text="not json"), MalformedResponse),
    (lambda r: httpx.Response(200, json={"choices": []}), MalformedResponse),
])
def test_live_distinct_errors_after_bounded_attempts(handler, error):
    calls = []

    def counted(request):
        calls.append(1)
        return handler(request)

    with pytest.raises(error):
        _live(counted).complete(ChatRequest((("user", "q"),)))
    assert len(calls) == 3


def test_live_transport_error():
    def handler(request):
        raise httpx.ConnectError("refused", request=request)

    with pytest.raises(TransportError):
        _live(handler).complete(ChatRequest((("user", "q"),)))
