from __future__ import annotations

import json
import time

import httpx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shopagent.errors import SchemaViolation, TransportError
from shopagent.llm import (
    ChatRequest,
    Message,
    OpenAICompatBackend,
    StubBackend,
    StubRule,
    StubScript,
    complete_chat,
    extract_first_json,
    load_stub_script,
    register_stub_fixture,
    validate_and_repair_json,
)

INT_SCHEMA = {"type": "object", "properties": {"x": {"type": "integer"}},
              "required": ["x"]}


def request_for(text: str, schema=None, template_id=None) -> ChatRequest:
    return ChatRequest(messages=[Message("user", text)], response_schema=schema,
                       template_id=template_id)


# --- stub script mechanics ----------------------------------------------

def test_first_rule_wins():
    script = StubScript(rules=[
        StubRule(contains="hello", response="one"),
        StubRule(contains="hello", response="two"),
    ])
    backend = StubBackend(script)
    text, _ = backend.complete_text(request_for("hello there"))
    assert text == "one"


def test_template_and_substring_must_both_match():
    script = StubScript(rules=[StubRule(template_id="t1", contains="x", response="hit")],
                        default_response="miss")
    backend = StubBackend(script)
    assert backend.complete_text(request_for("has x", template_id="t1"))[0] == "hit"
    assert backend.complete_text(request_for("has x", template_id="t2"))[0] == "miss"
    assert backend.complete_text(request_for("no match", template_id="t1"))[0] == "miss"


def test_register_appends_preserving_order():
    script = StubScript()
    register_stub_fixture(script, StubRule(contains="a", response="first"))
    assert len(script.rules) == 1
    register_stub_fixture(script, StubRule(contains="a", response="second"))
    assert StubBackend(script).complete_text(request_for("a"))[0] == "first"


def test_demo_script_skiing_fixture(demo_script):
    backend = StubBackend(demo_script)
    request = request_for("Suggest tech accessories for skiing",
                          template_id="stage1.hyde")
    text, _ = backend.complete_text(request)
    parsed = json.loads(text)
    assert [h["category"] for h in parsed] == [
        "Heated Tech Gloves", "Power Banks", "Action Cameras", "Phone Cases",
    ]
    assert all(h["relevance_note"] for h in parsed)


def test_stub_is_deterministic(demo_script):
    backend = StubBackend(demo_script)
    request = request_for("Suggest tech accessories for skiing",
                          template_id="stage1.hyde")
    assert backend.complete_text(request) == backend.complete_text(request)


def test_load_stub_script_round_trip(tmp_path):
    path = tmp_path / "script.json"
    path.write_text(json.dumps({
        "default_response": "d",
        "rules": [{"template_id": "t", "contains": "c", "response": "r", "delay_s": 0.01}],
    }))
    script = load_stub_script(path)
    assert script.default_response == "d"
    assert script.rules[0] == StubRule(template_id="t", contains="c",
                                       response="r", delay_s=0.01)


# --- validate_and_repair_json -------------------------------------------

def test_strict_parse_and_validate():
    assert validate_and_repair_json('{"a": 1}',
                                    {"type": "object",
                                     "properties": {"a": {"type": "integer"}},
                                     "required": ["a"]}) == {"a": 1}


def test_extraction_from_fenced_prose():
    raw = 'Sure! ```json {"a":1} ```'
    schema = {"type": "object", "properties": {"a": {"type": "integer"}}}
    assert validate_and_repair_json(raw, schema) == {"a": 1}


def test_wrong_type_names_field():
    with pytest.raises(SchemaViolation) as exc_info:
        validate_and_repair_json('{"a": "one"}',
                                 {"type": "object",
                                  "properties": {"a": {"type": "integer"}}})
    assert any("a" in v for v in exc_info.value.violations)


def test_no_json_at_all():
    with pytest.raises(SchemaViolation):
        validate_and_repair_json("no json here", {"type": "object"})


def test_never_mutates_values():
    value = validate_and_repair_json('{"a": " Keep  ME "}', {"type": "object"})
    assert value == {"a": " Keep  ME "}


@given(st.dictionaries(st.text(min_size=1, max_size=5),
                       st.one_of(st.integers(), st.text(max_size=8)), max_size=4))
def test_idempotent_on_own_output(value):
    schema = {"type": "object"}
    first = validate_and_repair_json(json.dumps(value), schema)
    second = validate_and_repair_json(json.dumps(first), schema)
    assert first == second == value


@pytest.mark.parametrize("text, expected", [
    ('prefix {"a": {"b": [1, 2]}} suffix', '{"a": {"b": [1, 2]}}'),
    ('noise [1, 2, {"x": "}"}] done', '[1, 2, {"x": "}"}]'),
    ('{"s": "with \\" escaped {brace"} tail', '{"s": "with \\" escaped {brace"}'),
    ('{broken} then {"ok": 1}', '{"ok": 1}'),
    ("nothing here", None),
    ("{never closed", None),
])
def test_extract_first_json(text, expected):
    assert extract_first_json(text) == expected


# --- complete_chat ------------------------------------------------------

def test_schema_success_no_repair():
    backend = StubBackend(StubScript(default_response='{"x": 3}'))
    response = complete_chat(backend, request_for("anything", schema=INT_SCHEMA))
    assert response.parsed == {"x": 3}
    assert response.repair_rounds == 0
    assert response.backend_tag == "stub"


def test_prose_with_trailing_json_takes_repair_then_extraction():
    backend = StubBackend(StubScript(
        default_response='Sure thing! Here you go: {"x": 3}'))
    response = complete_chat(backend, request_for("anything", schema=INT_SCHEMA))
    assert response.parsed == {"x": 3}
    assert response.repair_rounds == 1


def test_repair_round_fixes_output():
    # First call violates the schema; the repair round (recognizable by
    # the violation text in the last user message) answers correctly.
    script = StubScript(rules=[
        StubRule(contains="not valid for the required JSON schema",
                 response='{"x": 7}'),
    ], default_response='{"x": "three"}')
    response = complete_chat(StubBackend(script), request_for("go", schema=INT_SCHEMA))
    assert response.parsed == {"x": 7}
    assert response.repair_rounds == 1


def test_unrepairable_output_is_typed_error():
    backend = StubBackend(StubScript(default_response="total garbage"))
    with pytest.raises(SchemaViolation) as exc_info:
        complete_chat(backend, request_for("x", schema=INT_SCHEMA))
    assert exc_info.value.raw_text == "total garbage"


def test_no_schema_leaves_raw_only():
    backend = StubBackend(StubScript(default_response="plain text"))
    response = complete_chat(backend, request_for("x"))
    assert response.raw_text == "plain text"
    assert response.parsed is None and response.repair_rounds == 0


def test_parsed_always_validates_against_schema(demo_script):
    from shopagent.llm.json_repair import schema_violations
    backend = StubBackend(demo_script)
    schema = {"type": "array", "items": {"type": "object"}}
    request = ChatRequest(messages=[Message("user", "skiing trip")],
                          response_schema=schema, template_id="stage1.hyde")
    response = complete_chat(backend, request)
    assert schema_violations(response.parsed, schema) == []


def test_latency_covers_full_exchange_including_repair():
    script = StubScript(rules=[
        StubRule(contains="required JSON schema", response='{"x": 1}', delay_s=0.03),
    ], default_response="junk")
    script.rules.insert(0, StubRule(contains="go", response="junk", delay_s=0.05))
    start = time.monotonic()
    response = complete_chat(StubBackend(script), request_for("go", schema=INT_SCHEMA))
    wall = time.monotonic() - start
    assert response.repair_rounds == 1
    assert response.latency_s >= 0.08 - 0.005
    assert response.latency_s <= wall + 1e-6


def test_usage_accumulates_across_repair():
    backend = StubBackend(StubScript(default_response='bad json every time {"x": 2}'))
    response = complete_chat(backend, request_for("hello world", schema=INT_SCHEMA))
    # two stub calls: prompt tokens counted twice, plus completions
    assert response.usage.prompt_tokens > 2
    assert response.usage.completion_tokens > 0


def test_request_validation():
    with pytest.raises(ValueError):
        ChatRequest(messages=[])
    with pytest.raises(ValueError):
        Message("robot", "hi")
    with pytest.raises(ValueError):
        ChatRequest(messages=[Message("user", "x")], temperature=-1)


# --- OpenAI-compatible remote backend ------------------------------------

def mock_backend(handler) -> OpenAICompatBackend:
    transport = httpx.MockTransport(handler)
    return OpenAICompatBackend("http://llm.test/v1", api_key="sk-test",
                               model_tag="demo-model",
                               client=httpx.Client(transport=transport))


def test_remote_backend_happy_path():
    captured = {}

    def handler(request: httpx.Request) -> httpx.Response:
        captured["url"] = str(request.url)
        captured["auth"] = request.headers.get("authorization")
        captured["body"] = json.loads(request.content)
        return httpx.Response(200, json={
            "choices": [{"message": {"role": "assistant", "content": '{"x": 1}'}}],
            "usage": {"prompt_tokens": 12, "completion_tokens": 5},
        })

    backend = mock_backend(handler)
    text, usage = backend.complete_text(request_for("ping"))
    assert text == '{"x": 1}'
    assert usage.prompt_tokens == 12 and usage.completion_tokens == 5
    assert captured["url"] == "http://llm.test/v1/chat/completions"
    assert captured["auth"] == "Bearer sk-test"
    assert captured["body"]["model"] == "demo-model"
    assert captured["body"]["messages"] == [{"role": "user", "content": "ping"}]


def test_remote_backend_5xx_is_retriable():
    backend = mock_backend(lambda request: httpx.Response(503, text="down"))
    with pytest.raises(TransportError) as exc_info:
        backend.complete_text(request_for("x"))
    assert exc_info.value.retriable


def test_remote_backend_4xx_not_retriable():
    backend = mock_backend(lambda request: httpx.Response(401, text="no"))
    with pytest.raises(TransportError) as exc_info:
        backend.complete_text(request_for("x"))
    assert not exc_info.value.retriable


def test_remote_backend_timeout_retriable():
    def handler(request):
        raise httpx.ConnectTimeout("slow")
    backend = mock_backend(handler)
    with pytest.raises(TransportError) as exc_info:
        backend.complete_text(request_for("x"))
    assert exc_info.value.retriable


def test_remote_backend_malformed_payload():
    backend = mock_backend(lambda request: httpx.Response(200, json={"nope": 1}))
    with pytest.raises(TransportError):
        backend.complete_text(request_for("x"))


def test_backend_from_env(monkeypatch):
    monkeypatch.setenv("BACKEND_URL", "http://models.internal/v1")
    monkeypatch.setenv("API_KEY", "k")
    monkeypatch.setenv("MODEL_TAG", "m1")
    from shopagent.llm import backend_from_env
    backend = backend_from_env()
    assert backend.base_url == "http://models.internal/v1"
    assert backend.tag == "http:m1"
    monkeypatch.delenv("BACKEND_URL")
    with pytest.raises(ValueError):
        backend_from_env()
