import json
import threading

import pytest

from signalforge import templates
from signalforge.errors import FaultInjected, SchemaViolation, TransportError
from signalforge.providers import (
    ALIGNMENT_SCHEMA,
    CODEC_SCHEMA,
    CompletionProvider,
    CompletionRequest,
    FaultPlan,
    FaultingProvider,
    OutputSchema,
    FieldSpec,
    RecordingProvider,
    RemoteHttpProvider,
    ReplayProvider,
    RuleProvider,
    build_provider,
)


def codec_request(signal, catalog=None, attempt=1, feedback=None):
    return CompletionRequest(
        task_tag="codec_synthesis",
        prompt_sections=templates.codec_sections(signal, catalog),
        output_schema=CODEC_SCHEMA,
        attempt=attempt,
        feedback=feedback,
    )


class MissingFieldProvider(CompletionProvider):
    """Always omits the required field; used to count internal re-prompts."""

    provider_id = "stub/missing"

    def __init__(self, **kwargs):
        super().__init__(**kwargs)
        self.attempts_seen = []

    def _complete_once(self, request):
        self.attempts_seen.append(request.attempt)
        return {"unrelated": 1}, "{}"


def test_rule_provider_emits_catalog_scaling(small_catalog):
    provider = RuleProvider()
    result = provider.complete_structured(
        codec_request(small_catalog.get("VehicleSpeed"), small_catalog)
    )
    tree = result.payload["decode"]
    # range present -> clamp(affine(raw_field))
    assert tree["op"] == "clamp"
    affine = tree["child"]
    assert affine["op"] == "affine"
    assert affine["scale"] == 0.01 and affine["offset"] == 0.0


def test_fault_bracket_misuse_produces_call_syntax_lookup(small_catalog):
    provider = FaultingProvider(RuleProvider(), FaultPlan("bracket_misuse"))
    result = provider.complete_structured(
        codec_request(small_catalog.get("WiperState"), small_catalog)
    )
    assert result.payload["decode"]["op"] == "enum_call"


def test_schema_violation_after_retries_and_meter_counts():
    provider = MissingFieldProvider()
    request = CompletionRequest(
        task_tag="codec_synthesis",
        prompt_sections=(("task", "x"),),
        output_schema=CODEC_SCHEMA,
    )
    with pytest.raises(SchemaViolation) as excinfo:
        provider.complete_structured(request)
    assert excinfo.value.attempts == 3
    # Internal re-prompts bump the attempt counter and attach feedback.
    assert provider.attempts_seen == [1, 2, 3]
    meter = provider.meter_snapshot()
    assert meter.usage("codec_synthesis").calls == 3
    assert meter.usage("codec_synthesis").failures == 1


def test_meter_snapshot_is_a_consistent_copy(small_catalog):
    provider = RuleProvider()
    assert provider.meter_snapshot().total_calls == 0
    request = codec_request(small_catalog.get("WiperState"), small_catalog)
    for _ in range(3):
        provider.complete_structured(request)
    snap = provider.meter_snapshot()
    assert snap.usage("codec_synthesis").calls == 3
    provider.complete_structured(request)
    # The earlier snapshot is unaffected by later calls.
    assert snap.usage("codec_synthesis").calls == 3


def test_meter_is_thread_safe(small_catalog):
    provider = RuleProvider()
    request = codec_request(small_catalog.get("WiperState"), small_catalog)

    def worker():
        for _ in range(50):
            provider.complete_structured(request)

    threads = [threading.Thread(target=worker) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert provider.meter_snapshot().usage("codec_synthesis").calls == 200


def test_single_shot_fault_fires_once_per_subject(small_catalog):
    provider = FaultingProvider(RuleProvider(), FaultPlan("swapped_byte_order"))
    request = codec_request(small_catalog.get("VehicleSpeed"), small_catalog)
    first = provider.complete_structured(request).payload
    second = provider.complete_structured(request).payload
    assert first != second
    clean = RuleProvider().complete_structured(request).payload
    assert second == clean


def test_fault_outage_raises_fault_injected(small_catalog):
    provider = FaultingProvider(
        RuleProvider(), FaultPlan("provider_outage", single_shot=False)
    )
    with pytest.raises(FaultInjected):
        provider.complete_structured(
            codec_request(small_catalog.get("WiperState"), small_catalog)
        )
    meter = provider.meter_snapshot()
    assert meter.usage("codec_synthesis").calls == 1
    assert meter.usage("codec_synthesis").failures == 1


def test_record_then_replay_is_byte_identical(small_catalog, tmp_path):
    record_path = str(tmp_path / "session.jsonl")
    recorder = RecordingProvider(RuleProvider(), record_path)
    requests = [
        codec_request(small_catalog.get(name), small_catalog)
        for name in ("WiperState", "VehicleSpeed", "TimeOfTrip")
    ]
    recorded = [recorder.complete_structured(r) for r in requests]

    replayer = ReplayProvider(record_path)
    replayed = [replayer.complete_structured(r) for r in requests]
    for a, b in zip(recorded, replayed):
        assert a.payload == b.payload
        assert a.raw_text == b.raw_text
        assert a.provider_id == b.provider_id


def test_replay_unknown_request_is_transport_error(small_catalog, tmp_path):
    record_path = str(tmp_path / "session.jsonl")
    recorder = RecordingProvider(RuleProvider(), record_path)
    recorder.complete_structured(
        codec_request(small_catalog.get("WiperState"), small_catalog)
    )
    replayer = ReplayProvider(record_path)
    with pytest.raises(TransportError):
        replayer.complete_structured(
            codec_request(small_catalog.get("VehicleSpeed"), small_catalog)
        )


class FakeResponse:
    def __init__(self, status_code, body):
        self.status_code = status_code
        self._body = body

    def json(self):
        return self._body


def test_remote_provider_posts_once_per_call(small_catalog):
    calls = []

    def transport(url, json=None, headers=None, timeout=None):
        calls.append((url, json, headers))
        inner = RuleProvider()
        payload, _ = inner._complete_once(request)
        content = __import__("json").dumps(payload)
        return FakeResponse(200, {"choices": [{"message": {"content": content}}]})

    request = codec_request(small_catalog.get("WiperState"), small_catalog)
    provider = RemoteHttpProvider(
        url="http://provider.test/v1/chat", model="test-model", transport=transport
    )
    result = provider.complete_structured(request)
    assert len(calls) == 1
    url, body, headers = calls[0]
    assert body["model"] == "test-model"
    assert body["response_format"] == {"type": "json_object"}
    assert result.payload["decode"]["op"] == "enum_lookup"


def test_remote_provider_http_error_is_transport_error(small_catalog):
    provider = RemoteHttpProvider(
        url="http://provider.test/v1/chat",
        transport=lambda *a, **k: FakeResponse(500, {}),
    )
    with pytest.raises(TransportError):
        provider.complete_structured(
            codec_request(small_catalog.get("WiperState"), small_catalog)
        )


def test_output_schema_validation_messages():
    schema = OutputSchema(
        "t",
        (
            FieldSpec("a", "nonempty_text"),
            FieldSpec("b", "unit_interval"),
            FieldSpec("c", "name_list", required=False),
        ),
    )
    problems = schema.validate({"a": "", "b": 2.0, "c": []})
    assert any("'a'" in p for p in problems)
    assert any("'b'" in p for p in problems)
    assert any("'c'" in p for p in problems)
    assert schema.validate({"a": "ok", "b": 0.5}) == []


def test_alignment_schema_accepts_rule_payload():
    payload = {
        "mapping_kind": "direct",
        "contributing_signals": ["WiperState"],
        "confidence": 0.9,
    }
    assert ALIGNMENT_SCHEMA.validate(payload) == []


def test_build_provider_specs(tmp_path):
    assert isinstance(build_provider("rule"), RuleProvider)
    record = build_provider(f"record:{tmp_path}/r.jsonl")
    assert isinstance(record, RecordingProvider)
    with pytest.raises(ValueError):
        build_provider("nonsense")


def test_request_rejects_unknown_tag():
    with pytest.raises(ValueError):
        CompletionRequest(
            task_tag="bogus", prompt_sections=(), output_schema=CODEC_SCHEMA
        )
