import pytest
from hypothesis import given, settings, strategies as st

from signalforge.catalog import (
    extract_raw,
    insert_raw,
    parse_catalog,
    reference_decode,
)
from signalforge.codec import (
    CodecExpr,
    ZERO_FRAME,
    debug_loop,
    decode_value,
    emit_source,
    encode_value,
    generate_test_vectors,
    synthesize_codec,
    validate_codec,
)
from signalforge.errors import DomainError
from signalforge.providers import FaultPlan, FaultingProvider, RuleProvider


def brute_force_agreement(sig, codec, catalog=None):
    """Oracle: walk the ENTIRE raw field domain and compare codec decode
    against the catalog reference; roundtrip valid raws through encode."""
    lo, hi = sig.raw_bounds()
    for raw in range(lo, hi + 1):
        frame = insert_raw(sig, raw)
        expected = reference_decode(sig, frame, catalog)
        if expected is None:
            with pytest.raises(DomainError):
                decode_value(codec, frame)
            continue
        got = decode_value(codec, frame)
        assert got == expected, f"{sig.name} raw={raw}: {got!r} != {expected!r}"
        back = encode_value(codec, got, frame)
        assert back == frame, f"{sig.name} raw={raw}: roundtrip mismatch"


def synthesized(catalog, name):
    codec, _ = synthesize_codec(catalog.get(name), RuleProvider(), catalog)
    return codec


# ---------------------------------------------------------------------------
# Vector generation
# ---------------------------------------------------------------------------

def test_enum_vectors_cover_every_entry(small_catalog):
    sig = small_catalog.get("WiperState")
    vectors = generate_test_vectors(sig, small_catalog)
    decoded = {
        v.expected for v in vectors if v.direction == "decode" and v.expected
    }
    assert {"OFF", "ON"} <= decoded


def test_numeric_vectors_hit_range_boundaries():
    catalog = parse_catalog(
        """
signals:
  - name: Pedal
    kind: numerical
    bit_start: 0
    bit_length: 8
    range_min: 0
    range_max: 255
"""
    )
    vectors = generate_test_vectors(catalog.get("Pedal"), catalog)
    values = {v.expected for v in vectors if v.direction == "decode"}
    assert 0.0 in values and 255.0 in values


def test_vectors_include_roundtrip(small_catalog):
    for name in ("WiperState", "VehicleSpeed", "ParkBrakeActive", "TimeOfTrip"):
        vectors = generate_test_vectors(small_catalog.get(name), small_catalog)
        assert any(v.direction == "roundtrip" for v in vectors)


def test_vectors_deterministic(small_catalog):
    sig = small_catalog.get("CabinTemp")
    assert generate_test_vectors(sig, small_catalog) == generate_test_vectors(
        sig, small_catalog
    )


def test_four_bit_verdict_matches_brute_force():
    # DERIVED oracle: enumerate all 16 raw values of a 4-bit signal.
    catalog = parse_catalog(
        """
signals:
  - name: Level
    kind: numerical
    bit_start: 3
    bit_length: 4
    scale: 2
    offset: -4
"""
    )
    sig = catalog.get("Level")
    codec = synthesized(catalog, "Level")
    report = validate_codec(codec, generate_test_vectors(sig, catalog))
    assert report.status == "pass"
    brute_force_agreement(sig, codec, catalog)


# ---------------------------------------------------------------------------
# Evaluation semantics
# ---------------------------------------------------------------------------

def test_affine_decode_spec_example():
    codec = CodecExpr.from_payload(
        {
            "decode": {
                "op": "affine",
                "scale": 0.01,
                "offset": 0,
                "child": {
                    "op": "raw_field",
                    "bit_start": 0,
                    "bit_length": 16,
                    "byte_order": "little_endian",
                    "signed": False,
                },
            }
        }
    )
    frame = (5000).to_bytes(8, "little")
    assert decode_value(codec, frame) == 50.0


def test_enum_lookup_decode():
    codec = CodecExpr.from_payload(
        {
            "decode": {
                "op": "enum_lookup",
                "table": {"0": "OFF", "1": "ON"},
                "child": {
                    "op": "raw_field",
                    "bit_start": 0,
                    "bit_length": 2,
                    "byte_order": "little_endian",
                    "signed": False,
                },
            }
        }
    )
    assert decode_value(codec, (1).to_bytes(8, "little")) == "ON"
    with pytest.raises(DomainError):
        decode_value(codec, (2).to_bytes(8, "little"))


def test_encode_leaves_unrelated_bits_untouched(small_catalog):
    sig = small_catalog.get("WiperState")
    codec = synthesized(small_catalog, "WiperState")
    base = b"\xff" * 8
    frame = encode_value(codec, "ON", base)
    # Bit-mask oracle: outside the 2-bit field nothing changed.
    assert frame[1:] == base[1:]
    assert frame[0] & ~0b11 == base[0] & ~0b11
    assert extract_raw(sig, frame) == 1


def test_encode_unknown_label_is_domain_error(small_catalog):
    codec = synthesized(small_catalog, "WiperState")
    with pytest.raises(DomainError):
        encode_value(codec, "AUTO")


def test_opaque_node_fails_validation_not_crash(small_catalog):
    sig = small_catalog.get("WiperState")
    codec = CodecExpr.from_payload({"decode": {"op": "enum_call", "table": {}}})
    report = validate_codec(codec, generate_test_vectors(sig, small_catalog))
    assert report.status == "fail"
    assert all(f.detail for f in report.failures)


def test_offset_perturbation_fails_with_uniform_delta(small_catalog):
    sig = small_catalog.get("VehicleSpeed")
    good = synthesized(small_catalog, "VehicleSpeed")
    payload = good.to_payload()
    payload["decode"]["child"]["offset"] += 1
    bad = CodecExpr.from_payload(payload)
    vectors = [
        v
        for v in generate_test_vectors(sig, small_catalog)
        if v.direction == "decode"
    ]
    report = validate_codec(bad, vectors)
    assert report.status == "fail"
    for failure in report.failures:
        if failure.got is not None:
            assert failure.got - failure.expected == pytest.approx(1.0)


def test_signed_big_endian_brute_force(small_catalog):
    sig = small_catalog.get("CabinTemp")
    codec = synthesized(small_catalog, "CabinTemp")
    brute_force_agreement(sig, codec, small_catalog)


def test_object_combine_semantics(small_catalog):
    codec = synthesized(small_catalog, "TimeOfTrip")
    frame = insert_raw(
        small_catalog.get("Minute"),
        2,
        insert_raw(small_catalog.get("Second"), 5),
    )
    assert decode_value(codec, frame) == 125.0
    # Encode decomposes 125 -> minute 2, second 5.
    encoded = encode_value(codec, 125, ZERO_FRAME)
    assert extract_raw(small_catalog.get("Minute"), encoded) == 2
    assert extract_raw(small_catalog.get("Second"), encoded) == 5


def test_object_roundtrip_over_valid_domain(small_catalog):
    sig = small_catalog.get("TimeOfTrip")
    codec = synthesized(small_catalog, "TimeOfTrip")
    minute, second = small_catalog.get("Minute"), small_catalog.get("Second")
    for m in range(0, 60, 7):
        for s in range(0, 60, 5):
            frame = insert_raw(minute, m, insert_raw(second, s))
            value = decode_value(codec, frame)
            assert value == 60 * m + s
            assert encode_value(codec, value, frame) == frame


# ---------------------------------------------------------------------------
# Φ_test and the debug loop
# ---------------------------------------------------------------------------

def test_correct_codec_passes_its_vectors(small_catalog):
    for name in ("WiperState", "VehicleSpeed", "ParkBrakeActive", "TimeOfTrip"):
        sig = small_catalog.get(name)
        codec = synthesized(small_catalog, name)
        report = validate_codec(codec, generate_test_vectors(sig, small_catalog))
        assert report.status == "pass", (name, report.failures)


def test_rule_provider_passes_first_attempt(small_catalog):
    report = debug_loop(small_catalog.get("VehicleSpeed"), RuleProvider(), 3, small_catalog)
    assert report.status == "pass" and report.attempts == 1


@pytest.mark.parametrize(
    "signal_name,fault",
    [
        ("WiperState", "bracket_misuse"),
        ("WiperState", "dropped_enum_entry"),
        ("WiperState", "swapped_byte_order"),
        ("ParkBrakeActive", "swapped_byte_order"),
        ("VehicleSpeed", "off_by_one_scale"),
        ("VehicleSpeed", "swapped_byte_order"),
        ("TimeOfTrip", "off_by_one_scale"),
        ("CabinTemp", "off_by_one_scale"),
    ],
)
# Note: swapped_byte_order on byte-aligned 8-bit fields (Minute, Second,
# CabinTemp) is semantically a no-op, so it cannot drive a repair round.
def test_single_shot_fault_repaired_on_second_attempt(small_catalog, signal_name, fault):
    provider = FaultingProvider(RuleProvider(), FaultPlan(fault))
    report = debug_loop(small_catalog.get(signal_name), provider, 3, small_catalog)
    assert report.status == "pass"
    assert report.attempts == 2


def test_persistent_fault_exhausts_rounds(small_catalog):
    provider = FaultingProvider(
        RuleProvider(), FaultPlan("swapped_byte_order", single_shot=False)
    )
    report = debug_loop(small_catalog.get("VehicleSpeed"), provider, 2, small_catalog)
    assert report.status == "fail"
    assert report.attempts == 3  # max_rounds + 1
    assert report.codec is None


def test_dropped_enum_entry_detected_by_static_gate(small_catalog):
    provider = FaultingProvider(RuleProvider(), FaultPlan("dropped_enum_entry"))
    report = debug_loop(small_catalog.get("WiperState"), provider, 3, small_catalog)
    assert report.status == "pass" and report.attempts == 2


def test_emit_source_is_readable(small_catalog):
    codec = synthesized(small_catalog, "WiperState")
    source = emit_source(small_catalog.get("WiperState"), codec)
    assert "read_WiperState" in source
    assert "write_WiperState" in source
    assert "'OFF'" in source


# ---------------------------------------------------------------------------
# Property tests
# ---------------------------------------------------------------------------

@st.composite
def numeric_signal_defs(draw):
    bit_length = draw(st.integers(min_value=1, max_value=12))
    bit_start = draw(st.integers(min_value=0, max_value=64 - bit_length))
    byte_order = draw(st.sampled_from(["little_endian", "big_endian"]))
    signed = draw(st.booleans())
    scale = draw(st.sampled_from([1.0, 0.5, 0.25, 2.0, 0.1, -0.5]))
    offset = draw(st.sampled_from([0.0, -40.0, 10.0, 1.5]))
    doc = f"""
signals:
  - name: P
    kind: numerical
    bit_start: {bit_start}
    bit_length: {bit_length}
    byte_order: {byte_order}
    signed: {str(signed).lower()}
    scale: {scale}
    offset: {offset}
"""
    return parse_catalog(doc)


@settings(max_examples=60, deadline=None)
@given(numeric_signal_defs())
def test_property_roundtrip_and_monotonicity(catalog):
    sig = catalog.get("P")
    codec, _ = synthesize_codec(sig, RuleProvider(), catalog)
    lo, hi = sig.raw_bounds()
    step = max(1, (hi - lo) // 64)
    previous = None
    for raw in range(lo, hi + 1, step):
        frame = insert_raw(sig, raw)
        value = decode_value(codec, frame)
        assert value == sig.scale * raw + sig.offset
        assert encode_value(codec, value, frame) == frame
        if previous is not None and sig.scale > 0:
            assert value > previous
        previous = value


class FlakyProvider(RuleProvider):
    """Correct only from attempt `k` onward; earlier attempts corrupt the
    tree (persistent-until-k fault, for the convergence property)."""

    def __init__(self, correct_from_attempt: int, **kwargs):
        super().__init__(**kwargs)
        self.correct_from_attempt = correct_from_attempt
        self.calls = 0

    def _complete_once(self, request):
        from signalforge.providers import _mutate_payload

        self.calls += 1
        payload, raw = super()._complete_once(request)
        if self.calls < self.correct_from_attempt:
            payload = _mutate_payload(payload, "off_by_one_scale", request.task_tag)
        return payload, raw


@pytest.mark.parametrize("correct_from", [1, 2, 3, 4])
def test_debug_loop_converges_when_provider_recovers(small_catalog, correct_from):
    # Convergence: correct from attempt k <= max_rounds+1 implies pass.
    provider = FlakyProvider(correct_from)
    report = debug_loop(small_catalog.get("VehicleSpeed"), provider, 3, small_catalog)
    assert report.status == "pass"
    assert report.attempts == correct_from
