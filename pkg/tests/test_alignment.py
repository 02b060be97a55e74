import pytest

from signalforge.alignment import (
    ApiProperty,
    PropertyAlignment,
    align_property,
    alignment_from_record,
    alignment_record,
    apply_alignment,
    evaluate_matching,
    validate_alignment,
)
from signalforge.catalog import insert_raw
from signalforge.codec import synthesize_codec
from signalforge.errors import DomainError, InvariantError, NoCandidates
from signalforge.index import SignalIndex, build_index
from signalforge.providers import RuleProvider


@pytest.fixture(scope="module")
def rewritten_index(small_catalog):
    return build_index(small_catalog, "rewritten_description")


@pytest.fixture(scope="module")
def codecs(small_catalog):
    provider = RuleProvider()
    return {
        sig.name: synthesize_codec(sig, provider, small_catalog)[0]
        for sig in small_catalog
    }


def wiper_property():
    return ApiProperty(
        name="wiperActive",
        semantic_type="string-enum",
        allowed_values=("ON", "OFF"),
        description="State of the front wiper, reported as OFF or ON.",
    )


def speed_property():
    return ApiProperty(
        name="speed",
        semantic_type="number",
        unit="km/h",
        range_min=0,
        range_max=250,
        description="Current vehicle speed m/s converted for display.",
    )


def trip_property():
    return ApiProperty(
        name="tripTimeSeconds",
        semantic_type="composite",
        unit="s",
        description="Total trip time combining minute and second signals.",
    )


def test_direct_enum_alignment(small_catalog, rewritten_index):
    alignment = align_property(
        wiper_property(),
        rewritten_index,
        RuleProvider(),
        small_catalog,
        theta=0.2,
        margin=0.01,
    )
    assert alignment.mapping_kind == "direct"
    assert alignment.contributing_signals == ("WiperState",)
    assert alignment.enum_correspondence == {"ON": "ON", "OFF": "OFF"}
    assert alignment.status == "auto_accepted"


def test_transformed_alignment_gets_kmh_factor(small_catalog, rewritten_index):
    alignment = align_property(
        speed_property(),
        rewritten_index,
        RuleProvider(),
        small_catalog,
        theta=0.2,
        margin=0.01,
    )
    assert alignment.mapping_kind == "transformed"
    assert alignment.contributing_signals == ("VehicleSpeed",)
    factor, offset = alignment.unit_conversion
    assert factor == pytest.approx(3.6)
    assert offset == 0.0


def test_composed_alignment_lists_children(small_catalog, rewritten_index):
    alignment = align_property(
        trip_property(),
        rewritten_index,
        RuleProvider(),
        small_catalog,
        theta=0.2,
        margin=0.01,
    )
    assert alignment.mapping_kind == "composed"
    assert set(alignment.contributing_signals) == {"Minute", "Second"}


def test_low_similarity_flags(small_catalog, rewritten_index):
    vague = ApiProperty(
        name="mystery", semantic_type="number", description="entirely unrelated words here"
    )
    alignment = align_property(
        vague, rewritten_index, RuleProvider(), small_catalog, theta=0.75
    )
    assert alignment.status == "flagged"


def test_near_tie_flags(small_catalog, rewritten_index):
    alignment = align_property(
        wiper_property(),
        rewritten_index,
        RuleProvider(),
        small_catalog,
        theta=0.01,
        margin=1.0,  # any runner-up within 1.0 is ambiguous
    )
    assert alignment.status == "flagged"


def test_empty_index_raises(small_catalog):
    with pytest.raises(NoCandidates):
        align_property(
            wiper_property(), SignalIndex(), RuleProvider(), small_catalog
        )


def test_constraint_directives_override(small_catalog, rewritten_index):
    alignment = align_property(
        speed_property(),
        rewritten_index,
        RuleProvider(),
        small_catalog,
        theta=0.2,
        margin=0.01,
        constraint_text="prefer-signal CabinTemp\nmapping-kind direct",
    )
    assert alignment.contributing_signals == ("CabinTemp",)
    assert alignment.mapping_kind == "direct"


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------

def test_composed_requires_two_signals():
    with pytest.raises(InvariantError):
        PropertyAlignment(
            property_name="p",
            mapping_kind="composed",
            contributing_signals=("only",),
        )
    with pytest.raises(InvariantError):
        PropertyAlignment(
            property_name="p",
            mapping_kind="direct",
            contributing_signals=("a", "b"),
        )


def test_partial_enum_correspondence_rejected(small_catalog):
    alignment = PropertyAlignment(
        property_name="wiperActive",
        mapping_kind="direct",
        contributing_signals=("WiperState",),
        enum_correspondence={"ON": "ON"},
        status="auto_accepted",
    )
    with pytest.raises(InvariantError):
        validate_alignment(alignment, wiper_property(), small_catalog)


def test_status_transitions():
    flagged = PropertyAlignment(
        property_name="p", mapping_kind="direct", contributing_signals=("s",)
    )
    approved = flagged.decide("approve")
    assert approved.status == "approved"
    with pytest.raises(InvariantError):
        approved.decide("approve")
    rejected = flagged.decide("reject")
    assert rejected.status == "rejected"


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def test_apply_direct(small_catalog, rewritten_index, codecs):
    alignment = align_property(
        wiper_property(), rewritten_index, RuleProvider(), small_catalog,
        theta=0.2, margin=0.01,
    )
    frame = insert_raw(small_catalog.get("WiperState"), 1)
    assert apply_alignment(alignment, codecs, frame) == "ON"


def test_apply_transformed(small_catalog, rewritten_index, codecs):
    alignment = align_property(
        speed_property(), rewritten_index, RuleProvider(), small_catalog,
        theta=0.2, margin=0.01,
    )
    frame = insert_raw(small_catalog.get("VehicleSpeed"), 1389)  # 13.89 m/s
    assert apply_alignment(alignment, codecs, frame) == pytest.approx(50.004)


def test_apply_composed(small_catalog, rewritten_index, codecs):
    alignment = align_property(
        trip_property(), rewritten_index, RuleProvider(), small_catalog,
        theta=0.2, margin=0.01,
    )
    frame = insert_raw(
        small_catalog.get("Minute"), 2, insert_raw(small_catalog.get("Second"), 5)
    )
    assert apply_alignment(alignment, codecs, frame) == 125.0


def test_apply_refuses_flagged(codecs):
    flagged = PropertyAlignment(
        property_name="p", mapping_kind="direct", contributing_signals=("WiperState",)
    )
    with pytest.raises(InvariantError):
        apply_alignment(flagged, codecs, b"\x00" * 8)


def test_apply_direct_missing_correspondence_is_domain_error(small_catalog, codecs):
    alignment = PropertyAlignment(
        property_name="wiperActive",
        mapping_kind="direct",
        contributing_signals=("WiperState",),
        enum_correspondence={"ON": "ON", "OFF": "MISSING_LABEL"},
        status="auto_accepted",
    )
    frame = insert_raw(small_catalog.get("WiperState"), 0)  # decodes to OFF
    with pytest.raises(DomainError):
        apply_alignment(alignment, codecs, frame)


def test_direct_enum_mapping_is_bijective(small_catalog, rewritten_index, codecs):
    alignment = align_property(
        wiper_property(), rewritten_index, RuleProvider(), small_catalog,
        theta=0.2, margin=0.01,
    )
    sig = small_catalog.get("WiperState")
    seen = {}
    for raw, label in sig.enum_map.items():
        frame = insert_raw(sig, raw)
        value = apply_alignment(alignment, codecs, frame)
        assert value not in seen
        seen[value] = label
    assert set(seen) == set(wiper_property().allowed_values)


# ---------------------------------------------------------------------------
# Matching evaluation
# ---------------------------------------------------------------------------

def _mk(name, signals, kind, status="auto_accepted"):
    return PropertyAlignment(
        property_name=name,
        mapping_kind=kind,
        contributing_signals=tuple(signals),
        status=status,
    )


def test_perfect_match_scores_one():
    truth = {"a": (frozenset({"S1"}), "direct"), "b": (frozenset({"S2"}), "direct")}
    predicted = {
        "a": _mk("a", ["S1"], "direct"),
        "b": _mk("b", ["S2"], "direct"),
    }
    score = evaluate_matching(predicted, truth)
    assert (score.precision, score.recall, score.f1) == (1.0, 1.0, 1.0)


def test_formula_arithmetic_case():
    # 4 properties in truth, 3 predicted, 2 correct -> P=2/3, R=1/2, F1=4/7.
    truth = {
        "a": (frozenset({"S1"}), "direct"),
        "b": (frozenset({"S2"}), "direct"),
        "c": (frozenset({"S3"}), "direct"),
        "d": (frozenset({"S4"}), "direct"),
    }
    predicted = {
        "a": _mk("a", ["S1"], "direct"),
        "b": _mk("b", ["S2"], "direct"),
        "c": _mk("c", ["WRONG"], "direct"),
    }
    score = evaluate_matching(predicted, truth)
    assert score.precision == pytest.approx(2 / 3)
    assert score.recall == pytest.approx(1 / 2)
    assert score.f1 == pytest.approx(4 / 7)


def test_flagged_counts_as_not_generated():
    truth = {"a": (frozenset({"S1"}), "direct")}
    predicted = {"a": _mk("a", ["S1"], "direct", status="flagged")}
    score = evaluate_matching(predicted, truth)
    assert score.generated == 0
    assert score.recall == 0.0


def test_record_roundtrip(small_catalog, rewritten_index):
    alignment = align_property(
        speed_property(), rewritten_index, RuleProvider(), small_catalog,
        theta=0.2, margin=0.01,
    )
    again = alignment_from_record(alignment_record(alignment))
    assert again == alignment


def test_apply_direct_value_map(small_catalog, codecs):
    alignment = PropertyAlignment(
        property_name="parkBrake",
        mapping_kind="direct",
        contributing_signals=("ParkBrakeActive",),
        value_map={"True": "ENGAGED", "False": "RELEASED"},
        status="auto_accepted",
    )
    engaged = insert_raw(small_catalog.get("ParkBrakeActive"), 1)
    released = insert_raw(small_catalog.get("ParkBrakeActive"), 0)
    assert apply_alignment(alignment, codecs, engaged) == "ENGAGED"
    assert apply_alignment(alignment, codecs, released) == "RELEASED"
