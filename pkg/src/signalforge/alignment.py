"""Property-to-signal alignment: retrieval, explicit alignment records, and
their execution.

An alignment is the intermediate representation binding one API property to
the CAN signals backing it: mapping kind (direct / transformed / composed),
enum correspondences, unit conversions, and a confidence score. Ambiguous
matches (low best similarity, or a near-tie between the top candidates) are
flagged for human review instead of flowing into code generation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional

from . import templates
from .catalog import SignalCatalog
from .codec import Combine, CodecExpr, decode_value
from .errors import DomainError, InvariantError, NoCandidates
from .index import SignalIndex, embed
from .providers import ALIGNMENT_SCHEMA, CompletionProvider, CompletionRequest

SEMANTIC_TYPES = ("boolean", "number", "string-enum", "composite")

DEFAULT_THETA = 0.75
DEFAULT_MARGIN = 0.05
DEFAULT_TOP_K = 5

# Review statuses and the allowed transitions: flagged items may be approved
# or rejected; regeneration may re-flag or re-accept anything.
STATUSES = ("auto_accepted", "flagged", "approved", "rejected")
_DECISION_TRANSITIONS = {("flagged", "approved"), ("flagged", "rejected")}
ACTIVE_STATUSES = ("auto_accepted", "approved")


@dataclass(frozen=True)
class ApiProperty:
    name: str
    semantic_type: str
    unit: Optional[str] = None
    allowed_values: tuple[str, ...] = ()
    range_min: Optional[float] = None
    range_max: Optional[float] = None
    description: str = ""

    def __post_init__(self):
        if self.semantic_type not in SEMANTIC_TYPES:
            raise InvariantError(
                f"semantic_type must be one of {SEMANTIC_TYPES}",
                self.name,
                "semantic_type",
            )
        if self.semantic_type == "string-enum" and not self.allowed_values:
            raise InvariantError(
                "string-enum properties need allowed values", self.name, "allowed_values"
            )
        if (
            self.range_min is not None
            and self.range_max is not None
            and self.range_min > self.range_max
        ):
            raise InvariantError("range is not ordered", self.name, "range_min")


@dataclass(frozen=True)
class PropertyAlignment:
    property_name: str
    mapping_kind: str  # direct | transformed | composed
    contributing_signals: tuple[str, ...]
    value_map: Optional[Mapping[str, object]] = None
    enum_correspondence: Optional[Mapping[str, str]] = None  # property value -> label
    unit_conversion: Optional[tuple[float, float]] = None  # (factor, offset)
    confidence: float = 0.0
    status: str = "flagged"
    rationale: str = ""
    candidates: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.mapping_kind not in ("direct", "transformed", "composed"):
            raise InvariantError(
                f"unknown mapping kind {self.mapping_kind!r}",
                self.property_name,
                "mapping_kind",
            )
        if not self.contributing_signals:
            raise InvariantError(
                "contributing signals must be non-empty",
                self.property_name,
                "contributing_signals",
            )
        if (self.mapping_kind == "composed") != (len(self.contributing_signals) >= 2):
            raise InvariantError(
                "composed mappings need >= 2 contributing signals (and only they may)",
                self.property_name,
                "mapping_kind",
            )
        if not 0.0 <= self.confidence <= 1.0:
            raise InvariantError("confidence outside 0..1", self.property_name, "confidence")
        if self.status not in STATUSES:
            raise InvariantError(
                f"unknown status {self.status!r}", self.property_name, "status"
            )

    def decide(self, action: str) -> "PropertyAlignment":
        """Apply a review decision (approve/reject)."""
        target = {"approve": "approved", "reject": "rejected"}.get(action)
        if target is None:
            raise InvariantError(f"unknown action {action!r}", self.property_name, "status")
        if (self.status, target) not in _DECISION_TRANSITIONS:
            raise InvariantError(
                f"cannot move {self.status} -> {target}", self.property_name, "status"
            )
        return replace(self, status=target)

    @property
    def active(self) -> bool:
        """Whether the alignment may feed code generation."""
        return self.status in ACTIVE_STATUSES


def validate_alignment(
    alignment: PropertyAlignment,
    prop: ApiProperty,
    catalog: Optional[SignalCatalog] = None,
) -> None:
    """Cross-field invariants that need the property (and catalog) context."""
    if alignment.enum_correspondence is not None:
        missing = [
            v for v in prop.allowed_values if v not in alignment.enum_correspondence
        ]
        if missing:
            raise InvariantError(
                f"enum correspondence not total: missing {missing}",
                alignment.property_name,
                "enum_correspondence",
            )
    if alignment.unit_conversion is not None:
        if prop.unit is None:
            raise InvariantError(
                "unit conversion requires the property to declare a unit",
                alignment.property_name,
                "unit_conversion",
            )
        if catalog is not None:
            primary = catalog.get(alignment.contributing_signals[0])
            if primary.unit is None:
                raise InvariantError(
                    "unit conversion requires the signal to declare a unit",
                    alignment.property_name,
                    "unit_conversion",
                )
    if catalog is not None:
        for name in alignment.contributing_signals:
            catalog.get(name)  # raises on unknown signals


# ---------------------------------------------------------------------------
# Alignment synthesis
# ---------------------------------------------------------------------------

def property_record(prop: ApiProperty) -> dict:
    return {
        "name": prop.name,
        "semantic_type": prop.semantic_type,
        "unit": prop.unit,
        "allowed_values": list(prop.allowed_values),
        "range_min": prop.range_min,
        "range_max": prop.range_max,
        "description": prop.description,
    }


def property_query_text(prop: ApiProperty) -> str:
    parts = [prop.name, prop.description]
    if prop.unit:
        parts.append(prop.unit)
    parts.extend(prop.allowed_values)
    return " ".join(p for p in parts if p)


def align_property(
    prop: ApiProperty,
    index: SignalIndex,
    provider: CompletionProvider,
    catalog: SignalCatalog,
    theta: float = DEFAULT_THETA,
    margin: float = DEFAULT_MARGIN,
    k: int = DEFAULT_TOP_K,
    strategy: str = "rewritten_description",
    constraint_text: str = "",
) -> PropertyAlignment:
    """Retrieve candidates, let the provider fill the alignment record, and
    set the review status from the similarity thresholds."""
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must lie in (0, 1]")
    if margin < 0.0:
        raise ValueError("margin must be >= 0")
    if index.size(strategy) == 0:
        raise NoCandidates(f"index has no entries for strategy {strategy!r}")

    query = embed(property_query_text(prop))
    ranked = index.query_top_k(query, k, strategy)

    candidate_records = []
    for name, similarity in ranked:
        sig = catalog.get(name)
        record = dict(templates.signal_metadata(sig, catalog))
        record["similarity"] = round(similarity, 6)
        candidate_records.append(record)

    request = CompletionRequest(
        task_tag="alignment",
        prompt_sections=templates.alignment_sections(
            property_record(prop), candidate_records, constraint_text
        ),
        output_schema=ALIGNMENT_SCHEMA,
    )
    result = provider.complete_structured(request)
    payload = result.payload

    best = ranked[0][1]
    runner_up = ranked[1][1] if len(ranked) > 1 else None
    ambiguous = best < theta or (runner_up is not None and best - runner_up < margin)
    status = "flagged" if ambiguous else "auto_accepted"

    conversion = payload.get("unit_conversion")
    alignment = PropertyAlignment(
        property_name=prop.name,
        mapping_kind=payload["mapping_kind"],
        contributing_signals=tuple(payload["contributing_signals"]),
        value_map=payload.get("value_map"),
        enum_correspondence=payload.get("enum_correspondence"),
        unit_conversion=(
            (float(conversion["factor"]), float(conversion["offset"]))
            if conversion
            else None
        ),
        confidence=max(0.0, min(1.0, float(payload["confidence"]))),
        status=status,
        rationale=payload.get("rationale", ""),
        candidates=tuple((name, round(sim, 6)) for name, sim in ranked),
    )
    validate_alignment(alignment, prop, catalog)
    return alignment


# ---------------------------------------------------------------------------
# Alignment execution
# ---------------------------------------------------------------------------

def apply_alignment(
    alignment: PropertyAlignment,
    codecs: Mapping[str, CodecExpr],
    frame: bytes,
):
    """Evaluate an alignment against a frame using pass-validated codecs."""
    if not alignment.active:
        raise InvariantError(
            f"alignment status {alignment.status!r} may not be applied",
            alignment.property_name,
            "status",
        )
    if alignment.mapping_kind == "composed":
        codec = _find_combine_codec(alignment, codecs)
        return decode_value(codec, frame)

    primary = alignment.contributing_signals[0]
    if primary not in codecs:
        raise DomainError(f"no codec for signal {primary!r}")
    value = decode_value(codecs[primary], frame)

    if alignment.mapping_kind == "transformed":
        factor, offset = alignment.unit_conversion or (1.0, 0.0)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise DomainError(
                f"transformed mapping needs a numeric decode, got {value!r}"
            )
        return factor * float(value) + offset

    if alignment.enum_correspondence is not None:
        for prop_value, label in alignment.enum_correspondence.items():
            if label == value:
                return prop_value
        raise DomainError(
            f"decoded label {value!r} has no correspondence entry for "
            f"{alignment.property_name}"
        )
    if alignment.value_map is not None:
        key = str(value)
        if key not in alignment.value_map:
            raise DomainError(
                f"decoded value {value!r} has no value_map entry for "
                f"{alignment.property_name}"
            )
        return alignment.value_map[key]
    return value


def _find_combine_codec(
    alignment: PropertyAlignment, codecs: Mapping[str, CodecExpr]
) -> CodecExpr:
    wanted = set(alignment.contributing_signals)
    for codec in codecs.values():
        root = codec.root
        if isinstance(root, Combine) and {name for name, _, _ in root.children} == wanted:
            return codec
    raise DomainError(
        f"no combine codec covers signals {sorted(wanted)} for "
        f"{alignment.property_name}"
    )


def combine_weights(
    alignment: PropertyAlignment, codecs: Mapping[str, CodecExpr]
) -> dict[str, float]:
    """Weights of a composed alignment, read off the combine codec."""
    codec = _find_combine_codec(alignment, codecs)
    assert isinstance(codec.root, Combine)
    return {name: weight for name, weight, _ in codec.root.children}


# ---------------------------------------------------------------------------
# Matching evaluation (P/R/F1 against ground truth)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchingScore:
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]
    generated: int
    correct: int
    baseline: int


def evaluate_matching(
    predicted: Mapping[str, PropertyAlignment],
    truth: Mapping[str, tuple[frozenset, str]],
) -> MatchingScore:
    """A prediction is correct iff signal set and mapping kind both match.

    Flagged alignments count as not generated (the conservative strategy:
    ambiguous cases go to review instead of code generation).
    """
    generated = {
        name: alignment
        for name, alignment in predicted.items()
        if alignment.active
    }
    correct = 0
    for name, alignment in generated.items():
        expected = truth.get(name)
        if expected is None:
            continue
        signals, kind = expected
        if (
            frozenset(alignment.contributing_signals) == frozenset(signals)
            and alignment.mapping_kind == kind
        ):
            correct += 1
    n_generated = len(generated)
    n_baseline = len(truth)
    precision = correct / n_generated if n_generated else None
    recall = correct / n_baseline if n_baseline else None
    f1 = None
    if precision is not None and recall is not None and (precision + recall) > 0:
        f1 = 2 * precision * recall / (precision + recall)
    elif precision is not None and recall is not None:
        f1 = 0.0
    return MatchingScore(
        precision=precision,
        recall=recall,
        f1=f1,
        generated=n_generated,
        correct=correct,
        baseline=n_baseline,
    )


# ---------------------------------------------------------------------------
# Serialization (the JSON alignment template rendered as a YAML record)
# ---------------------------------------------------------------------------

def alignment_record(alignment: PropertyAlignment) -> dict:
    record: dict = {
        "property": alignment.property_name,
        "mapping_kind": alignment.mapping_kind,
        "contributing_signals": list(alignment.contributing_signals),
        "confidence": alignment.confidence,
        "status": alignment.status,
    }
    if alignment.value_map is not None:
        record["value_map"] = dict(alignment.value_map)
    if alignment.enum_correspondence is not None:
        record["enum_correspondence"] = dict(alignment.enum_correspondence)
    if alignment.unit_conversion is not None:
        record["unit_conversion"] = {
            "factor": alignment.unit_conversion[0],
            "offset": alignment.unit_conversion[1],
        }
    if alignment.rationale:
        record["rationale"] = alignment.rationale
    if alignment.candidates:
        record["candidates"] = [
            {"signal": name, "similarity": sim} for name, sim in alignment.candidates
        ]
    return record


def alignment_from_record(record: dict) -> PropertyAlignment:
    conversion = record.get("unit_conversion")
    return PropertyAlignment(
        property_name=record["property"],
        mapping_kind=record["mapping_kind"],
        contributing_signals=tuple(record["contributing_signals"]),
        value_map=record.get("value_map"),
        enum_correspondence=record.get("enum_correspondence"),
        unit_conversion=(
            (float(conversion["factor"]), float(conversion["offset"]))
            if conversion
            else None
        ),
        confidence=float(record.get("confidence", 0.0)),
        status=record.get("status", "flagged"),
        rationale=record.get("rationale", ""),
        candidates=tuple(
            (c["signal"], float(c["similarity"]))
            for c in record.get("candidates", [])
        ),
    )
