"""Signal codec synthesis, validation, and repair.

A codec is an executable expression tree: decode turns an 8-byte frame into
the physical value, encode is the structural inverse and writes only the
signal's own bit field. Providers emit the tree as a JSON payload; this
module parses, evaluates, validates against catalog-derived test vectors,
and drives the self-debug loop that feeds failures back to the provider.

Trees are evaluated here rather than executed as free-form source, so the
validation gate runs hermetically; a separate emitter renders readable
source for humans.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import templates
from .catalog import (
    ByteOrder,
    FRAME_BYTES,
    SignalCatalog,
    SignalDef,
    SignalKind,
    insert_raw,
    raw_is_valid,
    reference_decode,
)
from .errors import DomainError, EvaluationError
from .providers import CODEC_SCHEMA, CompletionProvider, CompletionRequest

ZERO_FRAME = b"\x00" * FRAME_BYTES
# Fixed bit noise used to prove field isolation; vectors clear the signal's
# own bits out of it before inserting the raw value.
NOISE_FRAME = b"\xa5" * FRAME_BYTES

DEFAULT_MAX_DEBUG_ROUNDS = 3


# ---------------------------------------------------------------------------
# Expression tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RawField:
    bit_start: int
    bit_length: int
    byte_order: str
    signed: bool


@dataclass(frozen=True)
class Affine:
    scale: float
    offset: float
    child: object


@dataclass(frozen=True)
class EnumLookup:
    table: tuple[tuple[int, str], ...]
    child: object


@dataclass(frozen=True)
class BoolMap:
    child: object


@dataclass(frozen=True)
class Clamp:
    lo: Optional[float]
    hi: Optional[float]
    child: object


@dataclass(frozen=True)
class Combine:
    mode: str
    children: tuple[tuple[str, float, object], ...]  # (name, weight, expr)


@dataclass(frozen=True)
class Opaque:
    """A node the evaluator does not understand (e.g. a provider bug such
    as call-syntax lookup). Kept verbatim so diagnostics can show it."""

    payload: dict


@dataclass(frozen=True)
class CodecExpr:
    """Decode tree for one signal; encode is the structural inverse."""

    root: object

    @staticmethod
    def from_payload(payload: dict) -> "CodecExpr":
        return CodecExpr(root=_parse_node(payload.get("decode")))

    def to_payload(self) -> dict:
        return {"decode": _render_node(self.root)}


def _parse_node(node) -> object:
    if not isinstance(node, dict) or not isinstance(node.get("op"), str):
        return Opaque(payload={"op": "malformed", "node": node})
    op = node["op"]
    try:
        if op == "raw_field":
            return RawField(
                bit_start=int(node["bit_start"]),
                bit_length=int(node["bit_length"]),
                byte_order=str(node["byte_order"]),
                signed=bool(node["signed"]),
            )
        if op == "affine":
            return Affine(
                scale=float(node["scale"]),
                offset=float(node["offset"]),
                child=_parse_node(node["child"]),
            )
        if op == "enum_lookup":
            table = tuple(
                sorted((int(k), str(v)) for k, v in node["table"].items())
            )
            return EnumLookup(table=table, child=_parse_node(node["child"]))
        if op == "bool_map":
            return BoolMap(child=_parse_node(node["child"]))
        if op == "clamp":
            return Clamp(
                lo=None if node.get("min") is None else float(node["min"]),
                hi=None if node.get("max") is None else float(node["max"]),
                child=_parse_node(node["child"]),
            )
        if op == "combine":
            children = tuple(
                (str(c["name"]), float(c["weight"]), _parse_node(c["expr"]))
                for c in node["children"]
            )
            return Combine(mode=str(node.get("mode", "weighted_sum")), children=children)
    except (KeyError, TypeError, ValueError):
        return Opaque(payload=node)
    return Opaque(payload=node)


def _render_node(node) -> dict:
    if isinstance(node, RawField):
        return {
            "op": "raw_field",
            "bit_start": node.bit_start,
            "bit_length": node.bit_length,
            "byte_order": node.byte_order,
            "signed": node.signed,
        }
    if isinstance(node, Affine):
        return {
            "op": "affine",
            "scale": node.scale,
            "offset": node.offset,
            "child": _render_node(node.child),
        }
    if isinstance(node, EnumLookup):
        return {
            "op": "enum_lookup",
            "table": {str(k): v for k, v in node.table},
            "child": _render_node(node.child),
        }
    if isinstance(node, BoolMap):
        return {"op": "bool_map", "child": _render_node(node.child)}
    if isinstance(node, Clamp):
        return {
            "op": "clamp",
            "min": node.lo,
            "max": node.hi,
            "child": _render_node(node.child),
        }
    if isinstance(node, Combine):
        return {
            "op": "combine",
            "mode": node.mode,
            "children": [
                {"name": name, "weight": weight, "expr": _render_node(expr)}
                for name, weight, expr in node.children
            ],
        }
    if isinstance(node, Opaque):
        return node.payload
    raise EvaluationError(f"unrenderable node {node!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _field_shift(node: RawField) -> int:
    if node.byte_order == ByteOrder.LITTLE.value:
        return node.bit_start
    if node.byte_order == ByteOrder.BIG.value:
        return 64 - node.bit_start - node.bit_length
    raise EvaluationError(f"unknown byte order {node.byte_order!r}")


def _decode_node(node, frame: bytes):
    if isinstance(node, RawField):
        if node.byte_order == ByteOrder.LITTLE.value:
            whole = int.from_bytes(frame, "little")
        else:
            whole = int.from_bytes(frame, "big")
        shift = _field_shift(node)
        if shift < 0 or shift + node.bit_length > 64:
            raise EvaluationError("field outside the 64-bit frame")
        raw = (whole >> shift) & ((1 << node.bit_length) - 1)
        if node.signed and raw >= (1 << (node.bit_length - 1)):
            raw -= 1 << node.bit_length
        return raw
    if isinstance(node, Affine):
        return node.scale * _decode_node(node.child, frame) + node.offset
    if isinstance(node, EnumLookup):
        raw = _decode_node(node.child, frame)
        for key, label in node.table:
            if key == raw:
                return label
        raise DomainError(f"raw value {raw} has no enum label")
    if isinstance(node, BoolMap):
        return bool(_decode_node(node.child, frame))
    if isinstance(node, Clamp):
        value = _decode_node(node.child, frame)
        if node.lo is not None and value < node.lo:
            raise DomainError(f"decoded value {value} below range {node.lo}")
        if node.hi is not None and value > node.hi:
            raise DomainError(f"decoded value {value} above range {node.hi}")
        return value
    if isinstance(node, Combine):
        if node.mode != "weighted_sum":
            raise EvaluationError(f"unknown combine mode {node.mode!r}")
        total = 0.0
        for _, weight, expr in node.children:
            part = _decode_node(expr, frame)
            if isinstance(part, bool):
                part = int(part)
            if not isinstance(part, (int, float)):
                raise EvaluationError("combine child produced a non-number")
            total += weight * float(part)
        return total
    if isinstance(node, Opaque):
        raise EvaluationError(
            f"cannot evaluate operator {node.payload.get('op')!r}"
        )
    raise EvaluationError(f"unknown node {node!r}")


def _encode_raw(node: RawField, raw: int, frame: bytes) -> bytes:
    if node.signed:
        half = 1 << (node.bit_length - 1)
        lo, hi = -half, half - 1
    else:
        lo, hi = 0, (1 << node.bit_length) - 1
    raw = max(lo, min(hi, raw))
    pattern = raw & ((1 << node.bit_length) - 1)
    shift = _field_shift(node)
    order = "little" if node.byte_order == ByteOrder.LITTLE.value else "big"
    whole = int.from_bytes(frame, order)
    mask = ((1 << node.bit_length) - 1) << shift
    whole = (whole & ~mask) | (pattern << shift)
    return whole.to_bytes(FRAME_BYTES, order)


def _encode_node(node, value, frame: bytes) -> bytes:
    if isinstance(node, RawField):
        return _encode_raw(node, round(value), frame)
    if isinstance(node, Affine):
        if node.scale == 0:
            raise EvaluationError("affine scale 0 is not invertible")
        return _encode_node(node.child, (value - node.offset) / node.scale, frame)
    if isinstance(node, EnumLookup):
        for key, label in node.table:
            if label == value:
                return _encode_node(node.child, key, frame)
        raise DomainError(f"no raw encoding for label {value!r}")
    if isinstance(node, BoolMap):
        return _encode_node(node.child, 1 if value else 0, frame)
    if isinstance(node, Clamp):
        if node.lo is not None and value < node.lo:
            value = node.lo
        if node.hi is not None and value > node.hi:
            value = node.hi
        return _encode_node(node.child, value, frame)
    if isinstance(node, Combine):
        if node.mode != "weighted_sum":
            raise EvaluationError(f"unknown combine mode {node.mode!r}")
        remaining = float(value)
        ordered = sorted(node.children, key=lambda c: -abs(c[1]))
        out = frame
        for i, (_, weight, expr) in enumerate(ordered):
            if weight == 0:
                raise EvaluationError("combine weight 0 is not invertible")
            if i < len(ordered) - 1:
                part = math.floor(remaining / weight)
            else:
                part = remaining / weight
            out = _encode_node(expr, part, out)
            remaining -= part * weight
        return out
    if isinstance(node, Opaque):
        raise EvaluationError(f"cannot evaluate operator {node.payload.get('op')!r}")
    raise EvaluationError(f"unknown node {node!r}")


def decode_value(codec: CodecExpr, frame: bytes):
    """Decode the physical value from a frame."""
    return _decode_node(codec.root, frame)


def encode_value(codec: CodecExpr, value, frame: bytes = ZERO_FRAME) -> bytes:
    """Encode a physical value, touching only the signal's own bits."""
    return _encode_node(codec.root, value, frame)


def evaluate(codec: CodecExpr, frame: bytes = ZERO_FRAME, direction: str = "decode", value=None):
    if direction == "decode":
        return decode_value(codec, frame)
    if direction == "encode":
        return encode_value(codec, value, frame)
    raise ValueError(f"direction must be decode or encode, got {direction!r}")


# ---------------------------------------------------------------------------
# Test vectors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestVector:
    """One check derived from the catalog definition (never from the codec).

    decode: `decode(frame) == expected`
    encode: `encode(expected, base_frame) == frame`
    roundtrip: `encode(decode(frame), frame) == frame`
    """

    frame: bytes
    expected: object
    direction: str
    base_frame: bytes = ZERO_FRAME
    note: str = ""


def _noise_base(sig: SignalDef) -> bytes:
    """Noise frame with the signal's own field bits cleared."""
    return insert_raw(sig, 0, NOISE_FRAME)


def valid_raw_bounds(sig: SignalDef) -> tuple[int, int]:
    """Smallest and largest raw values inside the signal's valid domain."""
    lo, hi = sig.raw_bounds()
    if sig.kind is SignalKind.ENUM:
        keys = sorted(sig.enum_map)
        return keys[0], keys[-1]
    if sig.kind is SignalKind.NUMERICAL and (
        sig.range_min is not None or sig.range_max is not None
    ):
        bounds = []
        for target in (sig.range_min, sig.range_max):
            if target is None:
                continue
            bounds.append((target - sig.offset) / sig.scale)
        if bounds:
            raw_lo = math.ceil(min(bounds))
            raw_hi = math.floor(max(bounds))
            lo, hi = max(lo, raw_lo), min(hi, raw_hi)
        # Float boundaries can land one step off the true valid domain.
        while lo <= hi and not raw_is_valid(sig, lo):
            lo += 1
        while hi >= lo and not raw_is_valid(sig, hi):
            hi -= 1
    return lo, hi


def generate_test_vectors(
    sig: SignalDef, catalog: Optional[SignalCatalog] = None
) -> list[TestVector]:
    """Deterministic vectors covering the raw-domain boundaries, every enum
    entry, range-mapped frames, a field-isolation frame, and a roundtrip."""
    if sig.kind is SignalKind.OBJECT:
        return _object_vectors(sig, catalog)

    vectors: list[TestVector] = []
    noise = _noise_base(sig)

    def decode_vec(raw: int, note: str, base: bytes = ZERO_FRAME):
        frame = insert_raw(sig, raw, base)
        expected = reference_decode(sig, frame, catalog)
        vectors.append(TestVector(frame, expected, "decode", note=note))

    def encode_vec(raw: int, note: str, base: bytes = ZERO_FRAME):
        frame = insert_raw(sig, raw, base)
        expected = reference_decode(sig, frame, catalog)
        vectors.append(
            TestVector(frame, expected, "encode", base_frame=base, note=note)
        )

    if sig.kind is SignalKind.ENUM:
        for raw in sorted(sig.enum_map):
            decode_vec(raw, f"enum entry {raw}")
            encode_vec(raw, f"enum entry {raw} (write)")
        first = min(sig.enum_map)
        decode_vec(first, "field isolation", base=noise)
        encode_vec(first, "field isolation (write)", base=noise)
        vectors.append(
            TestVector(
                insert_raw(sig, max(sig.enum_map)), None, "roundtrip", note="roundtrip"
            )
        )
        return vectors

    if sig.kind is SignalKind.BOOL:
        for raw in (0, 1):
            decode_vec(raw, f"bool {raw}")
            encode_vec(raw, f"bool {raw} (write)")
        decode_vec(1, "field isolation", base=noise)
        vectors.append(TestVector(insert_raw(sig, 1), None, "roundtrip", note="roundtrip"))
        return vectors

    lo, hi = valid_raw_bounds(sig)
    if lo > hi:
        raise DomainError(f"{sig.name}: valid raw domain is empty")
    mid = (lo + hi) // 2
    decode_vec(lo, "lower boundary (all-zero field when unranged)")
    decode_vec(hi, "upper boundary (all-one field when unranged)")
    if sig.range_min is not None or sig.range_max is not None:
        decode_vec(lo, "range_min-mapped frame")
        decode_vec(hi, "range_max-mapped frame")
    decode_vec(mid, "midpoint")
    encode_vec(lo, "lower boundary (write)")
    encode_vec(hi, "upper boundary (write)")
    decode_vec(mid, "field isolation", base=noise)
    encode_vec(mid, "field isolation (write)", base=noise)
    vectors.append(TestVector(insert_raw(sig, mid), None, "roundtrip", note="roundtrip"))
    return vectors


def _object_vectors(sig: SignalDef, catalog: Optional[SignalCatalog]) -> list[TestVector]:
    if catalog is None:
        raise DomainError(f"{sig.name}: object vectors need the catalog")
    children = catalog.resolve_components(sig)
    combos = []
    bounds = [valid_raw_bounds(child) for child, _ in children]
    combos.append([lo for lo, _ in bounds])
    combos.append([hi for _, hi in bounds])
    combos.append([lo if i % 2 == 0 else hi for i, (lo, hi) in enumerate(bounds)])
    combos.append([(lo + hi) // 2 for lo, hi in bounds])

    vectors: list[TestVector] = []
    for combo_index, combo in enumerate(combos):
        frame = ZERO_FRAME
        for (child, _), raw in zip(children, combo):
            frame = insert_raw(child, raw, frame)
        expected = reference_decode(sig, frame, catalog)
        vectors.append(
            TestVector(frame, expected, "decode", note=f"combo {combo_index}")
        )
    vectors.append(TestVector(vectors[-1].frame, None, "roundtrip", note="roundtrip"))
    # Field isolation: children written into a noisy frame.
    noise = NOISE_FRAME
    for child, _ in children:
        noise = insert_raw(child, 0, noise)
    frame = noise
    for (child, _), raw in zip(children, combos[3]):
        frame = insert_raw(child, raw, frame)
    vectors.append(
        TestVector(
            frame,
            reference_decode(sig, frame, catalog),
            "decode",
            note="field isolation",
        )
    )
    return vectors


def vectors_digest(vectors: Sequence[TestVector]) -> str:
    body = json.dumps(
        [
            {
                "frame": v.frame.hex(),
                "expected": v.expected,
                "direction": v.direction,
                "base": v.base_frame.hex(),
            }
            for v in vectors
        ],
        sort_keys=True,
    )
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Validation (the test gate) and synthesis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VectorFailure:
    vector: TestVector
    got: object
    expected: object
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    status: str  # "pass" | "fail"
    failures: tuple[VectorFailure, ...] = ()


def _values_equal(got, expected) -> bool:
    if isinstance(expected, bool) or isinstance(got, bool):
        return got is expected
    if isinstance(expected, str) or isinstance(got, str):
        return got == expected
    if expected is None or got is None:
        return got is expected
    return got == expected


def validate_codec(codec: CodecExpr, vectors: Sequence[TestVector]) -> ValidationReport:
    """Run every vector through the evaluator; malformed trees fail with a
    diagnostic, never a crash."""
    failures: list[VectorFailure] = []
    for vector in vectors:
        try:
            if vector.direction == "decode":
                got = decode_value(codec, vector.frame)
                if not _values_equal(got, vector.expected):
                    failures.append(VectorFailure(vector, got, vector.expected))
            elif vector.direction == "encode":
                got_frame = encode_value(codec, vector.expected, vector.base_frame)
                if got_frame != vector.frame:
                    failures.append(
                        VectorFailure(
                            vector, got_frame.hex(), vector.frame.hex()
                        )
                    )
            elif vector.direction == "roundtrip":
                value = decode_value(codec, vector.frame)
                got_frame = encode_value(codec, value, vector.frame)
                if got_frame != vector.frame:
                    failures.append(
                        VectorFailure(vector, got_frame.hex(), vector.frame.hex())
                    )
            else:
                failures.append(
                    VectorFailure(vector, None, vector.expected, "unknown direction")
                )
        except (DomainError, EvaluationError) as exc:
            if vector.direction == "decode" and vector.expected is None and isinstance(exc, DomainError):
                continue  # invalid raw: both routes agree the frame is undecodable
            failures.append(VectorFailure(vector, None, vector.expected, str(exc)))
    if failures:
        return ValidationReport(status="fail", failures=tuple(failures))
    return ValidationReport(status="pass")


def static_codec_problems(codec: CodecExpr, sig: SignalDef) -> list[str]:
    """Release-gate checks that need the signal definition: literal
    finiteness and enum-table exactness against the catalog."""
    problems: list[str] = []

    def walk(node):
        if isinstance(node, Affine):
            if not math.isfinite(node.scale) or not math.isfinite(node.offset):
                problems.append("non-finite affine literal")
            walk(node.child)
        elif isinstance(node, Clamp):
            for bound in (node.lo, node.hi):
                if bound is not None and not math.isfinite(bound):
                    problems.append("non-finite clamp bound")
            walk(node.child)
        elif isinstance(node, EnumLookup):
            if dict(node.table) != dict(sig.enum_map):
                problems.append("enum table differs from the catalog enum_map")
            walk(node.child)
        elif isinstance(node, BoolMap):
            walk(node.child)
        elif isinstance(node, Combine):
            for _, weight, expr in node.children:
                if not math.isfinite(weight):
                    problems.append("non-finite combine weight")
                walk(expr)

    walk(codec.root)
    return problems


def synthesize_codec(
    sig: SignalDef,
    provider: CompletionProvider,
    catalog: Optional[SignalCatalog] = None,
    attempt: int = 1,
    feedback: Optional[str] = None,
) -> tuple[CodecExpr, str]:
    """One synthesis call; returns (codec, provider_id). Schema-valid but
    not necessarily semantically correct — that is validate_codec's job."""
    request = CompletionRequest(
        task_tag="codec_synthesis",
        prompt_sections=templates.codec_sections(sig, catalog),
        output_schema=CODEC_SCHEMA,
        attempt=attempt,
        feedback=feedback,
    )
    result = provider.complete_structured(request)
    return CodecExpr.from_payload(result.payload), result.provider_id


@dataclass(frozen=True)
class SynthesisReport:
    signal: str
    status: str  # "pass" | "fail"
    attempts: int
    failures: tuple[str, ...] = ()
    codec: Optional[CodecExpr] = None
    provider_id: str = ""
    vector_digest: str = ""


def _failure_feedback(report: ValidationReport, static_problems: list[str]) -> str:
    lines = ["the generated codec failed validation:"]
    for failure in report.failures[:10]:
        lines.append(
            f"- {failure.vector.direction} [{failure.vector.note}] "
            f"expected {failure.expected!r}, got {failure.got!r}"
            + (f" ({failure.detail})" if failure.detail else "")
        )
    for problem in static_problems:
        lines.append(f"- static check: {problem}")
    return "\n".join(lines)


def debug_loop(
    sig: SignalDef,
    provider: CompletionProvider,
    max_rounds: int = DEFAULT_MAX_DEBUG_ROUNDS,
    catalog: Optional[SignalCatalog] = None,
) -> SynthesisReport:
    """Synthesize → validate → feed failures back, until pass or exhaustion.

    Only pass-status codecs may be released downstream; exhaustion reports
    fail rather than raising.
    """
    if max_rounds < 0:
        raise ValueError("max_rounds must be >= 0")
    vectors = generate_test_vectors(sig, catalog)
    digest = vectors_digest(vectors)
    feedback: Optional[str] = None
    last_failures: tuple[str, ...] = ()
    attempts = 0
    for _ in range(max_rounds + 1):
        attempts += 1
        codec, provider_id = synthesize_codec(
            sig, provider, catalog, attempt=attempts, feedback=feedback
        )
        report = validate_codec(codec, vectors)
        static_problems = static_codec_problems(codec, sig)
        if report.status == "pass" and not static_problems:
            return SynthesisReport(
                signal=sig.name,
                status="pass",
                attempts=attempts,
                codec=codec,
                provider_id=provider_id,
                vector_digest=digest,
            )
        feedback = _failure_feedback(report, static_problems)
        last_failures = tuple(
            f"{f.vector.direction}[{f.vector.note}]: expected {f.expected!r}, got {f.got!r}"
            for f in report.failures
        ) + tuple(static_problems)
    return SynthesisReport(
        signal=sig.name,
        status="fail",
        attempts=attempts,
        failures=last_failures,
        vector_digest=digest,
    )


# ---------------------------------------------------------------------------
# Human-readable source emission (explainable + executable duality)
# ---------------------------------------------------------------------------

def emit_source(sig: SignalDef, codec: CodecExpr) -> str:
    """Render a codec as readable pseudo-Python read/write functions."""
    decode_expr = _emit_decode(codec.root, "frame")
    encode_lines = _emit_encode(codec.root)
    lines = [
        f"# {sig.name}: {sig.kind.value} signal"
        + (f", unit {sig.unit}" if sig.unit else ""),
        f"def read_{sig.name}(frame):",
        f"    return {decode_expr}",
        "",
        f"def write_{sig.name}(value, frame):",
    ]
    lines.extend("    " + line for line in encode_lines)
    lines.append("    return frame")
    return "\n".join(lines) + "\n"


def _emit_decode(node, frame_var: str) -> str:
    if isinstance(node, RawField):
        return (
            f"extract_bits({frame_var}, start={node.bit_start}, "
            f"length={node.bit_length}, order='{node.byte_order}', "
            f"signed={node.signed})"
        )
    if isinstance(node, Affine):
        return f"{node.scale!r} * {_emit_decode(node.child, frame_var)} + {node.offset!r}"
    if isinstance(node, EnumLookup):
        table = "{" + ", ".join(f"{k}: {v!r}" for k, v in node.table) + "}"
        return f"{table}[{_emit_decode(node.child, frame_var)}]"
    if isinstance(node, BoolMap):
        return f"bool({_emit_decode(node.child, frame_var)})"
    if isinstance(node, Clamp):
        return (
            f"check_range({_emit_decode(node.child, frame_var)}, "
            f"lo={node.lo!r}, hi={node.hi!r})"
        )
    if isinstance(node, Combine):
        terms = " + ".join(
            f"{weight!r} * read_{name}({frame_var})"
            for name, weight, _ in node.children
        )
        return terms
    if isinstance(node, Opaque):
        return f"<unevaluable {node.payload.get('op')!r}>"
    return "<unknown>"


def _emit_encode(node) -> list[str]:
    if isinstance(node, Combine):
        lines = ["remaining = value"]
        ordered = sorted(node.children, key=lambda c: -abs(c[1]))
        for i, (name, weight, _) in enumerate(ordered):
            if i < len(ordered) - 1:
                lines.append(f"part_{name} = floor(remaining / {weight!r})")
            else:
                lines.append(f"part_{name} = remaining / {weight!r}")
            lines.append(f"frame = write_{name}(part_{name}, frame)")
            lines.append(f"remaining -= part_{name} * {weight!r}")
        return lines
    lines = ["raw = value"]
    steps: list[str] = []

    def descend(inner):
        if isinstance(inner, Affine):
            steps.append(f"raw = (raw - {inner.offset!r}) / {inner.scale!r}")
            descend(inner.child)
        elif isinstance(inner, EnumLookup):
            table = "{" + ", ".join(f"{v!r}: {k}" for k, v in inner.table) + "}"
            steps.append(f"raw = {table}[raw]")
            descend(inner.child)
        elif isinstance(inner, BoolMap):
            steps.append("raw = 1 if raw else 0")
            descend(inner.child)
        elif isinstance(inner, Clamp):
            steps.append(f"raw = saturate(raw, lo={inner.lo!r}, hi={inner.hi!r})")
            descend(inner.child)
        elif isinstance(inner, RawField):
            steps.append(
                f"frame = insert_bits(frame, round(raw), start={inner.bit_start}, "
                f"length={inner.bit_length}, order='{inner.byte_order}', "
                f"signed={inner.signed})"
            )
        else:
            steps.append("# unevaluable node")

    descend(node)
    return lines + steps


# ---------------------------------------------------------------------------
# Persistence records
# ---------------------------------------------------------------------------

def codec_record(report: SynthesisReport) -> dict:
    """Structured record for a pass-validated codec."""
    if report.status != "pass" or report.codec is None:
        raise DomainError(f"{report.signal}: only pass-validated codecs are persisted")
    return {
        "signal": report.signal,
        "tree": report.codec.to_payload(),
        "vector_digest": report.vector_digest,
        "provider_id": report.provider_id,
        "attempts": report.attempts,
    }


def codec_from_record(record: dict) -> CodecExpr:
    return CodecExpr.from_payload(record["tree"])
