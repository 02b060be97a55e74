"""Signal catalog: parse, validate, and enrich CAN signal definitions.

The catalog file is a YAML document with a top-level ``signals:`` list; field
names mirror :class:`SignalDef` verbatim. Signals live in a single 8-byte
frame (classic CAN payload, 64 bits).

Bit numbering
-------------
* ``little_endian``: ``bit_start`` counts from the least significant bit of
  the payload read LSB-first (bit 0 = byte 0, bit 0). The field occupies
  bits ``bit_start .. bit_start+bit_length-1`` with increasing significance.
* ``big_endian`` (Motorola-style MSB-first): ``bit_start`` counts from the
  most significant bit of the payload read MSB-first (bit 0 = byte 0,
  bit 7). The field extends toward lower significance.

This module also defines the *reference semantics* of a signal —
:func:`reference_decode` / :func:`reference_encode` walk the frame bit by
bit, straight from the definition. Synthesized codecs are validated against
these semantics, never against themselves.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

import yaml

from . import yamlio
from .errors import DomainError, DuplicateName, InvariantError, ProviderError, SchemaError

FRAME_BITS = 64
FRAME_BYTES = 8


class SignalKind(str, Enum):
    """The four signal categories: enum, bool, numerical, object."""

    ENUM = "enum"
    BOOL = "bool"
    NUMERICAL = "numerical"
    OBJECT = "object"


class ByteOrder(str, Enum):
    BIG = "big_endian"
    LITTLE = "little_endian"


@dataclass(frozen=True)
class Component:
    """Child of an object signal: the child's name plus its weight in the
    weighted-sum composition (e.g. 60 for minutes, 1 for seconds)."""

    name: str
    weight: float


@dataclass(frozen=True)
class SignalDef:
    """One CAN signal: bit layout, kind, scaling, enumeration, and prose."""

    name: str
    kind: SignalKind
    bit_start: int = 0
    bit_length: int = 1
    byte_order: ByteOrder = ByteOrder.LITTLE
    signed: bool = False
    scale: float = 1.0
    offset: float = 0.0
    unit: Optional[str] = None
    range_min: Optional[float] = None
    range_max: Optional[float] = None
    enum_map: Mapping[int, str] = field(default_factory=dict)
    components: Sequence[Component] = ()
    description: str = ""

    def raw_bounds(self) -> tuple[int, int]:
        """Raw integer bounds of the bit field (signed two's complement)."""
        if self.signed:
            half = 1 << (self.bit_length - 1)
            return -half, half - 1
        return 0, (1 << self.bit_length) - 1


@dataclass(frozen=True)
class SignalCatalog:
    """Immutable map of signal name to definition plus provenance."""

    signals: Mapping[str, SignalDef]
    source_path: str = "<memory>"

    def __iter__(self):
        return iter(self.signals.values())

    def __len__(self) -> int:
        return len(self.signals)

    def get(self, name: str) -> SignalDef:
        try:
            return self.signals[name]
        except KeyError:
            raise InvariantError("unknown signal", subject=name, field="name")

    def resolve_components(self, sig: SignalDef) -> list[tuple[SignalDef, float]]:
        return [(self.get(c.name), c.weight) for c in sig.components]


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------

_SCALARS = {
    "name": str,
    "kind": str,
    "bit_start": int,
    "bit_length": int,
    "byte_order": str,
    "signed": bool,
    "scale": (int, float),
    "offset": (int, float),
    "unit": str,
    "range_min": (int, float),
    "range_max": (int, float),
    "description": str,
}

_OPTIONAL = {
    "byte_order", "signed", "scale", "offset", "unit",
    "range_min", "range_max", "description", "enum_map", "components",
}


def _field_path(index: int, fname: str) -> str:
    return f"signals[{index}].{fname}"


def _parse_signal(record: object, index: int) -> SignalDef:
    path = f"signals[{index}]"
    if not isinstance(record, dict):
        raise SchemaError("signal record must be a mapping", path=path)

    known = set(_SCALARS) | {"enum_map", "components"}
    for key in record:
        if key not in known:
            raise SchemaError(f"unknown field {key!r}", path=f"{path}.{key}")

    def need(fname: str):
        if fname not in record or record[fname] is None:
            raise SchemaError("required field missing", path=_field_path(index, fname))
        return record[fname]

    def opt(fname: str, default):
        value = record.get(fname)
        return default if value is None else value

    name = need("name")
    kind_raw = need("kind")
    for fname, types in _SCALARS.items():
        value = record.get(fname)
        if value is None:
            continue
        if fname == "signed":
            if not isinstance(value, bool):
                raise SchemaError("expected boolean", path=_field_path(index, fname))
        elif isinstance(value, bool) or not isinstance(value, types):
            raise SchemaError(
                f"expected {getattr(types, '__name__', 'number')}, got {type(value).__name__}",
                path=_field_path(index, fname),
            )

    try:
        kind = SignalKind(kind_raw)
    except ValueError:
        raise SchemaError(
            f"kind must be one of {[k.value for k in SignalKind]}, got {kind_raw!r}",
            path=_field_path(index, "kind"),
        )

    # Object signals carry no bit field of their own; layout lives in the
    # children. Defaults keep the frame invariants trivially satisfied.
    if kind is SignalKind.OBJECT:
        bit_start = opt("bit_start", 0)
        bit_length = opt("bit_length", 1)
    else:
        bit_start = need("bit_start")
        bit_length = need("bit_length")

    order_raw = opt("byte_order", ByteOrder.LITTLE.value)
    try:
        byte_order = ByteOrder(order_raw)
    except ValueError:
        raise SchemaError(
            f"byte_order must be big_endian or little_endian, got {order_raw!r}",
            path=_field_path(index, "byte_order"),
        )

    enum_map: dict[int, str] = {}
    if record.get("enum_map") is not None:
        raw_map = record["enum_map"]
        if not isinstance(raw_map, dict):
            raise SchemaError("enum_map must be a mapping", path=_field_path(index, "enum_map"))
        for key, label in raw_map.items():
            try:
                int_key = int(key)
            except (TypeError, ValueError):
                raise SchemaError(
                    f"enum_map key {key!r} is not an integer",
                    path=_field_path(index, "enum_map"),
                )
            if not isinstance(label, str):
                raise SchemaError(
                    f"enum_map value for {key!r} must be a string",
                    path=_field_path(index, "enum_map"),
                )
            enum_map[int_key] = label

    components: list[Component] = []
    if record.get("components") is not None:
        raw_components = record["components"]
        if not isinstance(raw_components, list):
            raise SchemaError("components must be a list", path=_field_path(index, "components"))
        for j, comp in enumerate(raw_components):
            if not isinstance(comp, dict) or "name" not in comp or "weight" not in comp:
                raise SchemaError(
                    "component needs name and weight",
                    path=f"{path}.components[{j}]",
                )
            if not isinstance(comp["name"], str) or not isinstance(comp["weight"], (int, float)):
                raise SchemaError(
                    "component name must be string, weight numeric",
                    path=f"{path}.components[{j}]",
                )
            components.append(Component(comp["name"], float(comp["weight"])))

    return SignalDef(
        name=name,
        kind=kind,
        bit_start=bit_start,
        bit_length=bit_length,
        byte_order=byte_order,
        signed=bool(opt("signed", False)),
        scale=float(opt("scale", 1.0)),
        offset=float(opt("offset", 0.0)),
        unit=record.get("unit"),
        range_min=None if record.get("range_min") is None else float(record["range_min"]),
        range_max=None if record.get("range_max") is None else float(record["range_max"]),
        enum_map=enum_map,
        components=tuple(components),
        description=opt("description", ""),
    )


def check_signal_invariants(sig: SignalDef) -> None:
    """Raise InvariantError naming the signal and field on any violation."""
    if sig.bit_start < 0 or sig.bit_start > 63:
        raise InvariantError("bit_start must be in 0..63", sig.name, "bit_start")
    if sig.bit_length < 1 or sig.bit_length > 64:
        raise InvariantError("bit_length must be in 1..64", sig.name, "bit_length")
    if sig.bit_start + sig.bit_length > FRAME_BITS:
        raise InvariantError(
            f"field spills out of the 64-bit frame "
            f"(bit_start {sig.bit_start} + bit_length {sig.bit_length} > 64)",
            sig.name,
            "bit_length",
        )
    if not math.isfinite(sig.scale) or not math.isfinite(sig.offset):
        raise InvariantError("scale and offset must be finite", sig.name, "scale")
    if sig.kind is SignalKind.BOOL and sig.bit_length != 1:
        raise InvariantError("bool signals must have bit_length 1", sig.name, "bit_length")
    if sig.kind is SignalKind.ENUM:
        if not sig.enum_map:
            raise InvariantError("enum signals need a non-empty enum_map", sig.name, "enum_map")
        limit = 1 << sig.bit_length
        for key in sig.enum_map:
            if key < 0 or key >= limit:
                raise InvariantError(
                    f"enum key {key} not representable in {sig.bit_length} bits",
                    sig.name,
                    "enum_map",
                )
    elif sig.enum_map:
        raise InvariantError("enum_map only allowed on enum signals", sig.name, "enum_map")
    if sig.kind is SignalKind.OBJECT:
        if not sig.components:
            raise InvariantError("object signals need components", sig.name, "components")
    elif sig.components:
        raise InvariantError("components only allowed on object signals", sig.name, "components")
    if sig.range_min is not None and sig.range_max is not None:
        if sig.range_min > sig.range_max:
            raise InvariantError(
                f"range_min {sig.range_min} exceeds range_max {sig.range_max}",
                sig.name,
                "range_min",
            )


def _check_catalog_invariants(signals: Mapping[str, SignalDef]) -> None:
    for sig in signals.values():
        check_signal_invariants(sig)
    for sig in signals.values():
        if sig.kind is not SignalKind.OBJECT:
            continue
        for comp in sig.components:
            if comp.name not in signals:
                raise InvariantError(
                    f"component {comp.name!r} not in catalog", sig.name, "components"
                )
            if signals[comp.name].kind is SignalKind.OBJECT:
                # No nested objects: keeps composition semantics flat.
                raise InvariantError(
                    f"component {comp.name!r} is itself an object signal",
                    sig.name,
                    "components",
                )
        # Children may not overlap bit ranges, otherwise encode is ill-defined.
        spans = []
        for child, _ in ((signals[c.name], c.weight) for c in sig.components):
            lo = field_lsb(child)
            spans.append((lo, lo + child.bit_length, child.name))
        spans.sort()
        for (a_lo, a_hi, a_name), (b_lo, b_hi, b_name) in zip(spans, spans[1:]):
            if b_lo < a_hi:
                raise InvariantError(
                    f"components {a_name!r} and {b_name!r} overlap in the frame",
                    sig.name,
                    "components",
                )
    # Cycle check is subsumed by the no-nested-object rule, but keep a direct
    # guard so a future relaxation cannot silently introduce cycles.
    for sig in signals.values():
        seen = {sig.name}
        stack = [c.name for c in sig.components]
        while stack:
            current = stack.pop()
            if current in seen:
                raise InvariantError("component cycle detected", sig.name, "components")
            seen.add(current)
            stack.extend(c.name for c in signals[current].components)


def parse_catalog(document: str, source_path: str = "<memory>") -> SignalCatalog:
    """Parse a YAML catalog document into a validated SignalCatalog."""
    try:
        data = yamlio.load(document)
    except yaml.YAMLError as exc:
        raise SchemaError(f"not valid YAML: {exc}", path=source_path)
    if not isinstance(data, dict) or "signals" not in data:
        raise SchemaError("document must be a mapping with a 'signals' list", path=source_path)
    if not isinstance(data["signals"], list):
        raise SchemaError("'signals' must be a list", path="signals")

    signals: dict[str, SignalDef] = {}
    for i, record in enumerate(data["signals"]):
        sig = _parse_signal(record, i)
        if sig.name in signals:
            raise DuplicateName(f"signal defined twice", subject=sig.name, field="name")
        signals[sig.name] = sig
    _check_catalog_invariants(signals)
    return SignalCatalog(signals=signals, source_path=source_path)


def load_catalog(path: str) -> SignalCatalog:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_catalog(fh.read(), source_path=path)


def serialize_catalog(catalog: SignalCatalog) -> str:
    """Render a catalog back to YAML; parse_catalog round-trips it."""
    records = []
    for sig in catalog:
        record: dict = {
            "name": sig.name,
            "kind": sig.kind.value,
            "bit_start": sig.bit_start,
            "bit_length": sig.bit_length,
            "byte_order": sig.byte_order.value,
            "signed": sig.signed,
            "scale": sig.scale,
            "offset": sig.offset,
        }
        if sig.unit is not None:
            record["unit"] = sig.unit
        if sig.range_min is not None:
            record["range_min"] = sig.range_min
        if sig.range_max is not None:
            record["range_max"] = sig.range_max
        if sig.enum_map:
            record["enum_map"] = {int(k): v for k, v in sig.enum_map.items()}
        if sig.components:
            record["components"] = [
                {"name": c.name, "weight": c.weight} for c in sig.components
            ]
        if sig.description:
            record["description"] = sig.description
        records.append(record)
    return yaml.safe_dump({"signals": records}, sort_keys=False, allow_unicode=True)


# ---------------------------------------------------------------------------
# Reference semantics (bit-by-bit, independent of the codec evaluator)
# ---------------------------------------------------------------------------

def field_lsb(sig: SignalDef) -> int:
    """Position of the field's least-significant bit, counted LSB-first."""
    if sig.byte_order is ByteOrder.LITTLE:
        return sig.bit_start
    return FRAME_BITS - sig.bit_start - sig.bit_length


def extract_raw(sig: SignalDef, frame: bytes) -> int:
    """Read the raw (sign-interpreted) field value bit by bit."""
    if len(frame) != FRAME_BYTES:
        raise InvariantError("frame must be 8 bytes", sig.name, "frame")
    value = 0
    if sig.byte_order is ByteOrder.BIG:
        for i in range(sig.bit_length):
            overall = sig.bit_start + i  # 0 = MSB of byte 0
            byte_index, bit_in_byte = divmod(overall, 8)
            bit = (frame[byte_index] >> (7 - bit_in_byte)) & 1
            value = (value << 1) | bit
    else:
        for i in range(sig.bit_length):
            overall = sig.bit_start + i  # 0 = LSB of byte 0
            byte_index, bit_in_byte = divmod(overall, 8)
            bit = (frame[byte_index] >> bit_in_byte) & 1
            value |= bit << i
    if sig.signed and value >= (1 << (sig.bit_length - 1)):
        value -= 1 << sig.bit_length
    return value


def insert_raw(sig: SignalDef, raw: int, frame: bytes = b"\x00" * 8) -> bytes:
    """Write a raw field value into the frame, touching only its own bits."""
    lo, hi = sig.raw_bounds()
    if raw < lo or raw > hi:
        raise InvariantError(f"raw {raw} outside {lo}..{hi}", sig.name, "raw")
    pattern = raw & ((1 << sig.bit_length) - 1)
    out = bytearray(frame)
    if sig.byte_order is ByteOrder.BIG:
        for i in range(sig.bit_length):
            overall = sig.bit_start + i
            byte_index, bit_in_byte = divmod(overall, 8)
            bit = (pattern >> (sig.bit_length - 1 - i)) & 1
            mask = 1 << (7 - bit_in_byte)
            out[byte_index] = (out[byte_index] & ~mask) | (mask if bit else 0)
    else:
        for i in range(sig.bit_length):
            overall = sig.bit_start + i
            byte_index, bit_in_byte = divmod(overall, 8)
            bit = (pattern >> i) & 1
            mask = 1 << bit_in_byte
            out[byte_index] = (out[byte_index] & ~mask) | (mask if bit else 0)
    return bytes(out)


def raw_is_valid(sig: SignalDef, raw: int, catalog: Optional[SignalCatalog] = None) -> bool:
    """Whether a raw field value lies in the signal's valid raw domain."""
    lo, hi = sig.raw_bounds()
    if raw < lo or raw > hi:
        return False
    if sig.kind is SignalKind.ENUM:
        return raw in sig.enum_map
    if sig.kind in (SignalKind.NUMERICAL, SignalKind.BOOL):
        physical = sig.scale * raw + sig.offset
        if sig.range_min is not None and physical < sig.range_min:
            return False
        if sig.range_max is not None and physical > sig.range_max:
            return False
        return True
    return True


def valid_raws(sig: SignalDef) -> Iterable[int]:
    """Enumerate the valid raw domain (only sensible for small fields)."""
    lo, hi = sig.raw_bounds()
    for raw in range(lo, hi + 1):
        if raw_is_valid(sig, raw):
            yield raw


def reference_decode(sig: SignalDef, frame: bytes, catalog: Optional[SignalCatalog] = None):
    """Decode per the catalog definition. Returns None for invalid raws.

    This is the ground-truth route used to derive test vectors; it never
    consults a synthesized codec.
    """
    if sig.kind is SignalKind.OBJECT:
        if catalog is None:
            raise InvariantError("object decode needs the catalog", sig.name, "components")
        total = 0.0
        for child, weight in catalog.resolve_components(sig):
            part = reference_decode(child, frame)
            if part is None:
                return None
            if isinstance(part, bool):
                part = int(part)
            total += weight * float(part)
        return total
    raw = extract_raw(sig, frame)
    if not raw_is_valid(sig, raw):
        return None
    if sig.kind is SignalKind.ENUM:
        return sig.enum_map[raw]
    if sig.kind is SignalKind.BOOL:
        return bool(raw)
    return sig.scale * raw + sig.offset


def reference_encode(
    sig: SignalDef,
    value,
    frame: bytes = b"\x00" * 8,
    catalog: Optional[SignalCatalog] = None,
) -> bytes:
    """Encode a physical value per the catalog definition."""
    if sig.kind is SignalKind.OBJECT:
        if catalog is None:
            raise InvariantError("object encode needs the catalog", sig.name, "components")
        remaining = float(value)
        children = sorted(
            catalog.resolve_components(sig), key=lambda cw: -abs(cw[1])
        )
        out = frame
        for i, (child, weight) in enumerate(children):
            if i < len(children) - 1:
                part = math.floor(remaining / weight)
            else:
                part = remaining / weight
            out = reference_encode(child, part, out)
            remaining -= part * weight
        return out
    if sig.kind is SignalKind.ENUM:
        for raw, label in sig.enum_map.items():
            if label == value:
                return insert_raw(sig, raw, frame)
        raise DomainError(f"{sig.name}: no encoding for value {value!r}")
    if sig.kind is SignalKind.BOOL:
        return insert_raw(sig, 1 if value else 0, frame)
    physical = float(value)
    if sig.range_min is not None and physical < sig.range_min:
        physical = sig.range_min
    if sig.range_max is not None and physical > sig.range_max:
        physical = sig.range_max
    raw = round((physical - sig.offset) / sig.scale)
    lo, hi = sig.raw_bounds()
    raw = max(lo, min(hi, raw))
    return insert_raw(sig, raw, frame)


# ---------------------------------------------------------------------------
# Description enrichment
# ---------------------------------------------------------------------------

# Automotive shorthand found in signal names and terse descriptions. The
# enrichment step expands these so that retrieval sees full words.
ABBREVIATIONS = {
    "wpr": "wiper", "wsh": "washer", "frnt": "front", "rr": "rear",
    "sts": "status", "st": "state", "veh": "vehicle", "spd": "speed",
    "grnd": "ground", "whl": "wheel", "tmp": "temperature",
    "temp": "temperature", "cab": "cabin", "amb": "ambient",
    "bat": "battery", "batt": "battery", "lvl": "level", "fld": "fluid",
    "prs": "pressure", "press": "pressure", "eng": "engine", "dr": "door",
    "lt": "left", "rt": "right", "pos": "position", "lck": "lock",
    "wnd": "window", "swt": "switch", "lmp": "lamp", "brk": "brake",
    "prk": "park", "acc": "accelerator", "trq": "torque", "chrg": "charge",
    "soc": "charge", "odo": "odometer", "trp": "trip", "min": "minute",
    "sec": "second", "hr": "hour", "cnt": "count", "str": "steering",
    "ang": "angle", "sus": "suspension", "hgt": "height", "cln": "climate",
    "md": "mode", "vnt": "vent", "htr": "heater", "mir": "mirror",
    "ind": "indicator", "haz": "hazard", "vol": "volume", "fl": "front left",
    "fr": "front right", "rl": "rear left", "axl": "axle", "ld": "load",
    "dur": "duration", "rem": "remaining", "tgt": "target", "act": "actual",
    "pedl": "pedal", "pdl": "pedal", "fn": "fan", "airbg": "airbag",
    "defrst": "defroster", "hdlmp": "headlamp", "dip": "dipped",
    "gear": "gear", "sel": "selected", "rng": "range", "est": "estimated",
    "pwr": "power", "out": "outside", "ins": "inside", "flt": "fault",
    "wrn": "warning",
}

_IDENT_RE = re.compile(r"[A-Z][a-z0-9]*|[a-z0-9]+")


def split_identifier(name: str) -> list[str]:
    """CamelCase / snake_case identifier into lowercase word parts."""
    return [part.lower() for part in _IDENT_RE.findall(name)]


def expand_words(text: str) -> str:
    """Expand known automotive shorthand token by token."""
    words = []
    for token in split_identifier(text):
        words.append(ABBREVIATIONS.get(token, token))
    return " ".join(words)


def compose_description(
    name: str,
    kind: str,
    description: str,
    enum_labels: Sequence[str],
    unit: Optional[str],
    range_min: Optional[float],
    range_max: Optional[float],
    components: Sequence[tuple[str, float]],
) -> str:
    """Shared enrichment template over plain values.

    Mentions the signal name verbatim, expands the name and any terse
    description into full words, and states every enum label, the unit, and
    the physical range when declared. Both the deterministic fallback and
    the rule provider produce exactly this text.
    """
    reading = expand_words(name)
    parts = [f"Signal {name}, read as {reading}, is a signal of kind {kind}."]
    if description:
        expanded = expand_words(description)
        parts.append(f"It reports the {expanded}.")
    if enum_labels:
        parts.append(f"Possible values are: {', '.join(enum_labels)}.")
    if kind == "bool":
        parts.append("It reports true or false.")
    if unit:
        parts.append(f"Values are expressed in {unit}.")
    if range_min is not None and range_max is not None:
        unit_suffix = f" {unit}" if unit else ""
        parts.append(
            f"The physical range spans {range_min:g} to {range_max:g}{unit_suffix}."
        )
    if components:
        spec = ", ".join(
            f"{comp_name}, read as {expand_words(comp_name)}, with weight {weight:g}"
            for comp_name, weight in components
        )
        parts.append(f"It combines the signals {spec} as a weighted sum.")
    return " ".join(parts)


def describe_structurally(sig: SignalDef, catalog: Optional[SignalCatalog] = None) -> str:
    """Deterministic enriched description built from the structured fields."""
    return compose_description(
        name=sig.name,
        kind=sig.kind.value,
        description=sig.description,
        enum_labels=[sig.enum_map[k] for k in sorted(sig.enum_map)],
        unit=sig.unit,
        range_min=sig.range_min,
        range_max=sig.range_max,
        components=[(c.name, c.weight) for c in sig.components],
    )


def rewrite_description(sig: SignalDef, provider) -> str:
    """Enrich a signal description through a completion provider.

    The provider receives the structured fields and must return a non-empty
    text mentioning the name, unit, enum labels, and range. Provider errors
    (including schema violations after bounded retries) propagate.
    """
    from . import templates
    from .providers import CompletionRequest, REWRITE_SCHEMA

    request = CompletionRequest(
        task_tag="description_rewrite",
        prompt_sections=templates.rewrite_sections(sig),
        output_schema=REWRITE_SCHEMA,
    )
    result = provider.complete_structured(request)
    text = result.payload["description"]
    _assert_mentions(sig, text)
    return text


def _assert_mentions(sig: SignalDef, text: str) -> None:
    missing = []
    if sig.name not in text:
        missing.append("name")
    if sig.unit and sig.unit not in text:
        missing.append("unit")
    for label in sig.enum_map.values():
        if label not in text:
            missing.append(f"label {label}")
    if missing:
        raise ProviderError(
            f"rewritten description for {sig.name} omits: " + ", ".join(missing)
        )
