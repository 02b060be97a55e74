"""Completion providers: the structured-LLM interface behind the pipeline.

Every provider implements the same contract: `complete_structured` takes a
:class:`CompletionRequest`, returns a payload conforming to the request's
output schema, and meters each underlying invocation. Schema-violating
payloads are re-prompted internally (attempt counter bumped, feedback
attached) up to `max_schema_retries` times before `SchemaViolation`
surfaces, so downstream code never sees a malformed payload.

Implementations:

* :class:`RuleProvider` — deterministic synthesizer. Reads the structured
  metadata embedded in the prompt sections and emits the textbook answer
  (the catalog's own scaling, label tables, weights). Offline runs and all
  tests build on it.
* :class:`FaultingProvider` — wraps another provider and corrupts payloads
  with configurable bug classes to exercise the validate/debug loop.
* :class:`RecordingProvider` / :class:`ReplayProvider` — capture a session
  to a newline-delimited record file and replay it byte-identically.
* :class:`RemoteHttpProvider` — one HTTP POST per call against a generic
  chat-completion endpoint; credentials from the environment.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from . import templates, units
from .errors import FaultInjected, SchemaViolation, TransportError

TASK_TAGS = ("codec_synthesis", "description_rewrite", "alignment", "endpoint_fill")


# ---------------------------------------------------------------------------
# Output schemas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldSpec:
    name: str
    semantic: str
    required: bool = True


@dataclass(frozen=True)
class OutputSchema:
    """Names the required payload fields and their semantic types."""

    name: str
    fields: tuple[FieldSpec, ...]

    def __post_init__(self):
        if not self.fields:
            raise ValueError("output schema must declare at least one field")

    def validate(self, payload) -> list[str]:
        """Return a list of problems; empty means the payload conforms."""
        if not isinstance(payload, dict):
            return [f"payload must be a mapping, got {type(payload).__name__}"]
        problems = []
        for spec in self.fields:
            value = payload.get(spec.name)
            if value is None:
                if spec.required:
                    problems.append(f"field {spec.name!r}: missing")
                continue
            problem = _check_semantic(spec.semantic, value)
            if problem:
                problems.append(f"field {spec.name!r}: {problem}")
        return problems


def _check_semantic(semantic: str, value) -> Optional[str]:
    if semantic.startswith("choice:"):
        allowed = semantic.split(":", 1)[1].split("|")
        if value not in allowed:
            return f"must be one of {allowed}, got {value!r}"
        return None
    if semantic == "text":
        return None if isinstance(value, str) else "must be text"
    if semantic == "nonempty_text":
        if not isinstance(value, str) or not value.strip():
            return "must be non-empty text"
        return None
    if semantic == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return "must be a number"
        return None
    if semantic == "unit_interval":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return "must be a number"
        if not 0.0 <= float(value) <= 1.0:
            return f"must lie in 0..1, got {value}"
        return None
    if semantic == "codec_tree":
        if not isinstance(value, dict) or not isinstance(value.get("op"), str):
            return "must be an expression-tree node with an 'op' tag"
        return None
    if semantic == "name_list":
        if not isinstance(value, list) or not value or not all(
            isinstance(v, str) and v for v in value
        ):
            return "must be a non-empty list of names"
        return None
    if semantic == "string_list":
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            return "must be a list of strings"
        return None
    if semantic == "mapping":
        return None if isinstance(value, dict) else "must be a mapping"
    if semantic == "conversion":
        if (
            not isinstance(value, dict)
            or not isinstance(value.get("factor"), (int, float))
            or not isinstance(value.get("offset"), (int, float))
        ):
            return "must carry numeric factor and offset"
        return None
    raise ValueError(f"unknown semantic type {semantic!r}")


CODEC_SCHEMA = OutputSchema("codec", (FieldSpec("decode", "codec_tree"),))

REWRITE_SCHEMA = OutputSchema("rewrite", (FieldSpec("description", "nonempty_text"),))

ALIGNMENT_SCHEMA = OutputSchema(
    "alignment",
    (
        FieldSpec("mapping_kind", "choice:direct|transformed|composed"),
        FieldSpec("contributing_signals", "name_list"),
        FieldSpec("value_map", "mapping", required=False),
        FieldSpec("enum_correspondence", "mapping", required=False),
        FieldSpec("unit_conversion", "conversion", required=False),
        FieldSpec("confidence", "unit_interval"),
        FieldSpec("rationale", "text", required=False),
    ),
)

ENDPOINT_SCHEMA = OutputSchema(
    "endpoint_slots",
    (
        FieldSpec("handler_body", "nonempty_text"),
        FieldSpec("validators", "string_list"),
    ),
)

SCAFFOLD_SCHEMA = OutputSchema(
    "endpoint_scaffold", (FieldSpec("source", "nonempty_text"),)
)


# ---------------------------------------------------------------------------
# Requests, results, metering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompletionRequest:
    task_tag: str
    prompt_sections: tuple[tuple[str, str], ...]
    output_schema: OutputSchema
    attempt: int = 1
    feedback: Optional[str] = None

    def __post_init__(self):
        if self.task_tag not in TASK_TAGS:
            raise ValueError(f"unknown task_tag {self.task_tag!r}")
        if self.attempt < 1:
            raise ValueError("attempt starts at 1")
        object.__setattr__(self, "prompt_sections", tuple(
            (str(label), str(text)) for label, text in self.prompt_sections
        ))

    def digest(self) -> str:
        body = json.dumps(
            {
                "task_tag": self.task_tag,
                "sections": list(self.prompt_sections),
                "schema": self.output_schema.name,
                "attempt": self.attempt,
                "feedback": self.feedback,
            },
            sort_keys=True,
        )
        return hashlib.sha256(body.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CompletionResult:
    payload: dict
    raw_text: str
    provider_id: str


@dataclass
class TagUsage:
    calls: int = 0
    failures: int = 0
    latency_seconds: float = 0.0


@dataclass
class UsageMeter:
    """Per-task-tag call counts, failures, and cumulative latency."""

    per_tag: dict[str, TagUsage] = field(default_factory=dict)

    def usage(self, tag: str) -> TagUsage:
        return self.per_tag.setdefault(tag, TagUsage())

    @property
    def total_calls(self) -> int:
        return sum(u.calls for u in self.per_tag.values())

    @property
    def total_failures(self) -> int:
        return sum(u.failures for u in self.per_tag.values())

    def as_dict(self) -> dict:
        return {
            tag: {
                "calls": u.calls,
                "failures": u.failures,
                "latency_seconds": u.latency_seconds,
            }
            for tag, u in sorted(self.per_tag.items())
        }


class CompletionProvider:
    """Base class: metering, schema validation, and internal re-prompting."""

    provider_id = "base"

    def __init__(self, max_schema_retries: int = 2):
        self.max_schema_retries = max_schema_retries
        self._meter = UsageMeter()
        self._meter_lock = threading.Lock()

    # Subclasses implement one raw completion attempt.
    def _complete_once(self, request: CompletionRequest) -> tuple[dict, str]:
        raise NotImplementedError

    def complete_structured(self, request: CompletionRequest) -> CompletionResult:
        current = request
        problems: list[str] = []
        for _ in range(self.max_schema_retries + 1):
            started = time.perf_counter()
            try:
                payload, raw_text = self._complete_once(current)
            except Exception:
                self._record_call(current.task_tag, time.perf_counter() - started)
                self._record_failure(current.task_tag)
                raise
            self._record_call(current.task_tag, time.perf_counter() - started)
            problems = current.output_schema.validate(payload)
            if not problems:
                return CompletionResult(
                    payload=payload, raw_text=raw_text, provider_id=self.provider_id
                )
            current = replace(
                current,
                attempt=current.attempt + 1,
                feedback="output schema problems: " + "; ".join(problems),
            )
        self._record_failure(request.task_tag)
        raise SchemaViolation(problems, attempts=self.max_schema_retries + 1)

    def meter_snapshot(self) -> UsageMeter:
        with self._meter_lock:
            return copy.deepcopy(self._meter)

    def _record_call(self, tag: str, latency: float) -> None:
        with self._meter_lock:
            usage = self._meter.usage(tag)
            usage.calls += 1
            usage.latency_seconds += latency

    def _record_failure(self, tag: str) -> None:
        with self._meter_lock:
            self._meter.usage(tag).failures += 1


def request_subject(request: CompletionRequest) -> str:
    """Best-effort identity of what a request is about (signal/property)."""
    meta = templates.parse_metadata_section(request.prompt_sections)
    if meta is not None:
        return str(meta.get("name", "*"))
    for label in ("property", "endpoint"):
        text = templates.section_text(request.prompt_sections, label)
        if text:
            try:
                record = json.loads(text)
            except json.JSONDecodeError:
                continue
            if isinstance(record, dict):
                return str(record.get("name") or record.get("path") or "*")
    return "*"


# ---------------------------------------------------------------------------
# Rule-based deterministic provider
# ---------------------------------------------------------------------------

class RuleProvider(CompletionProvider):
    """Deterministic stand-in: answers every task from the structured
    metadata in the prompt, with no side effects beyond metering."""

    provider_id = "rule/v" + templates.PROMPT_TEMPLATE_VERSION

    def _complete_once(self, request: CompletionRequest) -> tuple[dict, str]:
        handler = {
            "codec_synthesis": self._codec,
            "description_rewrite": self._rewrite,
            "alignment": self._alignment,
            "endpoint_fill": self._endpoint,
        }[request.task_tag]
        payload = handler(request)
        return payload, json.dumps(payload, sort_keys=True)

    # -- codec synthesis ----------------------------------------------------

    def _codec(self, request: CompletionRequest) -> dict:
        meta = templates.parse_metadata_section(request.prompt_sections)
        if meta is None:
            return {}
        return {"decode": _tree_from_metadata(meta)}

    # -- description rewrite ------------------------------------------------

    def _rewrite(self, request: CompletionRequest) -> dict:
        from .catalog import compose_description

        meta = templates.parse_metadata_section(request.prompt_sections)
        if meta is None:
            return {}
        enum_map = meta.get("enum_map") or {}
        labels = [enum_map[k] for k in sorted(enum_map, key=int)]
        components = [
            (c["name"], float(c["weight"])) for c in meta.get("components", [])
        ]
        return {
            "description": compose_description(
                name=meta["name"],
                kind=meta["kind"],
                description=meta.get("description") or "",
                enum_labels=labels,
                unit=meta.get("unit"),
                range_min=meta.get("range_min"),
                range_max=meta.get("range_max"),
                components=components,
            )
        }

    # -- property/signal alignment -------------------------------------------

    def _alignment(self, request: CompletionRequest) -> dict:
        prop = json.loads(
            templates.section_text(request.prompt_sections, "property") or "{}"
        )
        candidates = json.loads(
            templates.section_text(request.prompt_sections, "candidates") or "[]"
        )
        directives = _parse_directives(
            templates.section_text(request.prompt_sections, "constraints") or ""
        )
        if not candidates:
            return {
                "mapping_kind": "direct",
                "contributing_signals": [],
                "confidence": 0.0,
            }

        pick = candidates[0]
        preferred = directives.get("prefer-signal")
        if preferred:
            for cand in candidates:
                if cand["name"] == preferred:
                    pick = cand
                    break

        kind = directives.get("mapping-kind")
        if kind is None:
            if pick.get("kind") == "object":
                kind = "composed"
            elif _needs_conversion(prop, pick):
                kind = "transformed"
            else:
                kind = "direct"

        if kind == "composed":
            if pick.get("components"):
                contributing = [c["name"] for c in pick["components"]]
            else:
                contributing = [c["name"] for c in candidates[:2]]
        else:
            contributing = [pick["name"]]

        unit_conversion = None
        if kind == "transformed":
            factor_offset = None
            if "unit-factor" in directives:
                factor_offset = (float(directives["unit-factor"]), 0.0)
            else:
                factor_offset = units.conversion(pick.get("unit"), prop.get("unit"))
            factor, offset = factor_offset if factor_offset else (1.0, 0.0)
            unit_conversion = {"factor": factor, "offset": offset}

        enum_correspondence = None
        if kind == "direct" and prop.get("allowed_values") and pick.get("enum_map"):
            labels = list(pick["enum_map"].values())
            folded = {label.lower(): label for label in labels}
            mapping = {}
            for value in prop["allowed_values"]:
                match = folded.get(str(value).lower())
                if match is None:
                    mapping = None
                    break
                mapping[str(value)] = match
            enum_correspondence = mapping or None

        payload = {
            "mapping_kind": kind,
            "contributing_signals": contributing,
            "confidence": float(pick.get("similarity", 0.0)),
            "rationale": (
                f"intent={prop.get('name')}; top candidate {pick['name']} "
                f"({pick.get('kind')}); mapping {kind}"
            ),
        }
        if unit_conversion:
            payload["unit_conversion"] = unit_conversion
        if enum_correspondence:
            payload["enum_correspondence"] = enum_correspondence
        return payload

    # -- endpoint slot filling ------------------------------------------------

    def _endpoint(self, request: CompletionRequest) -> dict:
        endpoint = json.loads(
            templates.section_text(request.prompt_sections, "endpoint") or "{}"
        )
        alignments = json.loads(
            templates.section_text(request.prompt_sections, "alignments") or "[]"
        )
        mode = templates.section_text(request.prompt_sections, "generation_mode")
        body_lines = ["frame = read_vehicle_frame()"]
        for record in alignments:
            body_lines.extend(_handler_lines(record))
        validators = _validator_lines(endpoint)
        if mode == "full_scaffold":
            # Free-form scaffolding: the provider rebuilds routing and body
            # itself and carries no validate block.
            source_lines = [
                f"endpoint {endpoint.get('method', 'GET')} {endpoint.get('path', '/')}",
                "  auth: require_token",
                "  log: request_id, route",
                "  params:",
            ]
            for param in endpoint.get("parameters", []):
                source_lines.append(f"    param {param}")
            source_lines.append("  handler:")
            source_lines.extend("    " + line for line in body_lines)
            source_lines.append("  respond:")
            for field_name in endpoint.get("response_fields", []):
                source_lines.append(f"    field {field_name}")
            source_lines.append("end")
            return {"source": "\n".join(source_lines) + "\n"}
        return {"handler_body": "\n".join(body_lines), "validators": validators}


def _tree_from_metadata(meta: dict) -> dict:
    if meta["kind"] == "object":
        children = []
        for comp in meta.get("components", []):
            child_meta = comp.get("metadata")
            children.append(
                {
                    "name": comp["name"],
                    "weight": comp["weight"],
                    "expr": _tree_from_metadata(child_meta) if child_meta else {"op": "missing"},
                }
            )
        return {"op": "combine", "mode": "weighted_sum", "children": children}
    raw = {
        "op": "raw_field",
        "bit_start": meta["bit_start"],
        "bit_length": meta["bit_length"],
        "byte_order": meta["byte_order"],
        "signed": meta["signed"],
    }
    if meta["kind"] == "enum":
        return {"op": "enum_lookup", "table": dict(meta["enum_map"]), "child": raw}
    if meta["kind"] == "bool":
        return {"op": "bool_map", "child": raw}
    node: dict = {
        "op": "affine",
        "scale": meta["scale"],
        "offset": meta["offset"],
        "child": raw,
    }
    if meta.get("range_min") is not None or meta.get("range_max") is not None:
        node = {
            "op": "clamp",
            "min": meta.get("range_min"),
            "max": meta.get("range_max"),
            "child": node,
        }
    return node


def _needs_conversion(prop: dict, candidate: dict) -> bool:
    prop_unit = prop.get("unit")
    cand_unit = candidate.get("unit")
    if not prop_unit or not cand_unit or prop_unit == cand_unit:
        return False
    return units.conversion(cand_unit, prop_unit) is not None


def _parse_directives(text: str) -> dict:
    """Constraint-directive mini-grammar understood by the rule provider.

    Lines of the form `prefer-signal <name>`, `mapping-kind <kind>`,
    `unit-factor <x>`; anything else is free text and ignored here (real
    providers receive it verbatim).
    """
    directives: dict = {}
    for line in text.splitlines():
        parts = line.strip().split(None, 1)
        if len(parts) != 2:
            continue
        key, value = parts[0].lower(), parts[1].strip()
        if key in ("prefer-signal", "mapping-kind", "unit-factor"):
            directives[key] = value
    return directives


def _handler_lines(record: dict) -> list[str]:
    prop = record["property"]
    signals = record["contributing_signals"]
    lines = []
    if record["mapping_kind"] == "composed":
        weights = record.get("weights") or {}
        spec = ", ".join(f"('{name}', {weights.get(name, 1)})" for name in signals)
        lines.append(f"{prop} = combine_weighted([{spec}], frame)")
    else:
        lines.append(f"{prop} = decode_signal('{signals[0]}', frame)")
        conversion_spec = record.get("unit_conversion")
        if record["mapping_kind"] == "transformed" and conversion_spec:
            lines.append(
                f"{prop} = convert({prop}, factor={conversion_spec['factor']!r}, "
                f"offset={conversion_spec['offset']!r})"
            )
        correspondence = record.get("enum_correspondence")
        if correspondence:
            inverse = {label: value for value, label in sorted(correspondence.items())}
            lines.append(f"{prop} = map_label({prop}, {inverse!r})")
    return lines


def _validator_lines(endpoint: dict) -> list[str]:
    validators = []
    for rule in endpoint.get("constraint_rules", []):
        validators.append(rule)
    return validators


# ---------------------------------------------------------------------------
# Fault injection
# ---------------------------------------------------------------------------

FAULT_CLASSES = (
    "bracket_misuse",
    "off_by_one_scale",
    "dropped_enum_entry",
    "swapped_byte_order",
    "empty_description",
    "provider_outage",
)


@dataclass
class FaultPlan:
    """Which fault to inject, for which subjects, and how often.

    `fault` is the default bug class (applied to `subjects`, or to every
    subject when `subjects` is None); `per_subject` assigns specific classes
    to specific subjects. `single_shot` plans fire once per subject (the
    transient bug that automated debugging repairs); non-single-shot plans
    corrupt every call.
    """

    fault: Optional[str] = None
    subjects: Optional[frozenset[str]] = None
    single_shot: bool = True
    per_subject: dict[str, str] = field(default_factory=dict)
    _fired: set = field(default_factory=set)

    def __post_init__(self):
        for name in list(self.per_subject.values()) + (
            [self.fault] if self.fault else []
        ):
            if name not in FAULT_CLASSES:
                raise ValueError(f"unknown fault class {name!r}")

    def fault_for(self, subject: str) -> Optional[str]:
        """Fault class to apply for this call, or None. Consumes the shot."""
        if subject in self.per_subject:
            chosen = self.per_subject[subject]
        elif self.fault is not None and (
            self.subjects is None or subject in self.subjects
        ):
            chosen = self.fault
        else:
            return None
        if self.single_shot:
            if subject in self._fired:
                return None
            self._fired.add(subject)
        return chosen


class FaultingProvider(CompletionProvider):
    """Wraps a provider and corrupts selected payloads with known bug
    classes, e.g. call-syntax lookup where index-syntax lookup is needed."""

    def __init__(self, inner: CompletionProvider, plan: FaultPlan, **kwargs):
        super().__init__(**kwargs)
        self.inner = inner
        self.plan = plan
        self.provider_id = f"fault({plan.fault or 'per-subject'})+{inner.provider_id}"

    def _complete_once(self, request: CompletionRequest) -> tuple[dict, str]:
        subject = request_subject(request)
        fault = self.plan.fault_for(subject)
        if fault == "provider_outage":
            raise FaultInjected(f"simulated outage for {subject}")
        payload, raw_text = self.inner._complete_once(request)
        if fault is None:
            return payload, raw_text
        mutated = _mutate_payload(payload, fault, request.task_tag)
        return mutated, json.dumps(mutated, sort_keys=True, default=str)


def _mutate_payload(payload: dict, fault: str, task_tag: str) -> dict:
    if task_tag == "description_rewrite":
        if fault == "empty_description":
            return {"description": ""}
        return payload
    if task_tag != "codec_synthesis" or "decode" not in payload:
        return payload
    tree = copy.deepcopy(payload["decode"])
    if not _apply_fault(tree, fault):
        _apply_fault(tree, "swapped_byte_order")
    return {"decode": tree}


def _walk_nodes(node):
    if not isinstance(node, dict):
        return
    yield node
    child = node.get("child")
    if child is not None:
        yield from _walk_nodes(child)
    for entry in node.get("children", []) or []:
        yield from _walk_nodes(entry.get("expr"))


def _apply_fault(tree: dict, fault: str) -> bool:
    for node in _walk_nodes(tree):
        op = node.get("op")
        if fault == "bracket_misuse" and op == "enum_lookup":
            # The call-syntax-vs-index-syntax bug: the lookup is written as
            # a call, which the evaluator rejects.
            node["op"] = "enum_call"
            return True
        if fault == "dropped_enum_entry" and op == "enum_lookup":
            table = node.get("table") or {}
            if len(table) > 1:
                victim = max(table, key=lambda k: int(k))
                del table[victim]
            elif table:
                only = next(iter(table))
                table[only] = table[only] + "_X"
            return True
        if fault == "off_by_one_scale" and op == "affine":
            node["offset"] = node.get("offset", 0.0) + node.get("scale", 1.0)
            return True
        if fault == "swapped_byte_order" and op == "raw_field":
            node["byte_order"] = (
                "big_endian"
                if node.get("byte_order") == "little_endian"
                else "little_endian"
            )
            return True
    return False


# ---------------------------------------------------------------------------
# Record / replay
# ---------------------------------------------------------------------------

class RecordingProvider(CompletionProvider):
    """Tees another provider's raw completions into a JSONL record file."""

    def __init__(self, inner: CompletionProvider, path: str, **kwargs):
        super().__init__(**kwargs)
        self.inner = inner
        self.path = path
        self.provider_id = inner.provider_id
        self._write_lock = threading.Lock()
        with open(self.path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps({"provider_id": inner.provider_id}) + "\n")

    def _complete_once(self, request: CompletionRequest) -> tuple[dict, str]:
        payload, raw_text = self.inner._complete_once(request)
        record = {
            "digest": request.digest(),
            "payload": payload,
            "raw_text": raw_text,
        }
        with self._write_lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
        return payload, raw_text


class ReplayProvider(CompletionProvider):
    """Replays a recorded session; unknown requests are transport errors."""

    def __init__(self, path: str, **kwargs):
        super().__init__(**kwargs)
        self.path = path
        self._records: dict[str, list[dict]] = {}
        self._cursor: dict[str, int] = {}
        with open(path, "r", encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            self.provider_id = header["provider_id"]
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                self._records.setdefault(record["digest"], []).append(record)
        self._lock = threading.Lock()

    def _complete_once(self, request: CompletionRequest) -> tuple[dict, str]:
        digest = request.digest()
        entries = self._records.get(digest)
        if not entries:
            raise TransportError(f"no recorded completion for request {digest[:12]}…")
        with self._lock:
            index = self._cursor.get(digest, 0)
            # Re-runs of an identical request past the recorded count reuse
            # the final recorded answer.
            record = entries[min(index, len(entries) - 1)]
            self._cursor[digest] = index + 1
        return copy.deepcopy(record["payload"]), record["raw_text"]


# ---------------------------------------------------------------------------
# Remote HTTP provider
# ---------------------------------------------------------------------------

ENV_URL = "SIGNALFORGE_PROVIDER_URL"
ENV_KEY = "SIGNALFORGE_PROVIDER_KEY"
ENV_MODEL = "SIGNALFORGE_PROVIDER_MODEL"


class RemoteHttpProvider(CompletionProvider):
    """Generic chat-completion client: one POST per completion call."""

    def __init__(
        self,
        url: Optional[str] = None,
        api_key: Optional[str] = None,
        model: Optional[str] = None,
        transport: Optional[Callable] = None,
        timeout: float = 60.0,
        **kwargs,
    ):
        super().__init__(**kwargs)
        self.url = url or os.environ.get(ENV_URL)
        if not self.url:
            raise TransportError(f"remote provider needs a URL ({ENV_URL})")
        self.api_key = api_key or os.environ.get(ENV_KEY)
        self.model = model or os.environ.get(ENV_MODEL, "default-model")
        self.timeout = timeout
        if transport is None:
            import requests

            transport = requests.post
        self._transport = transport
        self.provider_id = f"remote:{self.model}"

    def _complete_once(self, request: CompletionRequest) -> tuple[dict, str]:
        user_text = "\n\n".join(
            f"## {label}\n{text}" for label, text in request.prompt_sections
        )
        if request.feedback:
            user_text += f"\n\n## feedback\n{request.feedback}"
        body = {
            "model": self.model,
            "messages": [
                {
                    "role": "system",
                    "content": "Respond with a single JSON object and nothing else.",
                },
                {"role": "user", "content": user_text},
            ],
            "response_format": {"type": "json_object"},
        }
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = self._transport(
                self.url, json=body, headers=headers, timeout=self.timeout
            )
        except Exception as exc:
            raise TransportError(f"provider unreachable: {exc}") from exc
        if getattr(response, "status_code", 0) != 200:
            raise TransportError(f"provider returned HTTP {response.status_code}")
        try:
            data = response.json()
            content = data["choices"][0]["message"]["content"]
            payload = json.loads(content)
        except Exception as exc:
            raise TransportError(f"malformed provider response: {exc}") from exc
        if not isinstance(payload, dict):
            raise TransportError("provider response is not a JSON object")
        return payload, content


# ---------------------------------------------------------------------------
# Provider factory (CLI --provider spec)
# ---------------------------------------------------------------------------

def build_provider(spec: str = "rule", max_schema_retries: int = 2) -> CompletionProvider:
    """Build a provider from a spec string.

    Grammar: ``rule`` | ``remote`` | ``replay:<path>`` | ``record:<path>``
    (records a rule session) | ``record-remote:<path>``.
    """
    kwargs = {"max_schema_retries": max_schema_retries}
    if spec == "rule":
        return RuleProvider(**kwargs)
    if spec == "remote":
        return RemoteHttpProvider(**kwargs)
    if spec.startswith("replay:"):
        return ReplayProvider(spec.split(":", 1)[1], **kwargs)
    if spec.startswith("record:"):
        return RecordingProvider(RuleProvider(), spec.split(":", 1)[1], **kwargs)
    if spec.startswith("record-remote:"):
        return RecordingProvider(
            RemoteHttpProvider(), spec.split(":", 1)[1], **kwargs
        )
    raise ValueError(f"unknown provider spec {spec!r}")
