"""Contract-first endpoint assembly from approved alignments.

The boilerplate template fixes routing, auth, logging, and error handling;
the provider only fills the designated slots (handler body, validators).
The manifest of every generated endpoint is parsed back out of the rendered
source — never copied from the contract — so `check_contract` genuinely
compares what was generated against what was promised.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from . import templates
from .alignment import PropertyAlignment, alignment_record, combine_weights
from .apispec import EndpointSpec
from .codec import CodecExpr
from .errors import FlaggedAlignment, MissingAlignment
from .providers import (
    CompletionProvider,
    CompletionRequest,
    ENDPOINT_SCHEMA,
    SCAFFOLD_SCHEMA,
)


@dataclass(frozen=True)
class GeneratedEndpoint:
    source: str
    manifest: dict


# ---------------------------------------------------------------------------
# Manifest extraction (mechanical parse of the rendered source)
# ---------------------------------------------------------------------------

_SECTION_HEADS = ("params:", "validate:", "handler:", "respond:", "on_error:")


def derive_manifest(source: str, slot_provenance: Optional[dict] = None) -> dict:
    """Parse path/method/params/fields/rules out of rendered endpoint text."""
    method = path = None
    params: list[str] = []
    rules: list[str] = []
    fields: list[str] = []
    section = None
    for line in source.splitlines():
        stripped = line.strip()
        if stripped.startswith("endpoint "):
            parts = stripped.split()
            if len(parts) >= 3:
                method, path = parts[1], parts[2]
            continue
        if stripped in _SECTION_HEADS:
            section = stripped[:-1]
            continue
        if stripped == "end":
            section = None
            continue
        if section == "params" and stripped.startswith("param "):
            params.append(stripped.split()[1])
        elif section == "validate" and stripped.startswith("rule "):
            rules.append(stripped[len("rule "):])
        elif section == "respond" and stripped.startswith("field "):
            fields.append(stripped.split()[1])
    return {
        "path": path,
        "method": method,
        "parameters": sorted(params),
        "response_fields": sorted(fields),
        "validation_rules": sorted(rules),
        "slot_provenance": slot_provenance or {},
    }


# ---------------------------------------------------------------------------
# Template instantiation
# ---------------------------------------------------------------------------

def _endpoint_record(endpoint: EndpointSpec) -> dict:
    return {
        "path": endpoint.path,
        "method": endpoint.method,
        "direction": "read" if endpoint.method == "GET" else "write",
        "parameters": [p.name for p in endpoint.parameters],
        "response_fields": sorted(endpoint.properties),
        "constraint_rules": endpoint.constraints.rules(),
    }


def _alignment_prompt_records(
    endpoint: EndpointSpec,
    alignments: Mapping[str, PropertyAlignment],
    codecs: Mapping[str, CodecExpr],
) -> list[dict]:
    records = []
    for name in sorted(endpoint.properties):
        alignment = alignments.get(name)
        if alignment is None:
            raise MissingAlignment(name)
        if not alignment.active:
            raise FlaggedAlignment(name)
        record = alignment_record(alignment)
        record.pop("candidates", None)
        if alignment.mapping_kind == "composed":
            record["weights"] = combine_weights(alignment, codecs)
        records.append(record)
    return records


def _indent_block(text: str, indent: str = "    ") -> str:
    lines = [indent + line if line.strip() else line for line in text.splitlines()]
    return "\n".join(lines)


def instantiate_template(
    endpoint: EndpointSpec,
    alignments: Mapping[str, PropertyAlignment],
    codecs: Mapping[str, CodecExpr],
    provider: CompletionProvider,
    mode: str = "slots_only",
) -> GeneratedEndpoint:
    """Render the endpoint: fixed template text verbatim, slots filled.

    `mode="full_scaffold"` drops the boilerplate and lets the provider emit
    the whole scaffolding (the template-ablation configuration).
    """
    prompt_records = _alignment_prompt_records(endpoint, alignments, codecs)
    request = CompletionRequest(
        task_tag="endpoint_fill",
        prompt_sections=templates.endpoint_sections(
            _endpoint_record(endpoint), prompt_records, mode
        ),
        output_schema=SCAFFOLD_SCHEMA if mode == "full_scaffold" else ENDPOINT_SCHEMA,
    )
    result = provider.complete_structured(request)

    if mode == "full_scaffold":
        source = result.payload["source"]
        if not source.endswith("\n"):
            source += "\n"
        provenance = {"scaffold": "provider"}
        return GeneratedEndpoint(source=source, manifest=derive_manifest(source, provenance))

    params_block = "\n".join(
        f"    param {p.name} ({p.location}, {p.type}, "
        f"{'required' if p.required else 'optional'})"
        for p in endpoint.parameters
    ) or "    none"
    validators = result.payload["validators"]
    validators_block = "\n".join(f"    rule {rule}" for rule in validators) or "    none"
    handler_body = _indent_block(result.payload["handler_body"])
    response_block = "\n".join(
        f"    field {name}" for name in sorted(endpoint.properties)
    ) or "    none"

    source = templates.ENDPOINT_TEMPLATE
    fills = {
        "method": endpoint.method,
        "path": endpoint.path,
        "params_block": params_block,
        "validators_block": validators_block,
        "handler_body": handler_body,
        "response_block": response_block,
    }
    for slot, value in fills.items():
        source = source.replace("{{" + slot + "}}", value)

    provenance = {
        "method": "generator",
        "path": "generator",
        "params_block": "generator",
        "response_block": "generator",
        "validators_block": "provider",
        "handler_body": "provider",
        "fixed_text": "template",
    }
    return GeneratedEndpoint(source=source, manifest=derive_manifest(source, provenance))


# ---------------------------------------------------------------------------
# Contract checking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ConformanceReport:
    checks: tuple[ContractCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> list[ContractCheck]:
        return [check for check in self.checks if not check.passed]


def check_contract(generated: GeneratedEndpoint, spec: EndpointSpec) -> ConformanceReport:
    """Compare the mechanically derived manifest against the contract."""
    manifest = generated.manifest
    checks = []

    checks.append(
        ContractCheck(
            "path",
            manifest.get("path") == spec.path,
            f"manifest {manifest.get('path')!r} vs contract {spec.path!r}",
        )
    )
    checks.append(
        ContractCheck(
            "method",
            manifest.get("method") == spec.method,
            f"manifest {manifest.get('method')!r} vs contract {spec.method!r}",
        )
    )

    expected_params = sorted(p.name for p in spec.parameters)
    got_params = manifest.get("parameters", [])
    missing = sorted(set(expected_params) - set(got_params))
    extra = sorted(set(got_params) - set(expected_params))
    checks.append(
        ContractCheck(
            "parameters",
            not missing and not extra,
            f"missing {missing}, extra {extra}",
        )
    )

    expected_fields = sorted(spec.properties)
    got_fields = manifest.get("response_fields", [])
    missing_fields = sorted(set(expected_fields) - set(got_fields))
    extra_fields = sorted(set(got_fields) - set(expected_fields))
    checks.append(
        ContractCheck(
            "response_fields",
            not missing_fields and not extra_fields,
            f"missing {missing_fields}, extra {extra_fields}",
        )
    )

    got_rules = set(manifest.get("validation_rules", []))
    for rule in spec.constraints.rules():
        checks.append(
            ContractCheck(
                f"validation_rule:{rule}",
                rule in got_rules,
                "present" if rule in got_rules else "absent from generated output",
            )
        )
    return ConformanceReport(checks=tuple(checks))
