"""Prompt templates and the endpoint boilerplate, versioned as configuration.

Every completion request is assembled from labeled sections so providers
(remote or rule-based) see the same structured context. The section labels
are part of the provider contract: the rule provider locates structured
metadata by label, and record/replay digests cover labels and text.
"""

from __future__ import annotations

import json
from typing import Optional

from .catalog import SignalCatalog, SignalDef

PROMPT_TEMPLATE_VERSION = "1"

_TASKS = {
    "codec_synthesis": (
        "Produce a decode expression tree for the CAN signal described in the "
        "signal_metadata section. The tree must read the signal's bit field "
        "from an 8-byte frame and turn it into the physical value. Respond "
        "with the JSON object described in output_format."
    ),
    "description_rewrite": (
        "Rewrite the signal description so a developer unfamiliar with the "
        "vehicle domain understands what the signal reports. Expand "
        "abbreviations and state values explicitly."
    ),
    "alignment": (
        "Match the API property to the CAN signals that back it. Enumerate "
        "every contributing signal and make value maps, enum correspondences, "
        "and unit conversions explicit."
    ),
    "endpoint_fill": (
        "Fill the designated slots of the endpoint boilerplate. Do not alter "
        "fixed template text; only produce the slot contents requested."
    ),
}

REASONING_STEPS = (
    "Work stepwise: (i) identify the property intent; (ii) check value and "
    "unit consistency between property and candidate signals; (iii) decide "
    "whether the mapping is direct, transformed, or composed from multiple "
    "signals."
)

CODEC_OUTPUT_FORMAT = (
    "Return {\"decode\": <node>} where <node> is one of: "
    "{\"op\":\"raw_field\",\"bit_start\":N,\"bit_length\":N,"
    "\"byte_order\":\"little_endian|big_endian\",\"signed\":bool} | "
    "{\"op\":\"affine\",\"scale\":X,\"offset\":X,\"child\":<node>} | "
    "{\"op\":\"enum_lookup\",\"table\":{\"<raw>\":\"label\"},\"child\":<node>} | "
    "{\"op\":\"bool_map\",\"child\":<node>} | "
    "{\"op\":\"clamp\",\"min\":X,\"max\":X,\"child\":<node>} | "
    "{\"op\":\"combine\",\"mode\":\"weighted_sum\","
    "\"children\":[{\"name\":S,\"weight\":X,\"expr\":<node>}]}"
)

REWRITE_STYLE = (
    "The rewritten text must mention the signal name verbatim, the unit if "
    "one is declared, every enumeration label, and the physical range when "
    "bounds are declared."
)


def signal_metadata(sig: SignalDef, catalog: Optional[SignalCatalog] = None) -> dict:
    """Structured metadata dict for one signal, children resolved inline."""
    meta: dict = {
        "name": sig.name,
        "kind": sig.kind.value,
        "bit_start": sig.bit_start,
        "bit_length": sig.bit_length,
        "byte_order": sig.byte_order.value,
        "signed": sig.signed,
        "scale": sig.scale,
        "offset": sig.offset,
        "unit": sig.unit,
        "range_min": sig.range_min,
        "range_max": sig.range_max,
        "enum_map": {str(k): v for k, v in sig.enum_map.items()},
        "description": sig.description,
    }
    if sig.components:
        children = []
        for comp in sig.components:
            entry: dict = {"name": comp.name, "weight": comp.weight}
            if catalog is not None:
                entry["metadata"] = signal_metadata(catalog.get(comp.name))
            children.append(entry)
        meta["components"] = children
    return meta


def _json(data) -> str:
    return json.dumps(data, sort_keys=True)


def codec_sections(
    sig: SignalDef, catalog: Optional[SignalCatalog] = None
) -> tuple[tuple[str, str], ...]:
    return (
        ("task", _TASKS["codec_synthesis"]),
        ("signal_metadata", _json(signal_metadata(sig, catalog))),
        ("output_format", CODEC_OUTPUT_FORMAT),
    )


def rewrite_sections(sig: SignalDef) -> tuple[tuple[str, str], ...]:
    return (
        ("task", _TASKS["description_rewrite"]),
        ("signal_metadata", _json(signal_metadata(sig))),
        ("style", REWRITE_STYLE),
    )


def alignment_sections(
    property_record: dict,
    candidate_records: list[dict],
    constraint_text: str = "",
) -> tuple[tuple[str, str], ...]:
    sections = [
        ("task", _TASKS["alignment"]),
        ("reasoning_steps", REASONING_STEPS),
        ("property", _json(property_record)),
        ("candidates", _json(candidate_records)),
    ]
    if constraint_text:
        sections.append(("constraints", constraint_text))
    return tuple(sections)


def endpoint_sections(
    endpoint_record: dict,
    alignment_records: list[dict],
    mode: str = "slots_only",
) -> tuple[tuple[str, str], ...]:
    sections = [
        ("task", _TASKS["endpoint_fill"]),
        ("endpoint", _json(endpoint_record)),
        ("alignments", _json(alignment_records)),
        ("generation_mode", mode),
    ]
    if mode == "slots_only":
        sections.append(("template", ENDPOINT_TEMPLATE))
    return tuple(sections)


def section_text(sections, label: str) -> Optional[str]:
    """First section text under the given label, or None."""
    for sec_label, text in sections:
        if sec_label == label:
            return text
    return None


def parse_metadata_section(sections) -> Optional[dict]:
    text = section_text(sections, "signal_metadata")
    return None if text is None else json.loads(text)


# ---------------------------------------------------------------------------
# Endpoint boilerplate
# ---------------------------------------------------------------------------
# Fixed parts (routing, auth, logging, error handling) are rendered verbatim;
# only {{...}} slots are provider-filled. The rendered text is parsed back by
# the endpoint module to derive the manifest mechanically.

ENDPOINT_TEMPLATE = """\
endpoint {{method}} {{path}}
  auth: require_token
  log: request_id, route
  params:
{{params_block}}
  validate:
{{validators_block}}
  handler:
{{handler_body}}
  respond:
{{response_block}}
  on_error:
    domain_error -> status 422
    validation_error -> status 400
    unknown -> status 500
end
"""

TEMPLATE_SLOTS = (
    "method",
    "path",
    "params_block",
    "validators_block",
    "handler_body",
    "response_block",
)
