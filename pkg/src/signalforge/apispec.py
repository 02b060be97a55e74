"""OpenAPI-subset reader for vehicle-state APIs.

Supported: `paths` with `get`/`put` operations, query/path parameters,
JSON-object response schemas (GET) or request bodies (PUT) whose properties
carry `type`, `enum`, `minimum`/`maximum`, plus the vendor extensions
`x-vehicle-unit` (physical unit), `x-vehicle-semantic` (overrides the
inferred semantic type, e.g. composite), and `x-vehicle-constraints`
(permission tags, value ranges, enum sets carried as contract annotations).
Anything else is rejected with a location diagnostic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping, Optional

import yaml

from . import yamlio
from .alignment import ApiProperty
from .errors import SchemaError, UnsupportedConstruct

SUPPORTED_METHODS = ("get", "put")

CONSTRAINTS_KEY = "x-vehicle-constraints"
UNIT_KEY = "x-vehicle-unit"
SEMANTIC_KEY = "x-vehicle-semantic"


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    location: str  # query | path
    type: str
    required: bool


@dataclass(frozen=True)
class ConstraintSet:
    """Contract annotations: enforced as validation rules in generated code."""

    permission: Optional[str] = None
    ranges: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    enums: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def rules(self) -> list[str]:
        """Canonical validation-rule strings derived from the annotations."""
        rules = []
        if self.permission:
            rules.append(f"permission {self.permission}")
        for name in sorted(self.ranges):
            lo, hi = self.ranges[name]
            rules.append(f"range {name} {lo:g} {hi:g}")
        for name in sorted(self.enums):
            rules.append(f"enum {name} {'|'.join(self.enums[name])}")
        return rules


@dataclass(frozen=True)
class EndpointSpec:
    path: str
    method: str  # GET | PUT
    parameters: tuple[ParameterSpec, ...]
    properties: Mapping[str, ApiProperty]  # response (GET) or body (PUT) fields
    constraints: ConstraintSet

    @property
    def slug(self) -> str:
        cleaned = re.sub(r"[^a-zA-Z0-9]+", "_", self.path).strip("_")
        return f"{self.method.lower()}_{cleaned}"


@dataclass(frozen=True)
class ApiSpec:
    endpoints: tuple[EndpointSpec, ...]
    version: str = "0"

    def properties(self) -> dict[str, ApiProperty]:
        merged: dict[str, ApiProperty] = {}
        for endpoint in self.endpoints:
            merged.update(endpoint.properties)
        return merged


def _normalize_path(path: str) -> str:
    # Parameter names do not distinguish routes: /v/{a} collides with /v/{b}.
    collapsed = re.sub(r"\{[^}]*\}", "{}", path.rstrip("/") or "/")
    return collapsed


def _semantic_type(name: str, schema: dict, path: str) -> str:
    override = schema.get(SEMANTIC_KEY)
    if override is not None:
        if override not in ("boolean", "number", "string-enum", "composite"):
            raise SchemaError(f"unknown semantic override {override!r}", path=path)
        return override
    declared = schema.get("type")
    if declared == "boolean":
        return "boolean"
    if declared in ("number", "integer"):
        return "number"
    if declared == "string" and schema.get("enum"):
        return "string-enum"
    raise UnsupportedConstruct(
        f"property {name!r} has unsupported schema type {declared!r}", path=path
    )


def _parse_property(name: str, schema: dict, location: str) -> ApiProperty:
    if not isinstance(schema, dict):
        raise SchemaError("property schema must be a mapping", path=location)
    semantic = _semantic_type(name, schema, location)
    enum_values = tuple(str(v) for v in schema.get("enum", ()) or ())
    return ApiProperty(
        name=name,
        semantic_type=semantic,
        unit=schema.get(UNIT_KEY),
        allowed_values=enum_values,
        range_min=schema.get("minimum"),
        range_max=schema.get("maximum"),
        description=schema.get("description", ""),
    )


def _parse_parameters(raw, location: str) -> tuple[ParameterSpec, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise SchemaError("parameters must be a list", path=location)
    parameters = []
    for i, item in enumerate(raw):
        where = f"{location}.parameters[{i}]"
        if not isinstance(item, dict) or "name" not in item:
            raise SchemaError("parameter needs a name", path=where)
        loc = item.get("in", "query")
        if loc not in ("query", "path"):
            raise UnsupportedConstruct(f"parameter location {loc!r}", path=where)
        schema = item.get("schema") or {}
        parameters.append(
            ParameterSpec(
                name=item["name"],
                location=loc,
                type=schema.get("type", "string"),
                required=bool(item.get("required", loc == "path")),
            )
        )
    return tuple(parameters)


def _parse_constraints(raw, location: str) -> ConstraintSet:
    if raw is None:
        return ConstraintSet()
    if not isinstance(raw, dict):
        raise SchemaError(f"{CONSTRAINTS_KEY} must be a mapping", path=location)
    ranges = {}
    for name, bounds in (raw.get("ranges") or {}).items():
        if not isinstance(bounds, dict) or "min" not in bounds or "max" not in bounds:
            raise SchemaError(
                f"range for {name!r} needs min and max", path=f"{location}.ranges"
            )
        lo, hi = float(bounds["min"]), float(bounds["max"])
        if lo > hi:
            raise SchemaError(
                f"range for {name!r} is not ordered", path=f"{location}.ranges"
            )
        ranges[name] = (lo, hi)
    enums = {}
    for name, values in (raw.get("enums") or {}).items():
        if not isinstance(values, list) or not values:
            raise SchemaError(
                f"enum set for {name!r} must be a non-empty list",
                path=f"{location}.enums",
            )
        enums[name] = tuple(str(v) for v in values)
    return ConstraintSet(
        permission=raw.get("permission"), ranges=ranges, enums=enums
    )


def _response_properties(operation: dict, location: str) -> dict:
    responses = operation.get("responses") or {}
    ok = responses.get("200") or responses.get(200)
    if not isinstance(ok, dict):
        raise SchemaError("operation needs a 200 response", path=location)
    content = ok.get("content") or {}
    media = content.get("application/json")
    if not isinstance(media, dict):
        raise UnsupportedConstruct(
            "only application/json responses are supported", path=location
        )
    schema = media.get("schema") or {}
    if schema.get("type") != "object" or not isinstance(schema.get("properties"), dict):
        raise UnsupportedConstruct(
            "response schema must be an object with properties", path=location
        )
    return schema["properties"]


def _body_properties(operation: dict, location: str) -> dict:
    body = operation.get("requestBody")
    if not isinstance(body, dict):
        raise SchemaError("put operation needs a requestBody", path=location)
    content = body.get("content") or {}
    media = content.get("application/json")
    if not isinstance(media, dict):
        raise UnsupportedConstruct(
            "only application/json bodies are supported", path=location
        )
    schema = media.get("schema") or {}
    if schema.get("type") != "object" or not isinstance(schema.get("properties"), dict):
        raise UnsupportedConstruct(
            "body schema must be an object with properties", path=location
        )
    return schema["properties"]


def parse_api_spec(document: str, source_path: str = "<memory>") -> ApiSpec:
    try:
        data = yamlio.load(document)
    except yaml.YAMLError as exc:
        raise SchemaError(f"not valid YAML: {exc}", path=source_path)
    if not isinstance(data, dict) or not isinstance(data.get("paths"), dict):
        raise SchemaError("document needs a 'paths' mapping", path=source_path)

    version = str((data.get("info") or {}).get("version", "0"))
    endpoints: list[EndpointSpec] = []
    seen: dict[tuple[str, str], str] = {}
    for path, operations in data["paths"].items():
        if not isinstance(operations, dict):
            raise SchemaError("path item must be a mapping", path=f"paths.{path}")
        for method, operation in operations.items():
            if method in ("parameters", "description", "summary"):
                continue
            if method not in SUPPORTED_METHODS:
                raise UnsupportedConstruct(
                    f"method {method!r} not supported",
                    path=f"paths.{path}.{method}",
                )
            location = f"paths.{path}.{method}"
            if not isinstance(operation, dict):
                raise SchemaError("operation must be a mapping", path=location)
            key = (_normalize_path(path), method)
            if key in seen:
                raise SchemaError(
                    f"duplicate endpoint: {method.upper()} {path} collides with "
                    f"{seen[key]}",
                    path=location,
                )
            seen[key] = f"{method.upper()} {path}"
            if method == "get":
                raw_properties = _response_properties(operation, location)
            else:
                raw_properties = _body_properties(operation, location)
            properties = {
                name: _parse_property(name, schema, f"{location}.{name}")
                for name, schema in raw_properties.items()
            }
            endpoints.append(
                EndpointSpec(
                    path=path,
                    method=method.upper(),
                    parameters=_parse_parameters(operation.get("parameters"), location),
                    properties=properties,
                    constraints=_parse_constraints(
                        operation.get(CONSTRAINTS_KEY), f"{location}.{CONSTRAINTS_KEY}"
                    ),
                )
            )
    return ApiSpec(endpoints=tuple(endpoints), version=version)


def load_api_spec(path: str) -> ApiSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_api_spec(fh.read(), source_path=path)
