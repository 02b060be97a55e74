"""Specification-error detection for user-provided API documents.

Two error classes are detected: numerical values exceeding the governing
range (`out_of_range`) and enum values not present in the governing allowed
set (`invalid_enum`). The governing domains come from the reference API
spec, supplemented by the signal catalog when a property shares its name
with a signal. An `inject_errors` tool mutates clean documents with labeled
faults of both classes so detection recall can be measured exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from . import yamlio
from .apispec import ApiSpec, CONSTRAINTS_KEY
from .catalog import SignalCatalog, SignalKind
from .errors import SchemaError

ERROR_TYPES = ("out_of_range", "invalid_enum")


@dataclass(frozen=True)
class Diagnostic:
    location: str
    error_type: str
    found: object
    expected: str  # quoted from the governing spec, never invented
    severity: str = "error"

    def render(self) -> str:
        return (
            f"{self.location}: {self.error_type}: found {self.found!r}, "
            f"expected {self.expected}"
        )


@dataclass(frozen=True)
class Domain:
    """Governing value domain for one property."""

    range_min: Optional[float] = None
    range_max: Optional[float] = None
    allowed: tuple[str, ...] = ()
    origin: str = ""

    def range_text(self) -> str:
        return f"range {self.range_min:g}..{self.range_max:g} (from {self.origin})"

    def enum_text(self) -> str:
        return f"one of {{{', '.join(self.allowed)}}} (from {self.origin})"


def governing_domains(
    spec: ApiSpec, catalog: Optional[SignalCatalog] = None
) -> dict[str, Domain]:
    domains: dict[str, Domain] = {}
    for endpoint in spec.endpoints:
        for name, prop in endpoint.properties.items():
            domains[name] = Domain(
                range_min=prop.range_min,
                range_max=prop.range_max,
                allowed=tuple(prop.allowed_values),
                origin=f"{endpoint.method} {endpoint.path}",
            )
    if catalog is not None:
        for sig in catalog:
            existing = domains.get(sig.name)
            if existing is not None and (
                existing.allowed or existing.range_min is not None
            ):
                continue
            if sig.kind is SignalKind.ENUM:
                domains[sig.name] = Domain(
                    allowed=tuple(sig.enum_map.values()),
                    origin=f"signal {sig.name}",
                )
            elif sig.range_min is not None and sig.range_max is not None:
                domains[sig.name] = Domain(
                    range_min=sig.range_min,
                    range_max=sig.range_max,
                    origin=f"signal {sig.name}",
                )
    return domains


def _walk_properties(document: dict):
    """Yield (location, property name, schema dict) plus constraint blocks."""
    paths = document.get("paths") or {}
    for path, operations in paths.items():
        if not isinstance(operations, dict):
            continue
        for method, operation in operations.items():
            if not isinstance(operation, dict):
                continue
            base = f"paths.{path}.{method}"
            containers = []
            responses = operation.get("responses") or {}
            ok = responses.get("200") or responses.get(200) or {}
            media = (ok.get("content") or {}).get("application/json") or {}
            schema = media.get("schema") or {}
            if isinstance(schema.get("properties"), dict):
                containers.append(schema["properties"])
            body = operation.get("requestBody") or {}
            body_media = (body.get("content") or {}).get("application/json") or {}
            body_schema = body_media.get("schema") or {}
            if isinstance(body_schema.get("properties"), dict):
                containers.append(body_schema["properties"])
            for properties in containers:
                for name, prop_schema in properties.items():
                    if isinstance(prop_schema, dict):
                        yield base, name, prop_schema, operation


def _check_number(
    value, domain: Domain, location: str, diagnostics: list[Diagnostic]
) -> None:
    if domain.range_min is None or domain.range_max is None:
        return
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        return
    if value < domain.range_min or value > domain.range_max:
        diagnostics.append(
            Diagnostic(location, "out_of_range", value, domain.range_text())
        )


def _check_enum(
    value, domain: Domain, location: str, diagnostics: list[Diagnostic]
) -> None:
    if not domain.allowed:
        return
    if not isinstance(value, str):
        return
    if value not in domain.allowed:
        diagnostics.append(
            Diagnostic(location, "invalid_enum", value, domain.enum_text())
        )


def detect_errors(
    document: str,
    spec: ApiSpec,
    catalog: Optional[SignalCatalog] = None,
) -> list[Diagnostic]:
    """One diagnostic per violating value; clean documents yield []."""
    data = yamlio.load(document)
    if not isinstance(data, dict):
        raise SchemaError("checked document must be a mapping")
    domains = governing_domains(spec, catalog)
    diagnostics: list[Diagnostic] = []

    for base, name, prop_schema, operation in _walk_properties(data):
        domain = domains.get(name)
        if domain is None:
            continue
        location = f"{base}.properties.{name}"
        for key in ("example", "default", "minimum", "maximum"):
            if key in prop_schema:
                value = prop_schema[key]
                _check_number(value, domain, f"{location}.{key}", diagnostics)
                if key in ("example", "default"):
                    _check_enum(value, domain, f"{location}.{key}", diagnostics)
        for i, value in enumerate(prop_schema.get("enum") or []):
            _check_enum(value, domain, f"{location}.enum[{i}]", diagnostics)

    # Constraint annotation blocks.
    paths = data.get("paths") or {}
    for path, operations in paths.items():
        if not isinstance(operations, dict):
            continue
        for method, operation in operations.items():
            if not isinstance(operation, dict):
                continue
            constraints = operation.get(CONSTRAINTS_KEY)
            if not isinstance(constraints, dict):
                continue
            base = f"paths.{path}.{method}.{CONSTRAINTS_KEY}"
            for name, bounds in (constraints.get("ranges") or {}).items():
                domain = domains.get(name)
                if domain is None or not isinstance(bounds, dict):
                    continue
                for bound_key in ("min", "max"):
                    if bound_key in bounds:
                        _check_number(
                            bounds[bound_key],
                            domain,
                            f"{base}.ranges.{name}.{bound_key}",
                            diagnostics,
                        )
            for name, values in (constraints.get("enums") or {}).items():
                domain = domains.get(name)
                if domain is None or not isinstance(values, list):
                    continue
                for i, value in enumerate(values):
                    _check_enum(
                        value, domain, f"{base}.enums.{name}[{i}]", diagnostics
                    )
    return diagnostics


# ---------------------------------------------------------------------------
# Error injection (the evaluation protocol's fault seeder)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InjectionMarker:
    location: str
    error_type: str
    injected: object


def inject_errors(
    document: str,
    spec: ApiSpec,
    catalog: Optional[SignalCatalog] = None,
    n_out_of_range: int = 5,
    n_invalid_enum: int = 5,
    seed: int = 0,
) -> tuple[str, list[InjectionMarker]]:
    """Mutate a clean document with labeled out-of-range / invalid-enum
    faults. Only sites with a governing domain are touched, so every marker
    is detectable by `detect_errors`."""
    data = yamlio.load(document)
    domains = governing_domains(spec, catalog)
    rng = random.Random(seed)

    numeric_sites = []  # (location, setter, domain)
    enum_sites = []

    for base, name, prop_schema, operation in _walk_properties(data):
        domain = domains.get(name)
        if domain is None:
            continue
        location = f"{base}.properties.{name}"
        if domain.range_min is not None and domain.range_max is not None:
            for key in ("example", "default", "maximum"):
                if key in prop_schema:
                    numeric_sites.append(
                        (f"{location}.{key}", prop_schema, key, domain)
                    )
        if domain.allowed:
            for key in ("example", "default"):
                if key in prop_schema and isinstance(prop_schema[key], str):
                    enum_sites.append((f"{location}.{key}", prop_schema, key, domain))
            enum_list = prop_schema.get("enum")
            if isinstance(enum_list, list) and enum_list:
                enum_sites.append(
                    (f"{location}.enum[{len(enum_list) - 1}]", enum_list,
                     len(enum_list) - 1, domain)
                )

    if len(numeric_sites) < n_out_of_range:
        raise SchemaError(
            f"document offers only {len(numeric_sites)} numeric injection sites, "
            f"need {n_out_of_range}"
        )
    if len(enum_sites) < n_invalid_enum:
        raise SchemaError(
            f"document offers only {len(enum_sites)} enum injection sites, "
            f"need {n_invalid_enum}"
        )

    markers: list[InjectionMarker] = []
    for location, container, key, domain in rng.sample(numeric_sites, n_out_of_range):
        bump = rng.choice([1.0, 5.0, 10.0, 100.0])
        injected = domain.range_max + bump if rng.random() < 0.5 else domain.range_min - bump
        container[key] = injected
        markers.append(InjectionMarker(location, "out_of_range", injected))
    for location, container, key, domain in rng.sample(enum_sites, n_invalid_enum):
        invented = [
            label
            for label in ("AUTO", "UNKNOWN", "MAYBE", "N_A", "EXTENDED")
            if label not in domain.allowed
        ] or [f"INVALID_{rng.randrange(1000)}"]
        injected = rng.choice(invented)
        container[key] = injected
        markers.append(InjectionMarker(location, "invalid_enum", injected))

    return yamlio.dump(data), markers
