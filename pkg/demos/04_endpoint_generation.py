"""Walkthrough: contract-first endpoint assembly.

The boilerplate fixes routing, auth, logging, and error handling; the
provider only fills the handler body and the validators derived from
constraint annotations. The manifest is parsed back out of the rendered
source, so contract checking compares what was actually generated against
the API contract — and catches any mutation.

Run:  python demos/04_endpoint_generation.py
"""

from signalforge import RuleProvider
from signalforge.alignment import align_property
from signalforge.apispec import parse_api_spec
from signalforge.catalog import parse_catalog
from signalforge.codec import synthesize_codec
from signalforge.endpoints import (
    GeneratedEndpoint,
    check_contract,
    derive_manifest,
    instantiate_template,
)
from signalforge.index import build_index

catalog = parse_catalog("""
signals:
  - name: WiperState
    kind: enum
    bit_start: 0
    bit_length: 2
    enum_map: {0: OFF, 1: ON}
    description: front wiper status
  - name: VehicleSpeed
    kind: numerical
    bit_start: 8
    bit_length: 16
    scale: 0.01
    unit: m/s
    range_min: 0
    range_max: 655.35
    description: vehicle speed over ground
""")

spec = parse_api_spec("""
paths:
  /wipers:
    get:
      parameters:
        - {name: vehicleId, in: query, required: true, schema: {type: string}}
      responses:
        "200":
          content:
            application/json:
              schema:
                type: object
                properties:
                  wiperActive:
                    type: string
                    enum: [ON, OFF]
                    description: "Front wiper status. Possible values are: OFF, ON."
                  speed:
                    type: number
                    x-vehicle-unit: km/h
                    minimum: 0
                    maximum: 250
                    description: Vehicle speed over ground for display. Values are expressed in km/h.
      x-vehicle-constraints:
        permission: driver
        ranges:
          speed: {min: 0, max: 250}
        enums:
          wiperActive: [ON, OFF]
""")

provider = RuleProvider()
index = build_index(catalog, "rewritten_description", provider)
codecs = {s.name: synthesize_codec(s, provider, catalog)[0] for s in catalog}
endpoint = spec.endpoints[0]
alignments = {
    name: align_property(prop, index, provider, catalog, theta=0.3, margin=0.02)
    for name, prop in endpoint.properties.items()
}

generated = instantiate_template(endpoint, alignments, codecs, provider)
print("--- rendered endpoint ---")
print(generated.source)
print("--- manifest (derived from the output, not the spec) ---")
for key in ("path", "method", "parameters", "response_fields", "validation_rules"):
    print(f"  {key}: {generated.manifest[key]}")

report = check_contract(generated, endpoint)
print(f"\ncontract check: {'pass' if report.passed else 'FAIL'} "
      f"({len(report.checks)} checks)")

# Mutate the output (drop the speed range rule) and watch the check fail.
mutated = generated.source.replace("    rule range speed 0 250\n", "")
broken = GeneratedEndpoint(source=mutated, manifest=derive_manifest(mutated))
report = check_contract(broken, endpoint)
print("after dropping a validation rule:")
for check in report.failures():
    print(f"  FAILED {check.name}: {check.detail}")
