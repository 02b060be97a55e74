"""Walkthrough: the synthesize -> validate -> self-debug loop.

A fault-injecting provider corrupts the first synthesis attempt with a known
bug class (here: writing the enum lookup as a call instead of an index).
Validation catches the mismatch against catalog-derived test vectors, the
failure list is fed back to the provider, and the second attempt passes.

Run:  python demos/02_debug_loop.py
"""

from signalforge import FaultPlan, FaultingProvider, RuleProvider, debug_loop
from signalforge.catalog import parse_catalog
from signalforge.codec import generate_test_vectors, synthesize_codec, validate_codec

catalog = parse_catalog("""
signals:
  - name: LowSupplyPress
    kind: enum
    bit_start: 0
    bit_length: 2
    enum_map: {0: NORMAL, 1: LOW, 2: CRITICAL}
    description: supply pressure state
""")
signal = catalog.get("LowSupplyPress")

# First: watch a single corrupted attempt fail validation.
faulty_provider = FaultingProvider(RuleProvider(), FaultPlan("bracket_misuse"))
codec, _ = synthesize_codec(signal, faulty_provider, catalog)
vectors = generate_test_vectors(signal, catalog)
report = validate_codec(codec, vectors)
print(f"attempt 1: {report.status}")
for failure in report.failures[:3]:
    print(f"  {failure.vector.direction} [{failure.vector.note}]: {failure.detail}")

# Now the full loop: same single-shot fault, repaired on the second attempt.
provider = FaultingProvider(RuleProvider(), FaultPlan("bracket_misuse"))
outcome = debug_loop(signal, provider, max_rounds=3, catalog=catalog)
print(f"\ndebug loop: {outcome.status} after {outcome.attempts} attempts")

meter = provider.meter_snapshot()
usage = meter.usage("codec_synthesis")
print(f"provider calls: {usage.calls}, failures: {usage.failures}")

# A provider that corrupts every attempt exhausts the budget and reports
# fail (exhaustion is a status, not an exception).
stubborn = FaultingProvider(
    RuleProvider(), FaultPlan("off_by_one_scale", single_shot=False)
)
catalog2 = parse_catalog("""
signals:
  - name: Pedal
    kind: numerical
    bit_start: 0
    bit_length: 8
    scale: 0.5
""")
outcome = debug_loop(catalog2.get("Pedal"), stubborn, max_rounds=2, catalog=catalog2)
print(f"\npersistent fault: {outcome.status} after {outcome.attempts} attempts")
print("last failures:")
for line in outcome.failures[:3]:
    print(" ", line)
