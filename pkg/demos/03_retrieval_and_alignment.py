"""Walkthrough: index signal descriptions, retrieve candidates, and emit
explicit alignment records for three classic property shapes:

* direct      — enum labels correspond one-to-one (ON/OFF vs 0/1),
* transformed — units differ (m/s on the bus, km/h in the API),
* composed    — one property aggregates several signals (minutes+seconds).

Run:  python demos/03_retrieval_and_alignment.py
"""

from signalforge import RuleProvider
from signalforge.alignment import ApiProperty, align_property, apply_alignment
from signalforge.catalog import insert_raw, parse_catalog
from signalforge.codec import synthesize_codec
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
  - name: Minute
    kind: numerical
    bit_start: 24
    bit_length: 8
    range_min: 0
    range_max: 59
    description: trip duration minute part
  - name: Second
    kind: numerical
    bit_start: 32
    bit_length: 8
    range_min: 0
    range_max: 59
    description: trip duration second part
  - name: TimeOfTrip
    kind: object
    components:
      - {name: Minute, weight: 60}
      - {name: Second, weight: 1}
    description: total trip duration
""")

provider = RuleProvider()
index = build_index(catalog, "rewritten_description", provider)
codecs = {s.name: synthesize_codec(s, provider, catalog)[0] for s in catalog}

properties = [
    ApiProperty(
        name="wiperActive",
        semantic_type="string-enum",
        allowed_values=("ON", "OFF"),
        description="State of the front wiper. Possible values are: OFF, ON.",
    ),
    ApiProperty(
        name="speed",
        semantic_type="number",
        unit="km/h",
        description="Vehicle speed over ground for display. Values are expressed in km/h.",
    ),
    ApiProperty(
        name="tripTimeSeconds",
        semantic_type="composite",
        description="Total trip duration. It combines the signals Minute and Second as a weighted sum.",
    ),
]

frame = insert_raw(catalog.get("WiperState"), 1)
frame = insert_raw(catalog.get("VehicleSpeed"), 1389, frame)  # 13.89 m/s
frame = insert_raw(catalog.get("Minute"), 2, frame)
frame = insert_raw(catalog.get("Second"), 5, frame)

for prop in properties:
    alignment = align_property(
        prop, index, provider, catalog, theta=0.30, margin=0.02
    )
    print(f"{prop.name}:")
    print(f"  mapping:      {alignment.mapping_kind}")
    print(f"  signals:      {list(alignment.contributing_signals)}")
    print(f"  status:       {alignment.status}")
    if alignment.enum_correspondence:
        print(f"  enum map:     {dict(alignment.enum_correspondence)}")
    if alignment.unit_conversion:
        factor, offset = alignment.unit_conversion
        print(f"  conversion:   value * {factor:g} + {offset:g}")
    print(f"  top match:    {alignment.candidates[0]}")
    value = apply_alignment(alignment, codecs, frame)
    print(f"  applied to a live frame -> {value!r}\n")
